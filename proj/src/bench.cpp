// SPDX-License-Identifier: Apache-2.0
//
// mfa-chest: low-rank mixture models for MMSE channel estimation
// Copyright (C) 2026 The mfa-chest Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "mfa/bench.hpp"

#include "mfa/baselines.hpp"
#include "mfa/estimator.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace mfa
{

using nlohmann::json;

namespace
{

constexpr std::pair<EstimatorKind, std::string_view> kKindNames[] = {
    {EstimatorKind::Ls, "ls"},
    {EstimatorKind::SampleLmmse, "lmmse"},
    {EstimatorKind::GenieOmp, "genie-omp"},
    {EstimatorKind::GmmFull, "gmm-full"},
    {EstimatorKind::GmmToeplitz, "gmm-toep"},
    {EstimatorKind::GmmCirculant, "gmm-circ"},
    {EstimatorKind::Mfa, "mfa"},
    {EstimatorKind::MfaFile, "mfa-file"},
    {EstimatorKind::GmmFile, "gmm-file"},
};

bool is_trained_gmm(EstimatorKind kind)
{
    return kind == EstimatorKind::GmmFull || kind == EstimatorKind::GmmToeplitz ||
           kind == EstimatorKind::GmmCirculant;
}

CovStructure structure_of(EstimatorKind kind)
{
    switch (kind)
    {
    case EstimatorKind::GmmToeplitz:
        return CovStructure::Toeplitz;
    case EstimatorKind::GmmCirculant:
        return CovStructure::Circulant;
    default:
        return CovStructure::Full;
    }
}

void check_keys(const json &j, std::initializer_list<std::string_view> allowed, const char *where)
{
    if (!j.is_object())
        throw std::invalid_argument(std::string(where) + " must be a JSON object");
    for (const auto &item : j.items())
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
            throw std::invalid_argument(std::string("unknown key '") + item.key() + "' in " + where);
}

template <typename T> void read_if(const json &j, const char *key, T &target)
{
    if (auto it = j.find(key); it != j.end())
        target = it->get<T>();
}

ScenarioConfig scenario_from_json(const json &j)
{
    check_keys(j,
               {"nv", "nh", "spacing_v", "spacing_h", "num_clusters", "paths_per_cluster", "angle_spread_deg",
                "seed"},
               "scenario");
    ScenarioConfig c;
    read_if(j, "nv", c.Nv);
    read_if(j, "nh", c.Nh);
    read_if(j, "spacing_v", c.spacing_v);
    read_if(j, "spacing_h", c.spacing_h);
    read_if(j, "num_clusters", c.num_clusters);
    read_if(j, "paths_per_cluster", c.paths_per_cluster);
    read_if(j, "angle_spread_deg", c.angle_spread_deg);
    read_if(j, "seed", c.seed);
    c.validate();
    return c;
}

PsiMode parse_psi_mode(const std::string &s)
{
    if (s == "scaled-identity")
        return PsiMode::ScaledIdentity;
    if (s == "shared-diagonal")
        return PsiMode::SharedDiagonal;
    if (s == "component-diagonal")
        return PsiMode::ComponentDiagonal;
    throw std::invalid_argument("unknown psi_mode '" + s + "'");
}

InitMethod parse_init(const std::string &s)
{
    if (s == "kmeans-pca")
        return InitMethod::KMeansPca;
    if (s == "random")
        return InitMethod::Random;
    throw std::invalid_argument("unknown init '" + s + "'");
}

json parse_json(std::string_view text)
{
    try
    {
        return json::parse(text);
    }
    catch (const json::parse_error &err)
    {
        throw std::invalid_argument(std::string("malformed JSON: ") + err.what());
    }
}

// Bounded pool over job indices; rethrows the first failure after all workers stop.
template <typename F> void parallel_for(std::size_t count, int jobs, F &&body)
{
    if (count == 0)
        return;
    std::size_t workers = jobs > 0 ? static_cast<std::size_t>(jobs) : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, count);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto run = [&] {
        for (std::size_t i; !failed && (i = next++) < count;)
        {
            try
            {
                body(i);
            }
            catch (...)
            {
                std::lock_guard lock(error_mutex);
                if (!error)
                    error = std::current_exception();
                failed = true;
            }
        }
    };
    if (workers == 1)
        run();
    else
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back(run);
    }
    if (error)
        std::rethrow_exception(error);
}

// One estimator at one (K, L) setting.
struct Cell
{
    std::size_t estimator;
    Index K = 0;
    Index L = 0;
};

struct Trained
{
    EstimatorKind kind = EstimatorKind::Ls;
    Index K = 0;
    Index L = 0;
    SampleCovariance cov;
    Dictionary dict;
    int s_max = 1;
    std::shared_ptr<const MfaModel> mfa;
    std::shared_ptr<const GmmModel> gmm;
};

// Pre-trained models, resolved before any training or estimation.
struct Resolved
{
    std::vector<std::shared_ptr<const MfaModel>> mfa;
    std::vector<std::shared_ptr<const GmmModel>> gmm;
};

Resolved resolve_models(const BenchSpec &spec, Index dim)
{
    Resolved r;
    r.mfa.resize(spec.estimators.size());
    r.gmm.resize(spec.estimators.size());
    for (std::size_t i = 0; i < spec.estimators.size(); ++i)
    {
        const auto &e = spec.estimators[i];
        if (e.kind == EstimatorKind::MfaFile)
        {
            r.mfa[i] = e.mfa_model ? e.mfa_model : std::make_shared<const MfaModel>(read_model(e.model_path));
            if (r.mfa[i]->dim() != dim)
                throw std::runtime_error("model for '" + e.id + "' does not match the data dimension");
        }
        else if (e.kind == EstimatorKind::GmmFile)
        {
            r.gmm[i] = e.gmm_model ? e.gmm_model : std::make_shared<const GmmModel>(read_gmm(e.model_path));
            if (r.gmm[i]->dim() != dim)
                throw std::runtime_error("model for '" + e.id + "' does not match the data dimension");
        }
    }
    return r;
}

Trained train(const BenchSpec &spec, const BenchData &data, const Resolved &resolved, const Cell &cell)
{
    const EstimatorSpec &e = spec.estimators[cell.estimator];
    Trained t;
    t.kind = e.kind;
    t.K = cell.K;
    t.L = cell.L;
    switch (e.kind)
    {
    case EstimatorKind::Ls:
        break;
    case EstimatorKind::SampleLmmse:
        t.cov = fit_sample_lmmse(data.train);
        break;
    case EstimatorKind::GenieOmp: {
        int nv = e.Nv > 0 ? e.Nv : data.Nv;
        int nh = e.Nh > 0 ? e.Nh : (data.Nh > 0 ? data.Nh : static_cast<int>(data.eval.dim()) / nv);
        if (static_cast<Index>(nv) * nh != data.eval.dim())
            throw std::invalid_argument("genie-omp dictionary axes do not match the data dimension");
        // keep M = oversampling^2 N when one axis is degenerate
        const int ov = e.oversampling;
        t.dict = nv == 1 ? build_dft_dictionary(1, nh, 1, ov * ov)
                 : nh == 1 ? build_dft_dictionary(nv, 1, ov * ov, 1)
                           : build_dft_dictionary(nv, nh, ov, ov);
        const int n = static_cast<int>(data.eval.dim());
        t.s_max = e.s_max > 0 ? std::min(e.s_max, n) : n;
        break;
    }
    case EstimatorKind::GmmFull:
    case EstimatorKind::GmmToeplitz:
    case EstimatorKind::GmmCirculant:
        t.gmm = std::make_shared<const GmmModel>(fit_gmm(data.train, cell.K, structure_of(e.kind), spec.fit).model);
        break;
    case EstimatorKind::Mfa:
        t.mfa = std::make_shared<const MfaModel>(fit_em(data.train, cell.K, cell.L, spec.fit).model);
        break;
    case EstimatorKind::MfaFile:
        t.mfa = resolved.mfa[cell.estimator];
        break;
    case EstimatorKind::GmmFile:
        t.gmm = resolved.gmm[cell.estimator];
        break;
    }
    return t;
}

ComplexMat run_estimator(const Trained &t, const ComplexMat &y, const ComplexMat &truth, NoiseLevel noise)
{
    switch (t.kind)
    {
    case EstimatorKind::Ls:
        return y;
    case EstimatorKind::SampleLmmse:
        return lmmse_filter(t.cov, noise) * y;
    case EstimatorKind::GenieOmp: {
        ComplexMat out(y.rows(), y.cols());
        for (Index i = 0; i < y.cols(); ++i)
            out.col(i) = genie_omp(y.col(i), t.dict, truth.col(i), t.s_max);
        return out;
    }
    case EstimatorKind::Mfa:
    case EstimatorKind::MfaFile:
        return estimate_batch(build_filter_bank(*t.mfa, noise), y);
    default:
        return GmmFilterBank(*t.gmm, noise).estimate_batch(y);
    }
}

std::vector<ReportRow> run_cells(const BenchSpec &spec, const BenchData &data, std::vector<Cell> cells,
                                 const std::vector<double> &snrs)
{
    const Resolved resolved = resolve_models(spec, data.eval.dim());
    if (cells.empty())
        return {};
    std::stable_sort(cells.begin(), cells.end(), [](const Cell &a, const Cell &b) {
        return std::tie(a.estimator, a.K, a.L) < std::tie(b.estimator, b.K, b.L);
    });

    std::vector<Trained> trained(cells.size());
    parallel_for(cells.size(), spec.jobs, [&](std::size_t i) { trained[i] = train(spec, data, resolved, cells[i]); });

    std::vector<ComplexMat> observations(snrs.size());
    for (std::size_t s = 0; s < snrs.size(); ++s)
        observations[s] = eval_observations(data.eval, spec.seed, s, snrs[s]);

    std::vector<ReportRow> rows(cells.size() * snrs.size());
    parallel_for(rows.size(), spec.jobs, [&](std::size_t r) {
        const std::size_t c = r / snrs.size();
        const std::size_t s = r % snrs.size();
        const Trained &t = trained[c];
        const auto &e = spec.estimators[cells[c].estimator];
        const NoiseLevel noise = NoiseLevel::from_snr_db(snrs[s]);

        const auto start = std::chrono::steady_clock::now();
        const ComplexMat est = run_estimator(t, observations[s], data.eval.samples, noise);
        const std::chrono::duration<double, std::milli> elapsed = std::chrono::steady_clock::now() - start;

        ReportRow &row = rows[r];
        row.estimator = e.id;
        row.K = t.K;
        row.L = t.L;
        row.T = data.train.size();
        row.snr_db = snrs[s];
        row.nmse = nmse(est, data.eval.samples);
        row.wall_time_ms = spec.timing ? elapsed.count() : 0.0;
    });
    return rows;
}

// The (K, L) a non-swept estimator reports.
Cell base_cell(const BenchSpec &spec, std::size_t i)
{
    const auto &e = spec.estimators[i];
    switch (e.kind)
    {
    case EstimatorKind::Ls:
    case EstimatorKind::GenieOmp:
        return {i, 0, 0};
    case EstimatorKind::SampleLmmse:
        return {i, 1, 0};
    case EstimatorKind::Mfa:
        return {i, e.K, e.L};
    case EstimatorKind::MfaFile:
        return e.mfa_model ? Cell{i, e.mfa_model->num_components(), e.mfa_model->latent_dim()} : Cell{i, 0, 0};
    case EstimatorKind::GmmFile:
        return e.gmm_model ? Cell{i, e.gmm_model->num_components(), 0} : Cell{i, 0, 0};
    default:
        return {i, e.K, 0};
    }
}

void check_grid(const std::vector<Index> &grid, const char *name)
{
    if (grid.empty())
        throw std::invalid_argument(std::string(name) + " grid must not be empty");
    for (Index v : grid)
        if (v < 1)
            throw std::invalid_argument(std::string(name) + " grid values must be positive");
}

// Pre-trained rows report the model's own K and L once it is loaded.
void fix_loaded_shapes(const BenchSpec &spec, const BenchData &data, std::vector<Cell> &cells)
{
    bool needs = false;
    for (const auto &c : cells)
    {
        const auto kind = spec.estimators[c.estimator].kind;
        needs |= (kind == EstimatorKind::MfaFile || kind == EstimatorKind::GmmFile) && c.K == 0;
    }
    if (!needs)
        return;
    const Resolved r = resolve_models(spec, data.eval.dim());
    for (auto &c : cells)
    {
        if (r.mfa[c.estimator])
        {
            c.K = r.mfa[c.estimator]->num_components();
            c.L = r.mfa[c.estimator]->latent_dim();
        }
        else if (r.gmm[c.estimator])
            c.K = r.gmm[c.estimator]->num_components();
    }
}

} // namespace

std::string_view to_string(EstimatorKind kind)
{
    for (const auto &[k, name] : kKindNames)
        if (k == kind)
            return name;
    return "unknown";
}

EstimatorKind parse_estimator_kind(std::string_view name)
{
    for (const auto &[k, n] : kKindNames)
        if (n == name)
            return k;
    throw std::invalid_argument("unknown estimator kind '" + std::string(name) + "'");
}

void BenchSpec::validate() const
{
    if (snr_grid_db.empty())
        throw std::invalid_argument("snr_grid_db must not be empty");
    const bool files = !train_path.empty() || !eval_path.empty();
    if (files && scenario)
        throw std::invalid_argument("bench spec names both a scenario and dataset files");
    if (files && (train_path.empty() || eval_path.empty()))
        throw std::invalid_argument("bench spec needs both train and eval dataset paths");
    if (train_count < 1 || eval_count < 1)
        throw std::invalid_argument("train_count and eval_count must be positive");
    if (jobs < 0)
        throw std::invalid_argument("jobs must be nonnegative");
    fit.validate();
    std::set<std::string> ids;
    for (const auto &e : estimators)
    {
        if (e.id.empty())
            throw std::invalid_argument("estimator id must not be empty");
        if (!ids.insert(e.id).second)
            throw std::invalid_argument("duplicate estimator id '" + e.id + "'");
        if (e.K < 1 || e.L < 1 || e.s_max < 0 || e.oversampling < 1 || e.Nv < 0 || e.Nh < 0)
            throw std::invalid_argument("estimator '" + e.id + "' has invalid hyperparameters");
        if (e.kind == EstimatorKind::MfaFile && !e.mfa_model && e.model_path.empty())
            throw std::invalid_argument("estimator '" + e.id + "' needs a model path");
        if (e.kind == EstimatorKind::GmmFile && !e.gmm_model && e.model_path.empty())
            throw std::invalid_argument("estimator '" + e.id + "' needs a model path");
    }
}

ScenarioConfig parse_scenario_config(std::string_view json_text)
{
    return scenario_from_json(parse_json(json_text));
}

BenchSpec parse_bench_spec(std::string_view json_text)
{
    const json j = parse_json(json_text);
    check_keys(j,
               {"scenario", "train", "eval", "train_count", "eval_count", "estimators", "snr_grid_db", "seed", "fit",
                "jobs", "timing"},
               "bench spec");
    BenchSpec spec;
    try
    {
        if (j.contains("scenario"))
            spec.scenario = scenario_from_json(j.at("scenario"));
        if (j.contains("train"))
            spec.train_path = j.at("train").get<std::string>();
        if (j.contains("eval"))
            spec.eval_path = j.at("eval").get<std::string>();
        read_if(j, "train_count", spec.train_count);
        read_if(j, "eval_count", spec.eval_count);
        read_if(j, "snr_grid_db", spec.snr_grid_db);
        read_if(j, "seed", spec.seed);
        read_if(j, "jobs", spec.jobs);
        read_if(j, "timing", spec.timing);
        spec.fit.seed = spec.seed;
        if (j.contains("fit"))
        {
            const json &f = j.at("fit");
            check_keys(f, {"max_iter", "rel_tol", "seed", "psi_mode", "init", "kmeans_iter", "weight_floor"}, "fit");
            read_if(f, "max_iter", spec.fit.max_iter);
            read_if(f, "rel_tol", spec.fit.rel_tol);
            read_if(f, "seed", spec.fit.seed);
            read_if(f, "kmeans_iter", spec.fit.kmeans_iter);
            read_if(f, "weight_floor", spec.fit.weight_floor);
            if (f.contains("psi_mode"))
                spec.fit.psi_mode = parse_psi_mode(f.at("psi_mode").get<std::string>());
            if (f.contains("init"))
                spec.fit.init = parse_init(f.at("init").get<std::string>());
        }
        if (j.contains("estimators"))
        {
            for (const json &e : j.at("estimators"))
            {
                check_keys(e, {"id", "kind", "k", "l", "s_max", "nv", "nh", "oversampling", "path"}, "estimator");
                EstimatorSpec es;
                es.kind = parse_estimator_kind(e.at("kind").get<std::string>());
                es.id = e.value("id", std::string(to_string(es.kind)));
                read_if(e, "k", es.K);
                read_if(e, "l", es.L);
                read_if(e, "s_max", es.s_max);
                read_if(e, "nv", es.Nv);
                read_if(e, "nh", es.Nh);
                read_if(e, "oversampling", es.oversampling);
                if (e.contains("path"))
                    es.model_path = e.at("path").get<std::string>();
                spec.estimators.push_back(std::move(es));
            }
        }
    }
    catch (const json::exception &err)
    {
        throw std::invalid_argument(std::string("bad bench spec: ") + err.what());
    }
    spec.validate();
    return spec;
}

BenchSpec load_bench_spec(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open bench spec " + path.string());
    std::stringstream text;
    text << in.rdbuf();
    BenchSpec spec = parse_bench_spec(text.str());
    const auto base = path.parent_path();
    auto rebase = [&](std::filesystem::path &p) {
        if (!p.empty() && p.is_relative())
            p = base / p;
    };
    rebase(spec.train_path);
    rebase(spec.eval_path);
    for (auto &e : spec.estimators)
        rebase(e.model_path);
    return spec;
}

BenchData load_bench_data(const BenchSpec &spec)
{
    spec.validate();
    BenchData data;
    if (!spec.train_path.empty())
    {
        data.train = read_dataset(spec.train_path);
        data.eval = read_dataset(spec.eval_path);
        if (data.train.dim() != data.eval.dim())
            throw std::runtime_error("train and eval datasets differ in dimension");
        data.Nh = 0;
    }
    else
    {
        const ScenarioConfig config = spec.scenario.value_or(ScenarioConfig{});
        data.train = generate_channels(config, spec.train_count, 2 * spec.seed + 1);
        data.eval = generate_channels(config, spec.eval_count, 2 * spec.seed + 2);
        data.Nv = config.Nv;
        data.Nh = config.Nh;
    }
    resolve_models(spec, data.eval.dim());
    return data;
}

ComplexMat eval_observations(const ChannelDataset &eval, std::uint64_t seed, std::size_t snr_index, double snr_db)
{
    std::seed_seq seq{seed, std::uint64_t{0xE7A1u}, static_cast<std::uint64_t>(snr_index)};
    Rng rng(seq);
    return corrupt_samples(eval.samples, snr_db, rng);
}

double nmse(const ComplexMat &estimates, const ComplexMat &truth)
{
    if (estimates.rows() != truth.rows() || estimates.cols() != truth.cols() || truth.size() == 0)
        throw std::invalid_argument("nmse: shape mismatch");
    return (estimates - truth).squaredNorm() / static_cast<double>(truth.size());
}

std::vector<ReportRow> run_snr_sweep(const BenchSpec &spec)
{
    spec.validate();
    if (spec.estimators.empty())
        return {};
    return run_snr_sweep(spec, load_bench_data(spec));
}

std::vector<ReportRow> run_snr_sweep(const BenchSpec &spec, const BenchData &data)
{
    spec.validate();
    std::vector<Cell> cells;
    for (std::size_t i = 0; i < spec.estimators.size(); ++i)
        cells.push_back(base_cell(spec, i));
    fix_loaded_shapes(spec, data, cells);
    return run_cells(spec, data, std::move(cells), spec.snr_grid_db);
}

std::vector<ReportRow> run_latent_sweep(const BenchSpec &spec, const std::vector<Index> &L_grid, double snr_db)
{
    spec.validate();
    check_grid(L_grid, "L");
    if (spec.estimators.empty())
        return {};
    return run_latent_sweep(spec, load_bench_data(spec), L_grid, snr_db);
}

std::vector<ReportRow> run_latent_sweep(const BenchSpec &spec, const BenchData &data,
                                        const std::vector<Index> &L_grid, double snr_db)
{
    spec.validate();
    check_grid(L_grid, "L");
    std::vector<Cell> cells;
    for (std::size_t i = 0; i < spec.estimators.size(); ++i)
    {
        if (spec.estimators[i].kind == EstimatorKind::Mfa)
            for (Index L : L_grid)
                cells.push_back({i, spec.estimators[i].K, L});
        else
            cells.push_back(base_cell(spec, i));
    }
    fix_loaded_shapes(spec, data, cells);
    return run_cells(spec, data, std::move(cells), {snr_db});
}

std::vector<ReportRow> run_grid_sweep(const BenchSpec &spec, const std::vector<Index> &K_grid,
                                      const std::vector<Index> &L_grid, double snr_db)
{
    spec.validate();
    check_grid(K_grid, "K");
    check_grid(L_grid, "L");
    if (spec.estimators.empty())
        return {};
    return run_grid_sweep(spec, load_bench_data(spec), K_grid, L_grid, snr_db);
}

std::vector<ReportRow> run_grid_sweep(const BenchSpec &spec, const BenchData &data, const std::vector<Index> &K_grid,
                                      const std::vector<Index> &L_grid, double snr_db)
{
    spec.validate();
    check_grid(K_grid, "K");
    check_grid(L_grid, "L");
    std::vector<Cell> cells;
    for (std::size_t i = 0; i < spec.estimators.size(); ++i)
    {
        const auto kind = spec.estimators[i].kind;
        if (kind == EstimatorKind::Mfa)
        {
            for (Index K : K_grid)
                for (Index L : L_grid)
                    cells.push_back({i, K, L});
        }
        else if (is_trained_gmm(kind))
        {
            for (Index K : K_grid)
                cells.push_back({i, K, 0});
        }
        else
            cells.push_back(base_cell(spec, i));
    }
    fix_loaded_shapes(spec, data, cells);
    return run_cells(spec, data, std::move(cells), {snr_db});
}

std::string csv_quote(std::string_view field)
{
    if (field.find_first_of(",\"\r\n") == std::string_view::npos)
        return std::string(field);
    std::string out = "\"";
    for (char c : field)
    {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void write_report(std::ostream &out, const std::vector<ReportRow> &rows, ReportFormat format)
{
    // %.17g keeps every double round-trippable
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    if (format == ReportFormat::Csv)
    {
        out << "estimator,K,L,T,snr_db,nmse,wall_time_ms\r\n";
        for (const auto &r : rows)
            out << csv_quote(r.estimator) << ',' << r.K << ',' << r.L << ',' << r.T << ',' << num(r.snr_db) << ','
                << num(r.nmse) << ',' << num(r.wall_time_ms) << "\r\n";
        return;
    }
    for (const auto &r : rows)
    {
        json j{{"estimator", r.estimator}, {"K", r.K},        {"L", r.L},
               {"T", r.T},                 {"snr_db", r.snr_db}, {"nmse", r.nmse},
               {"wall_time_ms", r.wall_time_ms}};
        out << j.dump() << '\n';
    }
}

} // namespace mfa
