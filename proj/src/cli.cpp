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

#include "mfa/cli.hpp"

#include "mfa/bench.hpp"
#include "mfa/estimator.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

namespace mfa
{

namespace
{

struct FitOptions
{
    int max_iter = 300;
    double tol = 1e-6;
    std::uint64_t seed = 0;
    std::string psi_mode = "scaled-identity";
    std::string init = "kmeans-pca";

    void add_to(CLI::App &cmd)
    {
        cmd.add_option("--max-iter", max_iter, "EM iteration cap")->check(CLI::PositiveNumber);
        cmd.add_option("--tol", tol, "relative log-likelihood tolerance")->check(CLI::PositiveNumber);
        cmd.add_option("--seed", seed, "initialization seed");
        cmd.add_option("--psi-mode", psi_mode, "noise covariance restriction")
            ->check(CLI::IsMember({"scaled-identity", "shared-diagonal", "component-diagonal"}));
        cmd.add_option("--init", init, "initialization")->check(CLI::IsMember({"kmeans-pca", "random"}));
    }

    FitConfig config() const
    {
        FitConfig c;
        c.max_iter = max_iter;
        c.rel_tol = tol;
        c.seed = seed;
        c.psi_mode = psi_mode == "shared-diagonal"      ? PsiMode::SharedDiagonal
                     : psi_mode == "component-diagonal" ? PsiMode::ComponentDiagonal
                                                        : PsiMode::ScaledIdentity;
        c.init = init == "random" ? InitMethod::Random : InitMethod::KMeansPca;
        return c;
    }
};

struct BenchOptions
{
    std::string spec_path;
    std::string out_path;
    std::string format = "csv";
    int jobs = -1;
    bool no_timing = false;

    void add_to(CLI::App &cmd)
    {
        cmd.add_option("--spec", spec_path, "bench spec (JSON)");
        cmd.add_option("--out", out_path, "report path (default stdout)");
        cmd.add_option("--format", format, "report format")->check(CLI::IsMember({"csv", "jsonl"}));
        cmd.add_option("--jobs", jobs, "worker threads, 0 for all cores")->check(CLI::NonNegativeNumber);
        cmd.add_flag("--no-timing", no_timing, "write wall_time_ms = 0");
    }

    BenchSpec spec() const
    {
        BenchSpec s = spec_path.empty() ? BenchSpec{} : load_bench_spec(spec_path);
        if (spec_path.empty())
            s.estimators.clear();
        if (jobs >= 0)
            s.jobs = jobs;
        if (no_timing)
            s.timing = false;
        return s;
    }

    void emit(const std::vector<ReportRow> &rows, std::ostream &out) const
    {
        const ReportFormat f = format == "jsonl" ? ReportFormat::JsonLines : ReportFormat::Csv;
        if (out_path.empty())
        {
            write_report(out, rows, f);
            return;
        }
        std::ofstream file(out_path, std::ios::binary | std::ios::trunc);
        if (!file)
            throw std::runtime_error("cannot open " + out_path + " for writing");
        write_report(file, rows, f);
        if (!file)
            throw std::runtime_error("failed writing " + out_path);
    }
};

std::string read_text(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<Index> to_index(const std::vector<int> &v)
{
    return {v.begin(), v.end()};
}

void print_trace(std::ostream &out, const FitTrace &trace)
{
    out << "iterations " << trace.iterations << (trace.converged ? " (converged)" : " (iteration cap)") << '\n';
    out << "log-likelihood " << trace.log_likelihood.front() << " -> " << trace.log_likelihood.back() << '\n';
    if (!trace.reseeds.empty())
        out << "reseeded components " << trace.reseeds.size() << '\n';
}

void write_trace(const std::string &path, const FitTrace &trace)
{
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw std::runtime_error("cannot open " + path + " for writing");
    f << "iteration,log_likelihood\r\n";
    char buf[32];
    for (std::size_t i = 0; i < trace.log_likelihood.size(); ++i)
    {
        std::snprintf(buf, sizeof buf, "%.17g", trace.log_likelihood[i]);
        f << i << ',' << buf << "\r\n";
    }
}

bool has_magic(const std::string &path, std::string_view magic)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    std::string head(magic.size(), '\0');
    in.read(head.data(), static_cast<std::streamsize>(head.size()));
    return in && head == magic;
}

} // namespace

int cli_main(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
    CLI::App app{"Mixture-of-factor-analyzers channel estimation toolkit", "mfa"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    // generate
    auto *generate = app.add_subcommand("generate", "generate a synthetic channel dataset");
    std::string config_path, data_out;
    Index T = 0;
    std::uint64_t stream_seed = 0;
    generate->add_option("--config", config_path, "scenario config (JSON)");
    generate->add_option("--t", T, "number of samples")->required()->check(CLI::PositiveNumber);
    generate->add_option("--stream-seed", stream_seed, "sample stream seed");
    generate->add_option("--out", data_out, "dataset path")->required();

    // fit-mfa / fit-gmm
    auto *fit_mfa = app.add_subcommand("fit-mfa", "fit an MFA model by EM");
    auto *fit_gmm_cmd = app.add_subcommand("fit-gmm", "fit a full/Toeplitz/circulant GMM by EM");
    std::string fit_data, fit_out, trace_out, structure = "full";
    Index K = 1, L = 1;
    FitOptions fit_opts;
    for (auto *cmd : {fit_mfa, fit_gmm_cmd})
    {
        cmd->add_option("--data", fit_data, "training dataset")->required();
        cmd->add_option("--k", K, "mixture components")->required()->check(CLI::PositiveNumber);
        cmd->add_option("--out", fit_out, "model path")->required();
        cmd->add_option("--trace", trace_out, "write the log-likelihood trace as CSV");
        fit_opts.add_to(*cmd);
    }
    fit_mfa->add_option("--l", L, "latent dimension")->required()->check(CLI::PositiveNumber);
    fit_gmm_cmd->add_option("--structure", structure, "covariance structure")
        ->check(CLI::IsMember({"full", "toeplitz", "circulant"}));

    // estimate
    auto *estimate_cmd = app.add_subcommand("estimate", "estimate channels from noisy observations");
    std::string model_path, obs_path, est_out, truth_path;
    double snr_db = 0.0;
    estimate_cmd->add_option("--model", model_path, "MFA1 or GMM1 model")->required();
    estimate_cmd->add_option("--data", obs_path, "observations (CHD1)")->required();
    estimate_cmd->add_option("--snr-db", snr_db, "observation SNR")->required();
    estimate_cmd->add_option("--out", est_out, "estimates (CHD1)");
    estimate_cmd->add_option("--truth", truth_path, "true channels; prints the nMSE");

    // benches
    auto *bench_snr = app.add_subcommand("bench-snr", "nMSE over the SNR grid");
    auto *bench_latent = app.add_subcommand("bench-latent", "nMSE over the latent dimension");
    auto *bench_grid = app.add_subcommand("bench-grid", "nMSE over a (K, L) grid");
    BenchOptions bench_opts;
    std::vector<int> k_grid, l_grid;
    double bench_snr_db = 10.0;
    std::string dump_eval;
    for (auto *cmd : {bench_snr, bench_latent, bench_grid})
        bench_opts.add_to(*cmd);
    bench_snr->add_option("--dump-eval", dump_eval, "directory for the eval channels and observations");
    bench_latent->add_option("--l-grid", l_grid, "latent dimensions")->required()->delimiter(',');
    bench_grid->add_option("--k-grid", k_grid, "component counts")->required()->delimiter(',');
    bench_grid->add_option("--l-grid", l_grid, "latent dimensions")->required()->delimiter(',');
    for (auto *cmd : {bench_latent, bench_grid})
        cmd->add_option("--snr-db", bench_snr_db, "evaluation SNR");

    // param-count
    auto *param_count = app.add_subcommand("param-count", "number of real model parameters");
    std::string kind;
    std::int64_t pc_k = 0, pc_n = 0, pc_l = 0;
    param_count->add_option("--kind", kind, "model kind")
        ->required()
        ->check(CLI::IsMember({"mfa", "gmm-full", "gmm-toep", "gmm-circ"}));
    param_count->add_option("--k", pc_k, "components")->required()->check(CLI::PositiveNumber);
    param_count->add_option("--n", pc_n, "dimension")->required()->check(CLI::PositiveNumber);
    param_count->add_option("--l", pc_l, "latent dimension (mfa)")->check(CLI::NonNegativeNumber);

    try
    {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e, out, err);
        if (code == 0)
            return 0;
        const auto used = app.get_subcommands();
        err << (used.empty() ? app.help() : used.front()->help());
        return 1;
    }

    try
    {
        if (generate->parsed())
        {
            const ScenarioConfig config =
                config_path.empty() ? ScenarioConfig{} : parse_scenario_config(read_text(config_path));
            const ChannelDataset ds = generate_channels(config, T, stream_seed);
            write_dataset(data_out, ds);
            out << "wrote " << ds.size() << " samples of dimension " << ds.dim() << " to " << data_out << '\n';
        }
        else if (fit_mfa->parsed())
        {
            const ChannelDataset ds = read_dataset(fit_data);
            const FitResult fit = fit_em(ds, K, L, fit_opts.config());
            write_model(fit_out, fit.model);
            if (!trace_out.empty())
                write_trace(trace_out, fit.trace);
            print_trace(out, fit.trace);
        }
        else if (fit_gmm_cmd->parsed())
        {
            const ChannelDataset ds = read_dataset(fit_data);
            const CovStructure s = structure == "toeplitz"    ? CovStructure::Toeplitz
                                   : structure == "circulant" ? CovStructure::Circulant
                                                              : CovStructure::Full;
            const GmmFitResult fit = fit_gmm(ds, K, s, fit_opts.config());
            write_gmm(fit_out, fit.model);
            if (!trace_out.empty())
                write_trace(trace_out, fit.trace);
            print_trace(out, fit.trace);
        }
        else if (estimate_cmd->parsed())
        {
            const ChannelDataset obs = read_dataset(obs_path);
            const NoiseLevel noise = NoiseLevel::from_snr_db(snr_db);
            ChannelDataset result;
            if (has_magic(model_path, "GMM1"))
            {
                const GmmModel model = read_gmm(model_path);
                if (model.dim() != obs.dim())
                    throw std::runtime_error("model and observations differ in dimension");
                result.samples = GmmFilterBank(model, noise).estimate_batch(obs.samples);
            }
            else
            {
                const MfaModel model = read_model(model_path);
                if (model.dim() != obs.dim())
                    throw std::runtime_error("model and observations differ in dimension");
                result.samples = estimate_batch(build_filter_bank(model, noise), obs.samples);
            }
            if (!est_out.empty())
                write_dataset(est_out, result);
            if (!truth_path.empty())
            {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.17g", nmse(result.samples, read_dataset(truth_path).samples));
                out << "nmse " << buf << '\n';
            }
        }
        else if (bench_snr->parsed())
        {
            const BenchSpec spec = bench_opts.spec();
            std::vector<ReportRow> rows;
            if (!spec.estimators.empty() || !dump_eval.empty())
            {
                const BenchData data = load_bench_data(spec);
                if (!dump_eval.empty())
                {
                    const std::filesystem::path dir(dump_eval);
                    std::filesystem::create_directories(dir);
                    write_dataset(dir / "eval.chd", data.eval);
                    for (std::size_t s = 0; s < spec.snr_grid_db.size(); ++s)
                        write_dataset(dir / ("obs_" + std::to_string(s) + ".chd"),
                                      ChannelDataset{eval_observations(data.eval, spec.seed, s, spec.snr_grid_db[s])});
                }
                rows = run_snr_sweep(spec, data);
            }
            bench_opts.emit(rows, out);
        }
        else if (bench_latent->parsed())
            bench_opts.emit(run_latent_sweep(bench_opts.spec(), to_index(l_grid), bench_snr_db), out);
        else if (bench_grid->parsed())
            bench_opts.emit(run_grid_sweep(bench_opts.spec(), to_index(k_grid), to_index(l_grid), bench_snr_db), out);
        else if (param_count->parsed())
        {
            const ParamKind pk = kind == "mfa"        ? ParamKind::Mfa
                                 : kind == "gmm-full" ? ParamKind::GmmFull
                                 : kind == "gmm-toep" ? ParamKind::GmmToeplitz
                                                      : ParamKind::GmmCirculant;
            out << parameter_count(pk, pc_k, pc_n, pc_l) << '\n';
        }
    }
    catch (const std::invalid_argument &e)
    {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    catch (const std::exception &e)
    {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

int cli_main(int argc, const char *const *argv)
{
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i)
        args.emplace_back(argv[i]);
    return cli_main(args, std::cout, std::cerr);
}

} // namespace mfa
