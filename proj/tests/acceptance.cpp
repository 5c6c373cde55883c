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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// Usage: acceptance [criterion ...]   (default: all)

#include "mfa/baselines.hpp"
#include "mfa/bench.hpp"
#include "mfa/dataset.hpp"
#include "mfa/estimator.hpp"
#include "mfa/gaussian.hpp"
#include "mfa/gmm.hpp"
#include "mfa/model.hpp"
#include "mfa/scenario.hpp"

#include "test_util.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace mfa;
using Clock = std::chrono::steady_clock;

namespace
{

struct Verdict
{
    bool pass;
    std::string detail;
};

std::string fmt(const char *f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Rescales a model so that E||h||^2 = N, matching the dataset normalization.
MfaModel normalized(const MfaModel &m)
{
    double energy = 0.0;
    for (const auto &c : m.components())
        energy += c.weight * (c.mean.squaredNorm() + c.cov.dense().trace().real());
    const double s = std::sqrt(static_cast<double>(m.dim()) / energy);
    std::vector<MfaComponent> comps = m.components();
    for (auto &c : comps)
    {
        c.mean *= s;
        c.cov.loading *= s;
        c.cov.diag_term *= s * s;
    }
    return MfaModel(std::move(comps));
}

double round_sig(double x, int digits)
{
    const double p = std::pow(10.0, digits - 1 - std::floor(std::log10(std::abs(x))));
    return std::round(x * p) / p;
}

ChannelDataset doubles(const ChannelDataset &ds)
{
    std::stringstream ss;
    write_dataset(ss, ds);
    return read_dataset(ss);
}

// -- criteria ---------------------------------------------------------------

Verdict woodbury_equivalence()
{
    const auto start = Clock::now();
    Rng rng(101);
    std::uniform_int_distribution<int> dimN(1, 64);
    std::uniform_real_distribution<double> sig(0.01, 2.0);
    double worst_inv = 0.0, worst_logdet = 0.0;
    for (int i = 0; i < 200; ++i)
    {
        const Index N = dimN(rng);
        const Index L = std::uniform_int_distribution<int>(1, static_cast<int>(std::min<Index>(32, N)))(rng);
        const LowRankCovariance cov = mfa::test::random_cov(N, L, rng, i % 2 == 0);
        const NoiseLevel noise{sig(rng)};
        const ComplexMat dense = mfa::test::with_noise(cov, noise.sigma2);
        const ComplexMat inv = dense.llt().solve(ComplexMat::Identity(N, N));
        worst_inv = std::max(worst_inv, (woodbury_inverse(cov, noise) - inv).norm() / inv.norm());
        worst_logdet = std::max(worst_logdet, std::abs(lowrank_logdet(cov, noise) - mfa::test::dense_logdet(dense)));
    }
    const double t = seconds_since(start);
    return {worst_inv < 1e-9 && worst_logdet < 1e-9 && t < 10.0,
            fmt("200 instances, max rel inverse err %.2e, max logdet err %.2e, %.2f s", worst_inv, worst_logdet, t)};
}

Verdict table_values()
{
    const std::int64_t got[6] = {parameter_count(ParamKind::Mfa, 64, 64, 2),
                                 parameter_count(ParamKind::Mfa, 64, 64, 8),
                                 parameter_count(ParamKind::Mfa, 64, 64, 16),
                                 parameter_count(ParamKind::GmmFull, 64, 64),
                                 parameter_count(ParamKind::GmmToeplitz, 64, 64),
                                 parameter_count(ParamKind::GmmCirculant, 64, 64)};
    const std::int64_t exact[6] = {12416, 64 * (512 + 64 + 2), 69760, 139328, 20544, 8256};
    bool formula = true;
    for (int i = 0; i < 6; ++i)
        formula &= got[i] == exact[i];
    // reference MFA counts quoted to 3 significant figures
    const double quoted[3] = {1.24e4, 3.67e4, 6.98e4};
    bool rounded = true;
    std::string misses;
    for (int i = 0; i < 3; ++i)
        if (round_sig(static_cast<double>(got[i]), 3) != quoted[i])
        {
            rounded = false;
            misses += fmt(" %lld->%.3g vs quoted %.3g;", static_cast<long long>(got[i]),
                          round_sig(static_cast<double>(got[i]), 3), quoted[i]);
        }
    return {formula && rounded, fmt("formula values %s; quoted 3 s.f. %s", formula ? "exact" : "MISMATCH",
                                    rounded ? "agree" : ("disagree:" + misses).c_str())};
}

Verdict estimator_limits()
{
    Rng rng(303);
    struct Case
    {
        Index K, N, L;
        bool scaled;
    };
    const Case suite[] = {{1, 4, 1, true}, {3, 8, 2, false}, {5, 16, 4, true}, {8, 16, 8, false}, {4, 32, 3, true}};
    double worst_identity = 0.0, worst_prior = 0.0, worst_simplex = 0.0;
    for (const Case &c : suite)
    {
        const MfaModel m = mfa::test::random_model(c.K, c.N, c.L, rng, 3.0, c.scaled);
        ComplexVec prior = ComplexVec::Zero(c.N);
        for (const auto &comp : m.components())
            prior += comp.weight * comp.mean;
        for (int i = 0; i < 1000; ++i)
        {
            const ComplexVec y = 3.0 * standard_complex_normal(c.N, rng);
            worst_identity = std::max(worst_identity, (estimate(m, NoiseLevel{0.0}, y).value - y).cwiseAbs().maxCoeff());
            worst_prior = std::max(worst_prior, (estimate(m, NoiseLevel{1e12}, y).value - prior).norm() / prior.norm());
            const RealVec r = estimate(m, NoiseLevel{0.1}, y).responsibilities;
            worst_simplex = std::max({worst_simplex, std::abs(r.sum() - 1.0), std::max(0.0, -r.minCoeff())});
        }
    }
    return {worst_identity <= 1e-10 && worst_prior < 1e-5 && worst_simplex <= 1e-12,
            fmt("5 models x 1000 inputs; identity err %.2e, prior-mean rel err %.2e, simplex err %.2e", worst_identity,
                worst_prior, worst_simplex)};
}

// E||h - E[h|y]||^2 / N estimated by averaging tr Cov(h | y) over independent draws of y.
double mc_cme_mse(const MfaModel &m, NoiseLevel noise, Index n, Rng &rng)
{
    const Index K = m.num_components(), N = m.dim();
    std::vector<ComplexMat> gain(K);
    std::vector<double> post_trace(K);
    for (Index k = 0; k < K; ++k)
    {
        const ComplexMat C = m.component(k).cov.dense();
        ComplexMat Cy = C;
        Cy.diagonal().array() += noise.sigma2;
        gain[k] = C * Cy.llt().solve(ComplexMat::Identity(N, N));
        post_trace[k] = (C - gain[k] * C).trace().real();
    }
    const ChannelDataset h = sample(m, n, rng);
    const ComplexMat y = h.samples + std::sqrt(noise.sigma2) * mfa::test::random_matrix(N, n, rng);
    double total = 0.0;
    for (Index t = 0; t < n; ++t)
    {
        const RealVec r = noisy_responsibilities(m, noise, y.col(t));
        ComplexVec mean = ComplexVec::Zero(N);
        double second = 0.0;
        for (Index k = 0; k < K; ++k)
        {
            const ComplexVec mk = m.component(k).mean + gain[k] * (y.col(t) - m.component(k).mean);
            mean += r(k) * mk;
            second += r(k) * (post_trace[k] + mk.squaredNorm());
        }
        total += second - mean.squaredNorm();
    }
    return total / (static_cast<double>(n) * N);
}

Verdict cme_optimality()
{
    const auto start = Clock::now();
    Rng rng(404);
    const auto truth = std::make_shared<const MfaModel>(normalized(mfa::test::random_model(4, 16, 4, rng, 1.0)));
    BenchData data;
    data.train = sample(*truth, 20000, rng);
    data.eval = sample(*truth, 100000, rng);
    BenchSpec spec;
    spec.train_path = spec.eval_path = "planted";
    spec.seed = 4;
    spec.timing = false;
    spec.snr_grid_db = {0.0, 10.0, 20.0};
    auto add = [&](EstimatorKind kind, Index K, Index L, const char *id) {
        EstimatorSpec e;
        e.kind = kind;
        e.K = K;
        e.L = L;
        e.id = id;
        spec.estimators.push_back(e);
    };
    add(EstimatorKind::MfaFile, 1, 1, "true-model");
    spec.estimators.back().mfa_model = truth;
    add(EstimatorKind::Ls, 1, 1, "ls");
    add(EstimatorKind::SampleLmmse, 1, 1, "lmmse");
    add(EstimatorKind::GenieOmp, 1, 1, "genie-omp");
    add(EstimatorKind::GmmFull, 4, 1, "gmm-full");
    add(EstimatorKind::GmmToeplitz, 4, 1, "gmm-toep");
    add(EstimatorKind::GmmCirculant, 4, 1, "gmm-circ");
    add(EstimatorKind::Mfa, 4, 4, "mfa");
    const std::vector<ReportRow> rows = run_snr_sweep(spec, data);

    bool optimal = true, matches = true;
    std::string detail;
    for (double snr : spec.snr_grid_db)
    {
        double best_other = 1e300, own = 0.0;
        std::string runner_up;
        for (const auto &r : rows)
        {
            if (r.snr_db != snr)
                continue;
            if (r.estimator == "true-model")
                own = r.nmse;
            else if (r.nmse < best_other)
            {
                best_other = r.nmse;
                runner_up = r.estimator;
            }
        }
        Rng mc_rng(4040 + static_cast<int>(snr));
        const double oracle = mc_cme_mse(*truth, NoiseLevel::from_snr_db(snr), 100000, mc_rng);
        const double rel = std::abs(own - oracle) / oracle;
        optimal &= own < best_other;
        matches &= rel < 0.01;
        detail += fmt(" %g dB: cme %.5f, best other %s %.5f, MC oracle %.5f (rel %.2e);", snr, own, runner_up.c_str(),
                      best_other, oracle, rel);
    }
    const double t = seconds_since(start);
    return {optimal && matches && t < 300.0, fmt("%.1f s;", t) + detail};
}

ScenarioConfig clustered_scenario()
{
    return ScenarioConfig{}; // 4 x 16 URA, 16 clusters, seed 1
}

Verdict component_trend()
{
    const auto start = Clock::now();
    const std::vector<Index> K_grid{1, 2, 4, 8, 16, 32};
    std::vector<std::vector<double>> by_k(K_grid.size());
    for (std::uint64_t seed = 0; seed < 5; ++seed)
    {
        BenchSpec spec;
        spec.scenario = clustered_scenario();
        spec.train_count = 50000;
        spec.eval_count = 10000;
        spec.seed = seed;
        spec.fit.max_iter = 50;
        spec.timing = false;
        EstimatorSpec e;
        e.kind = EstimatorKind::Mfa;
        e.id = "mfa";
        spec.estimators = {e};
        const auto rows = run_grid_sweep(spec, K_grid, {8}, 15.0);
        for (std::size_t i = 0; i < K_grid.size(); ++i)
            by_k[i].push_back(rows[i].nmse);
    }
    bool monotone = true;
    std::string detail;
    double prev = 1e300;
    for (std::size_t i = 0; i < K_grid.size(); ++i)
    {
        const double m = median(by_k[i]);
        monotone &= m <= prev + 1e-3;
        prev = m;
        detail += fmt(" K=%lld %.5f", static_cast<long long>(K_grid[i]), m);
    }
    return {monotone, "median nMSE at L=8, 15 dB:" + detail + fmt(" (%.0f s)", seconds_since(start))};
}

Verdict overfitting_minimizer()
{
    const auto start = Clock::now();
    const std::vector<Index> grid{1, 2, 4, 8, 16, 32};
    int interior = 0;
    std::string detail;
    for (std::uint64_t seed = 0; seed < 5; ++seed)
    {
        BenchSpec spec;
        spec.scenario = clustered_scenario();
        spec.train_count = 2000;
        spec.eval_count = 5000;
        spec.seed = seed;
        spec.fit.max_iter = 50;
        spec.timing = false;
        EstimatorSpec e;
        e.kind = EstimatorKind::Mfa;
        e.id = "mfa";
        spec.estimators = {e};
        const auto rows = run_grid_sweep(spec, grid, grid, 15.0);
        const auto best = std::min_element(rows.begin(), rows.end(),
                                           [](const ReportRow &a, const ReportRow &b) { return a.nmse < b.nmse; });
        const bool inside = best->K < grid.back() && best->L < grid.back();
        interior += inside;
        detail += fmt(" seed %llu (%lld,%lld)", static_cast<unsigned long long>(seed), static_cast<long long>(best->K),
                      static_cast<long long>(best->L));
    }
    return {interior >= 4, fmt("%d/5 interior minimizers, T=2000:", interior) + detail +
                               fmt(" (%.0f s)", seconds_since(start))};
}

Verdict em_monotonicity()
{
    int fits = 0, failures = 0, toeplitz_decreases = 0, toeplitz_steps = 0;
    double toeplitz_worst = 0.0;
    const PsiMode modes[3] = {PsiMode::ScaledIdentity, PsiMode::SharedDiagonal, PsiMode::ComponentDiagonal};
    for (int i = 0; i < 50; ++i)
    {
        Rng rng(700 + i);
        const Index K = 2 + i % 3, N = 6 + i % 5, L = 1 + i % 3;
        const ChannelDataset ds = sample(mfa::test::random_model(K, N, L, rng, 1.5, i % 2 == 0), 400, rng);
        FitConfig cfg;
        cfg.seed = static_cast<std::uint64_t>(i);
        cfg.max_iter = 80;
        cfg.psi_mode = modes[i % 3];
        cfg.init = i % 4 == 3 ? InitMethod::Random : InitMethod::KMeansPca;
        FitTrace trace;
        if (i < 30)
            trace = fit_em(ds, K, L, cfg).trace;
        else
            trace = fit_gmm(ds, K, i < 40 ? CovStructure::Full : CovStructure::Circulant, cfg).trace;
        ++fits;
        failures += !trace.is_monotone(1e-8);

        const FitTrace toep = fit_gmm(ds, K, CovStructure::Toeplitz, cfg).trace;
        for (std::size_t j = 1; j < toep.log_likelihood.size(); ++j)
        {
            const double drop = toep.log_likelihood[j - 1] - toep.log_likelihood[j];
            ++toeplitz_steps;
            toeplitz_decreases += drop > 0.0;
            toeplitz_worst = std::max(toeplitz_worst, drop / std::abs(toep.log_likelihood[j - 1]));
        }
    }
    return {failures == 0, fmt("%d fits (30 MFA over 3 psi modes, 10 full GMM, 10 circulant GMM), %d non-monotone; "
                               "Toeplitz projected steps (exempt): %d of %d decrease, worst relative drop %.2e",
                               fits, failures, toeplitz_decreases, toeplitz_steps, toeplitz_worst)};
}

Verdict bank_equivalence_and_speed()
{
    Rng rng(808);
    const MfaModel m = normalized(mfa::test::random_model(64, 64, 16, rng, 1.0));
    const NoiseLevel noise = NoiseLevel::from_snr_db(10.0);
    const FilterBank bank = build_filter_bank(m, noise);
    const ChannelDataset h = sample(m, 1000, rng);
    const ComplexMat y = h.samples + std::sqrt(noise.sigma2) * mfa::test::random_matrix(64, 1000, rng);
    double worst = 0.0;
    for (Index t = 0; t < 1000; ++t)
    {
        const ComplexVec direct = estimate(m, noise, y.col(t)).value;
        const ComplexVec fast = estimate_with_bank(bank, y.col(t)).value;
        worst = std::max(worst, (fast - direct).norm() / std::max(1.0, direct.norm()));
    }

    std::vector<double> t_direct, t_bank;
    double sink = 0.0;
    for (Index t = 0; t < 200; ++t)
    {
        auto s = Clock::now();
        sink += estimate(m, noise, y.col(t)).value.norm();
        t_direct.push_back(seconds_since(s));
        s = Clock::now();
        sink += estimate_with_bank(bank, y.col(t)).value.norm();
        t_bank.push_back(seconds_since(s));
    }
    const double md = median(t_direct), mb = median(t_bank);
    return {worst <= 1e-12 && mb < md && std::isfinite(sink),
            fmt("max rel diff %.2e on 1000 inputs; median direct %.1f us, bank %.1f us (K=64, N=64, L=16)", worst,
                1e6 * md, 1e6 * mb)};
}

Verdict omp_correctness()
{
    Rng rng(909);
    const Dictionary dict = build_dft_dictionary(4, 16);
    // atoms on even (v, h) grid positions are mutually orthogonal
    std::vector<Index> even;
    for (Index gv = 0; gv < 8; gv += 2)
        for (Index gh = 0; gh < 32; gh += 2)
            even.push_back(gv * 32 + gh);
    const RealMat coherence = (dict.atoms.adjoint() * dict.atoms).cwiseAbs();
    // well separated: every other atom satisfies sum_j |<a_m, a_j>| < 1 over the
    // planted set, which guarantees recovery for any coefficients
    const auto separated = [&](const std::vector<Index> &support) {
        for (Index m = 0; m < dict.size(); ++m)
        {
            if (std::find(support.begin(), support.end(), m) != support.end())
                continue;
            double sum = 0.0;
            for (Index j : support)
                sum += coherence(m, j);
            if (sum >= 0.99)
                return false;
        }
        return true;
    };
    std::uniform_real_distribution<double> mag(0.2, 5.0), phase(0.0, 6.283185307179586);
    double worst_residual = 0.0;
    int support_misses = 0;
    for (int s = 1; s <= 5; ++s)
        for (int trial = 0; trial < 100; ++trial)
        {
            std::vector<Index> support;
            do
            {
                std::shuffle(even.begin(), even.end(), rng);
                support.assign(even.begin(), even.begin() + s);
            } while (!separated(support));
            ComplexVec y = ComplexVec::Zero(64);
            for (Index j : support)
                y += std::polar(mag(rng), phase(rng)) * dict.atoms.col(j);
            const std::set<Index> planted(support.begin(), support.end());
            const SparseCode code = omp(y, dict, s);
            worst_residual = std::max(worst_residual, (y - code.estimate).norm());
            support_misses += std::set<Index>(code.support.begin(), code.support.end()) != planted;
        }

    double worst_prefix = 0.0;
    for (int trial = 0; trial < 100; ++trial)
    {
        const ComplexVec h = standard_complex_normal(64, rng);
        const ComplexVec y = h + 0.3 * standard_complex_normal(64, rng);
        const int s_max = 12;
        double best = 1e300;
        ComplexVec best_est;
        for (int s = 1; s <= s_max; ++s)
        {
            const ComplexVec e = omp(y, dict, s).estimate;
            if ((e - h).squaredNorm() < best)
            {
                best = (e - h).squaredNorm();
                best_est = e;
            }
        }
        worst_prefix = std::max(worst_prefix, (genie_omp(y, dict, h, s_max) - best_est).norm());
    }
    return {worst_residual < 1e-8 && support_misses == 0 && worst_prefix < 1e-10,
            fmt("s=1..5 x 100: max residual %.2e, support misses %d; genie prefix vs re-runs max diff %.2e",
                worst_residual, support_misses, worst_prefix)};
}

Verdict cross_representation()
{
    Rng rng(1010);
    const MfaModel m = normalized(mfa::test::random_model(6, 16, 3, rng, 1.0, false));
    const GmmModel g = gmm_from_mfa(m);
    double worst = 0.0;
    for (double snr : {0.0, 10.0, 20.0})
    {
        const NoiseLevel noise = NoiseLevel::from_snr_db(snr);
        const ChannelDataset h = sample(m, 334, rng);
        for (Index t = 0; t < h.size(); ++t)
        {
            const ComplexVec y = h.samples.col(t) + std::sqrt(noise.sigma2) * standard_complex_normal(16, rng);
            worst = std::max(worst, (gmm_estimate(g, noise, y) - estimate(m, noise, y).value).cwiseAbs().maxCoeff());
        }
    }
    return {worst <= 1e-10, fmt("1002 inputs over 0/10/20 dB, max entry diff %.2e", worst)};
}

template <class Read>
int corruption_failures(const std::string &bytes, Read read)
{
    int bad = 0;
    auto offset = [&](const std::string &b) -> long long {
        std::istringstream in(b);
        try
        {
            read(in);
        }
        catch (const FormatError &e)
        {
            return static_cast<long long>(e.offset());
        }
        catch (...)
        {
            return -2;
        }
        return -1;
    };
    for (std::size_t len = 0; len < bytes.size(); ++len)
    {
        const std::string cut = bytes.substr(0, len);
        const long long a = offset(cut), b = offset(cut);
        bad += a < 0 || a != b;
    }
    std::string magic = bytes;
    magic[0] ^= 0x20;
    bad += offset(magic) != 0;
    std::string version = bytes;
    version[4] = 7;
    bad += offset(version) != 4;
    bad += offset(bytes + std::string(1, '\0')) < 0;
    return bad;
}

Verdict file_roundtrips()
{
    Rng rng(1111);
    int mismatches = 0, rejections = 0;

    const ChannelDataset ds = generate_channels(ScenarioConfig{}, 50, 3);
    std::stringstream d1;
    write_dataset(d1, ds);
    const ChannelDataset ds_back = doubles(ds);
    std::stringstream d2;
    write_dataset(d2, ds_back);
    mismatches += d1.str() != d2.str() || ds_back.samples != ds.samples || ds_back.normalization != ds.normalization;
    rejections += corruption_failures(d1.str(), [](std::istream &in) { return read_dataset(in); });

    for (PsiMode mode : {PsiMode::ScaledIdentity, PsiMode::ComponentDiagonal})
    {
        const MfaModel m = mfa::test::random_model(3, 8, 2, rng, 2.0, mode == PsiMode::ScaledIdentity);
        std::stringstream a;
        write_model(a, m);
        const MfaModel back = read_model(a);
        std::stringstream b;
        write_model(b, back);
        mismatches += a.str() != b.str();
        for (Index k = 0; k < 3; ++k)
            mismatches += back.component(k).mean != m.component(k).mean ||
                          back.component(k).cov.loading != m.component(k).cov.loading ||
                          back.component(k).cov.diag_term != m.component(k).cov.diag_term ||
                          back.component(k).weight != m.component(k).weight;
        rejections += corruption_failures(a.str(), [](std::istream &in) { return read_model(in); });
    }

    const MfaModel base = mfa::test::random_model(2, 6, 2, rng);
    const GmmModel gmms[3] = {
        gmm_from_mfa(base),
        fit_gmm(sample(base, 300, rng), 2, CovStructure::Toeplitz).model,
        fit_gmm(sample(base, 300, rng), 2, CovStructure::Circulant).model,
    };
    for (const GmmModel &g : gmms)
    {
        std::stringstream a;
        write_gmm(a, g);
        const GmmModel back = read_gmm(a);
        std::stringstream b;
        write_gmm(b, back);
        mismatches += a.str() != b.str();
        for (Index k = 0; k < g.num_components(); ++k)
            mismatches += back.mean(k) != g.mean(k) || back.covariance(k) != g.covariance(k);
        rejections += corruption_failures(a.str(), [](std::istream &in) { return read_gmm(in); });
    }
    return {mismatches == 0 && rejections == 0,
            fmt("dataset, 2 MFA, 3 GMM files: %d round-trip mismatches, %d corrupted inputs not rejected "
                "deterministically",
                mismatches, rejections)};
}

} // namespace

int main(int argc, char **argv)
{
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"Woodbury/logdet equivalence", woodbury_equivalence},
        {"parameter counts", table_values},
        {"estimator limits", estimator_limits},
        {"CME optimality on planted MFA", cme_optimality},
        {"nMSE trend in K", component_trend},
        {"overfitting minimizer inside the grid", overfitting_minimizer},
        {"EM monotonicity", em_monotonicity},
        {"filter-bank equivalence and speed", bank_equivalence_and_speed},
        {"OMP correctness", omp_correctness},
        {"MFA/GMM cross-representation", cross_representation},
        {"file round-trips and corruption", file_roundtrips},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i)
        selected.insert(std::stoi(argv[i]));

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i)
    {
        const int id = static_cast<int>(i) + 1;
        if (!selected.empty() && !selected.count(id))
            continue;
        Verdict v;
        try
        {
            v = criteria[i].second();
        }
        catch (const std::exception &e)
        {
            v = {false, std::string("exception: ") + e.what()};
        }
        failed += !v.pass;
        std::printf("%s criterion %2d: %s -- %s\n", v.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                    v.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
