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

#include "mfa/model.hpp"

#include "kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace mfa
{

namespace
{

const double kLogPi = std::log(std::numbers::pi);

LowRankCovariance pca_covariance(const ComplexMat &scatter, Index L, double psi_floor)
{
    const Index N = scatter.rows();
    Eigen::SelfAdjointEigenSolver<ComplexMat> eig(0.5 * (scatter + scatter.adjoint()));
    // ascending order: the top-L eigenpairs are the trailing columns
    const RealVec values = eig.eigenvalues().cwiseMax(0.0);
    double residual = 0.0;
    if (N > L)
        residual = values.head(N - L).mean();
    else
        residual = 1e-3 * values.mean();
    residual = std::max(residual, psi_floor);

    LowRankCovariance cov;
    cov.diag_term = RealVec::Constant(N, residual);
    cov.loading.resize(N, L);
    for (Index j = 0; j < L; ++j)
    {
        const Index src = N - 1 - j;
        const double scale = std::sqrt(std::max(values(src) - residual, 0.0));
        cov.loading.col(j) = eig.eigenvectors().col(src) * scale;
    }
    return cov;
}

struct Initial
{
    std::vector<MfaComponent> components;
    LowRankCovariance fallback; // global PCA covariance used when re-seeding
};

Initial initialize(const ChannelDataset &ds, Index K, Index L, const FitConfig &config, double psi_floor)
{
    const Index N = ds.dim();
    const Index T = ds.size();
    Rng rng(config.seed);

    const ComplexVec global_mean = ds.samples.rowwise().mean();
    const ComplexMat centred = ds.samples.colwise() - global_mean;
    const ComplexMat global_scatter = centred * centred.adjoint() / static_cast<double>(T);

    Initial init;
    init.fallback = pca_covariance(global_scatter, L, psi_floor);
    init.components.resize(static_cast<std::size_t>(K));

    if (config.init == InitMethod::Random)
    {
        std::vector<Index> order(static_cast<std::size_t>(T));
        std::iota(order.begin(), order.end(), Index{0});
        std::shuffle(order.begin(), order.end(), rng);
        const double energy = ds.samples.cwiseAbs2().mean();
        for (Index k = 0; k < K; ++k)
        {
            auto &c = init.components[k];
            c.weight = 1.0 / static_cast<double>(K);
            c.mean = ds.samples.col(order[k]);
            c.cov.loading = ComplexMat(N, L);
            for (Index j = 0; j < L; ++j)
                c.cov.loading.col(j) = standard_complex_normal(N, rng) * std::sqrt(0.5 * energy / static_cast<double>(L));
            c.cov.diag_term = RealVec::Constant(N, std::max(0.5 * energy, psi_floor));
        }
    }
    else
    {
        const detail::Clustering clusters = detail::kmeans(ds.samples, K, config.kmeans_iter, rng);
        for (Index k = 0; k < K; ++k)
        {
            auto &c = init.components[k];
            c.weight = 1.0 / static_cast<double>(K);
            c.mean = clusters.centers.col(k);
            Index count = 0;
            const ComplexMat scatter =
                detail::member_covariance(ds.samples, clusters.labels, static_cast<int>(k), c.mean, count);
            c.cov = count >= 2 ? pca_covariance(scatter, L, psi_floor) : init.fallback;
        }
    }

    if (config.psi_mode == PsiMode::SharedDiagonal)
    {
        RealVec shared = RealVec::Zero(N);
        for (const auto &c : init.components)
            shared += c.cov.diag_term;
        shared /= static_cast<double>(K);
        for (auto &c : init.components)
            c.cov.diag_term = shared;
    }
    return init;
}

void renormalize_weights(std::vector<MfaComponent> &components)
{
    double total = 0.0;
    for (const auto &c : components)
        total += c.weight;
    for (auto &c : components)
        c.weight /= total;
}

// Applies the shared-diagonal restriction after a re-seed replaced one component's Psi.
void reseed_component(std::vector<MfaComponent> &components, Index k, const ComplexVec &at,
                      const LowRankCovariance &fallback, PsiMode mode)
{
    auto &c = components[static_cast<std::size_t>(k)];
    c.mean = at;
    c.cov.loading = fallback.loading;
    if (mode != PsiMode::SharedDiagonal)
        c.cov.diag_term = fallback.diag_term;
    c.weight = 1.0 / static_cast<double>(components.size());
    renormalize_weights(components);
}

} // namespace

MfaModel::MfaModel(std::vector<MfaComponent> components) : components_(std::move(components))
{
    if (components_.empty())
        throw std::invalid_argument("MfaModel: need at least one component");
    dim_ = components_.front().mean.size();
    latent_dim_ = components_.front().cov.rank();
    if (dim_ == 0)
        throw std::invalid_argument("MfaModel: zero dimension");
    double total = 0.0;
    for (const auto &c : components_)
    {
        if (c.mean.size() != dim_ || c.cov.dim() != dim_ || c.cov.loading.rows() != dim_)
            throw std::invalid_argument("MfaModel: components disagree on dimension");
        if (c.cov.rank() != latent_dim_)
            throw std::invalid_argument("MfaModel: components disagree on latent dimension");
        if (!(c.weight > 0.0) || !std::isfinite(c.weight))
            throw std::invalid_argument("MfaModel: weights must be positive");
        if (!(c.cov.diag_term.array() > 0.0).all())
            throw std::invalid_argument("MfaModel: diagonal term must be strictly positive");
        if (!c.mean.allFinite() || !c.cov.loading.allFinite() || !c.cov.diag_term.allFinite())
            throw std::invalid_argument("MfaModel: non-finite parameters");
        total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("MfaModel: weights must sum to one");
    if (std::abs(total - 1.0) > 1e-13)
        for (auto &c : components_)
            c.weight /= total;
}

RealVec MfaModel::weights() const
{
    RealVec w(num_components());
    for (Index k = 0; k < num_components(); ++k)
        w(k) = component(k).weight;
    return w;
}

void FitConfig::validate() const
{
    if (max_iter < 1)
        throw std::invalid_argument("FitConfig: max_iter must be at least 1");
    if (!(rel_tol > 0.0))
        throw std::invalid_argument("FitConfig: rel_tol must be positive");
    if (!(weight_floor > 0.0) || weight_floor >= 1.0)
        throw std::invalid_argument("FitConfig: weight_floor must lie in (0, 1)");
}

bool FitTrace::is_monotone(double slack) const
{
    for (std::size_t i = 1; i < log_likelihood.size(); ++i)
    {
        const double prev = log_likelihood[i - 1];
        if (log_likelihood[i] < prev - slack * std::max(std::abs(prev), 1.0))
            return false;
    }
    return true;
}

double psi_floor_for(const ChannelDataset &dataset)
{
    const double per_entry = dataset.samples.cwiseAbs2().mean();
    return 1e-8 * (per_entry > 0.0 ? per_entry : 1.0);
}

RealVec sample_log_likelihood(const MfaModel &model, const ComplexMat &samples, RealMat *joint)
{
    if (samples.rows() != model.dim())
        throw std::invalid_argument("log-likelihood: dimension mismatch");
    const Index T = samples.cols();
    const Index K = model.num_components();
    const double norm = static_cast<double>(model.dim()) * kLogPi;

    RealMat lj(T, K);
    for (Index k = 0; k < K; ++k)
    {
        const auto &c = model.component(k);
        const LowRankFactorization fact(c.cov, NoiseLevel{0.0}, static_cast<int>(k));
        const RealVec maha = fact.quadratic_form(ComplexMat(samples.colwise() - c.mean));
        lj.col(k) = (std::log(c.weight) - norm - fact.logdet()) - maha.array();
    }
    RealVec out(T);
    for (Index t = 0; t < T; ++t)
    {
        const RealVec row = lj.row(t).transpose();
        out(t) = log_sum_exp(std::span<const double>(row.data(), static_cast<std::size_t>(K)));
    }
    if (joint)
        *joint = std::move(lj);
    return out;
}

double log_likelihood(const MfaModel &model, const ChannelDataset &dataset)
{
    return sample_log_likelihood(model, dataset.samples).mean();
}

EStepResult e_step(const MfaModel &model, const ChannelDataset &dataset)
{
    if (dataset.dim() != model.dim())
        throw std::invalid_argument("e_step: dimension mismatch");
    const Index K = model.num_components();
    const Index T = dataset.size();
    const double norm = static_cast<double>(model.dim()) * kLogPi;

    EStepResult out;
    out.latent.means.resize(static_cast<std::size_t>(K));
    out.latent.covariances.resize(static_cast<std::size_t>(K));
    RealMat joint(T, K);
    RealVec maha;
    for (Index k = 0; k < K; ++k)
    {
        const auto &c = model.component(k);
        const LowRankFactorization fact(c.cov, NoiseLevel{0.0}, static_cast<int>(k));
        fact.quadratic_form_and_latent(dataset.samples.colwise() - c.mean, maha, out.latent.means[k]);
        out.latent.covariances[k] = fact.latent_covariance();
        joint.col(k) = (std::log(c.weight) - norm - fact.logdet()) - maha.array();
    }

    out.responsibilities.resize(T, K);
    out.sample_log_likelihood.resize(T);
    std::vector<double> row(static_cast<std::size_t>(K));
    for (Index t = 0; t < T; ++t)
    {
        for (Index k = 0; k < K; ++k)
            row[k] = joint(t, k);
        out.sample_log_likelihood(t) = normalize_log_weights(row);
        for (Index k = 0; k < K; ++k)
            out.responsibilities(t, k) = row[k];
    }
    out.average_log_likelihood = out.sample_log_likelihood.mean();
    return out;
}

std::vector<MfaComponent> m_step(const ChannelDataset &dataset, const RealMat &responsibilities,
                                 const LatentStats &latent, const MStepOptions &options)
{
    const ComplexMat &H = dataset.samples;
    const Index N = dataset.dim();
    const Index T = dataset.size();
    const Index K = responsibilities.cols();
    if (responsibilities.rows() != T || static_cast<Index>(latent.means.size()) != K ||
        static_cast<Index>(latent.covariances.size()) != K)
        throw std::invalid_argument("m_step: E-step outputs do not match the dataset");
    const Index L = latent.covariances.front().rows();
    const double psi_floor = options.psi_floor.value_or(psi_floor_for(dataset));

    const RealMat abs2 = H.cwiseAbs2();
    std::vector<MfaComponent> out(static_cast<std::size_t>(K));
    RealMat residual(N, K); // expected residual energy per entry, summed over samples
    RealVec mass(K);

    for (Index k = 0; k < K; ++k)
    {
        const RealVec r = responsibilities.col(k);
        const double R = r.sum();
        mass(k) = R;
        auto &c = out[k];

        if (!(R > 0.0))
        {
            c.mean = H.rowwise().mean();
            c.cov = LowRankCovariance::scaled_identity(N, L, std::max(abs2.mean(), psi_floor));
            residual.col(k).setZero();
            continue;
        }

        const ComplexMat &M = latent.means[k];
        const ComplexMat &A = latent.covariances[k];
        const ComplexMat Mr = M * r.asDiagonal();

        // Gram of the augmented latent [z; 1]
        ComplexMat gram(L + 1, L + 1);
        gram.topLeftCorner(L, L) = Mr * M.adjoint() + R * A;
        gram.topRightCorner(L, 1) = Mr.rowwise().sum();
        gram.bottomLeftCorner(1, L) = gram.topRightCorner(L, 1).adjoint();
        gram(L, L) = R;

        ComplexMat cross(N, L + 1);
        cross.leftCols(L) = H * Mr.adjoint();
        cross.col(L) = H * r.cast<Complex>();

        ComplexMat ridged = gram;
        const double eps = options.ridge * gram.diagonal().real().sum() / static_cast<double>(L + 1);
        ridged.diagonal().array() += eps;
        const Eigen::LLT<ComplexMat> llt(ridged);
        ComplexMat augmented; // [W mu], N x (L+1)
        if (llt.info() == Eigen::Success)
            augmented = llt.solve(cross.adjoint()).adjoint();
        else
            augmented = ridged.ldlt().solve(cross.adjoint()).adjoint();

        c.cov.loading = augmented.leftCols(L);
        c.mean = augmented.col(L);

        const RealVec hh = abs2 * r;
        const RealVec lin = (augmented.array() * cross.array().conjugate()).real().rowwise().sum();
        const RealVec quad = ((augmented * gram).array() * augmented.array().conjugate()).real().rowwise().sum();
        residual.col(k) = (hh - 2.0 * lin + quad).cwiseMax(0.0);
    }

    for (Index k = 0; k < K; ++k)
    {
        auto &c = out[k];
        if (!(mass(k) > 0.0))
            continue;
        switch (options.psi_mode)
        {
        case PsiMode::ScaledIdentity:
            c.cov.diag_term =
                RealVec::Constant(N, std::max(residual.col(k).sum() / (static_cast<double>(N) * mass(k)), psi_floor));
            break;
        case PsiMode::ComponentDiagonal:
            c.cov.diag_term = (residual.col(k) / mass(k)).cwiseMax(psi_floor);
            break;
        case PsiMode::SharedDiagonal:
            break;
        }
    }
    if (options.psi_mode == PsiMode::SharedDiagonal)
    {
        const RealVec shared = (residual.rowwise().sum() / mass.sum()).cwiseMax(psi_floor);
        for (auto &c : out)
            c.cov.diag_term = shared;
    }

    for (Index k = 0; k < K; ++k)
        out[k].weight = std::max(mass(k) / static_cast<double>(T), options.weight_floor);
    renormalize_weights(out);
    return out;
}

FitResult fit_em(const ChannelDataset &dataset, Index K, Index L, const FitConfig &config)
{
    config.validate();
    const Index N = dataset.dim();
    const Index T = dataset.size();
    if (K < 1)
        throw std::invalid_argument("fit_em: K must be at least 1");
    if (T < K)
        throw std::invalid_argument("fit_em: need at least K samples");
    if (L < 1 || L > N)
        throw std::invalid_argument("fit_em: latent dimension must satisfy 1 <= L <= N");

    const double psi_floor = psi_floor_for(dataset);
    Initial init = initialize(dataset, K, L, config, psi_floor);
    std::vector<MfaComponent> components = std::move(init.components);

    FitTrace trace;
    MStepOptions opts;
    opts.psi_mode = config.psi_mode;
    opts.psi_floor = psi_floor;
    opts.weight_floor = config.weight_floor;

    // Worst-fit sample under the most recent model, for re-seeding.
    Index worst = 0;
    RealVec last_sample_ll;
    auto worst_sample = [&]() -> ComplexVec {
        if (last_sample_ll.size() == T)
            last_sample_ll.minCoeff(&worst);
        return dataset.samples.col(worst);
    };

    auto evaluate = [&](int iteration) {
        // A component whose capacitance degenerates is treated like a collapse.
        for (Index attempt = 0;; ++attempt)
        {
            try
            {
                MfaModel model(components);
                EStepResult est = e_step(model, dataset);
                return std::make_pair(std::move(model), std::move(est));
            }
            catch (const ConditioningError &err)
            {
                if (err.component() < 0 || attempt >= K)
                    throw;
                reseed_component(components, err.component(), worst_sample(), init.fallback, config.psi_mode);
                trace.reseeds.push_back({iteration, err.component()});
            }
        }
    };

    auto [model, est] = evaluate(0);
    last_sample_ll = est.sample_log_likelihood;
    trace.log_likelihood.push_back(est.average_log_likelihood);

    for (int it = 1; it <= config.max_iter; ++it)
    {
        components = m_step(dataset, est.responsibilities, est.latent, opts);
        const RealVec raw_weights = est.responsibilities.colwise().mean().transpose();
        for (Index k = 0; k < K; ++k)
        {
            if (raw_weights(k) < config.weight_floor)
            {
                reseed_component(components, k, worst_sample(), init.fallback, config.psi_mode);
                trace.reseeds.push_back({it, static_cast<int>(k)});
            }
        }

        std::tie(model, est) = evaluate(it);
        last_sample_ll = est.sample_log_likelihood;
        const double prev = trace.log_likelihood.back();
        const double cur = est.average_log_likelihood;
        trace.log_likelihood.push_back(cur);
        trace.iterations = it;
        if (std::abs(cur - prev) < config.rel_tol * std::max(std::abs(prev), 1e-300))
        {
            trace.converged = true;
            break;
        }
    }
    return FitResult{std::move(model), std::move(trace)};
}

ChannelDataset sample(const MfaModel &model, Index n, Rng &rng, std::vector<int> &labels)
{
    if (n < 1)
        throw std::invalid_argument("sample: n must be at least 1");
    const RealVec w = model.weights();
    std::discrete_distribution<int> pick(w.data(), w.data() + w.size());
    ChannelDataset ds;
    ds.samples.resize(model.dim(), n);
    labels.resize(static_cast<std::size_t>(n));
    for (Index t = 0; t < n; ++t)
    {
        const int k = model.num_components() == 1 ? 0 : pick(rng);
        labels[t] = k;
        const auto &c = model.component(k);
        ds.samples.col(t) = sample_component(c.mean, c.cov, rng);
    }
    return ds;
}

ChannelDataset sample(const MfaModel &model, Index n, Rng &rng)
{
    std::vector<int> labels;
    return sample(model, n, rng, labels);
}

std::int64_t parameter_count(ParamKind kind, std::int64_t K, std::int64_t N, std::int64_t L)
{
    if (K < 1 || N < 1)
        throw std::invalid_argument("parameter_count: K and N must be positive");
    switch (kind)
    {
    case ParamKind::Mfa:
        if (L < 1)
            throw std::invalid_argument("parameter_count: L must be positive for mfa");
        return K * (L * N + N + 2);
    case ParamKind::GmmFull:
        return K * ((N * N + 1) / 2 + 2 * N + 1);
    case ParamKind::GmmToeplitz:
        return K * (5 * N + 1);
    case ParamKind::GmmCirculant:
        return K * (2 * N + 1);
    }
    throw std::invalid_argument("parameter_count: unknown kind");
}

} // namespace mfa
