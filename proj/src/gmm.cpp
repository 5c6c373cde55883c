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

#include "mfa/gmm.hpp"

#include "binary_io.hpp"
#include "kmeans.hpp"
#include "mfa/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>

namespace mfa
{

namespace
{

const double kLogPi = std::log(std::numbers::pi);

ComplexMat unitary_dft_rows(Index rows, Index cols, Index points)
{
    ComplexMat out(rows, cols);
    const double scale = 1.0 / std::sqrt(static_cast<double>(points));
    for (Index m = 0; m < rows; ++m)
        for (Index n = 0; n < cols; ++n)
            out(m, n) = std::polar(scale, -2.0 * std::numbers::pi * static_cast<double>((m * n) % points) /
                                              static_cast<double>(points));
    return out;
}

// Transform and the pseudo-inverse of G_ij = |q_i^H q_j|^2 for the Toeplitz projection.
struct ToeplitzCache
{
    ComplexMat transform;
    RealMat gram_pinv;
};

const ToeplitzCache &toeplitz_cache(Index N)
{
    static std::mutex mutex;
    static std::map<Index, ToeplitzCache> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(N);
    if (it != cache.end())
        return it->second;

    ToeplitzCache entry;
    entry.transform = toeplitz_transform(N);
    const RealMat gram = (entry.transform * entry.transform.adjoint()).cwiseAbs2();
    // G has a one-dimensional null space (the alternating sequence); use the pseudo-inverse.
    Eigen::SelfAdjointEigenSolver<RealMat> eig(gram);
    const RealVec values = eig.eigenvalues();
    const double cutoff = 1e-10 * values.cwiseAbs().maxCoeff();
    RealVec inv = RealVec::Zero(values.size());
    for (Index i = 0; i < values.size(); ++i)
        if (values(i) > cutoff)
            inv(i) = 1.0 / values(i);
    entry.gram_pinv = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
    return cache.emplace(N, std::move(entry)).first->second;
}

const ComplexMat &circulant_cache(Index N)
{
    static std::mutex mutex;
    static std::map<Index, ComplexMat> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(N);
    if (it == cache.end())
        it = cache.emplace(N, circulant_transform(N)).first;
    return it->second;
}

ComplexMat hermitian(const ComplexMat &m)
{
    return 0.5 * (m + m.adjoint());
}

ComplexMat floor_eigenvalues(const ComplexMat &scatter, double floor)
{
    Eigen::SelfAdjointEigenSolver<ComplexMat> eig(hermitian(scatter));
    const RealVec values = eig.eigenvalues().cwiseMax(floor);
    return hermitian(eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().adjoint());
}

double scatter_floor(const ComplexMat &scatter, double global_floor)
{
    const double per_entry = scatter.diagonal().real().sum() / static_cast<double>(scatter.rows());
    return std::max(1e-8 * per_entry, global_floor);
}

// Per-component covariance parameters during fitting.
struct Params
{
    ComplexMat full;  // Full
    RealVec spectrum; // Toeplitz / Circulant
};

Params project(CovStructure structure, const ComplexMat &scatter, double floor)
{
    Params p;
    switch (structure)
    {
    case CovStructure::Full:
        p.full = floor_eigenvalues(scatter, floor);
        break;
    case CovStructure::Toeplitz:
        p.spectrum = toeplitz_projection(scatter, floor);
        break;
    case CovStructure::Circulant:
        p.spectrum = circulant_projection(scatter, floor);
        break;
    }
    return p;
}

// log N(x_t; mean, C) for every column of x, with C given by structure/params.
RealVec component_log_density(CovStructure structure, const Params &params, const ComplexMat &x, int component)
{
    const Index N = x.rows();
    RealVec out;
    if (structure == CovStructure::Circulant)
    {
        const ComplexMat z = circulant_cache(N) * x;
        out = -(params.spectrum.cwiseInverse().transpose() * z.cwiseAbs2()).transpose();
        out.array() -= params.spectrum.array().log().sum();
    }
    else
    {
        const ComplexMat c =
            structure == CovStructure::Full ? params.full : structured_covariance(structure, params.spectrum);
        const Eigen::LLT<ComplexMat> llt(c);
        if (llt.info() != Eigen::Success)
            throw ConditioningError("GMM covariance is not positive definite", component,
                                    std::numeric_limits<double>::infinity());
        ComplexMat w = x;
        llt.matrixL().solveInPlace(w);
        out = -w.colwise().squaredNorm().transpose();
        out.array() -= 2.0 * llt.matrixLLT().diagonal().real().array().log().sum();
    }
    out.array() -= static_cast<double>(N) * kLogPi;
    return out;
}

GmmModel assemble(CovStructure structure, const RealVec &weights, const std::vector<ComplexVec> &means,
                  const std::vector<Params> &params)
{
    if (structure == CovStructure::Full)
    {
        std::vector<ComplexMat> covs;
        for (const auto &p : params)
            covs.push_back(p.full);
        return GmmModel::full(weights, means, std::move(covs));
    }
    std::vector<RealVec> spectra;
    for (const auto &p : params)
        spectra.push_back(p.spectrum);
    return GmmModel::structured(structure, weights, means, std::move(spectra));
}

Index spectrum_length(CovStructure structure, Index N)
{
    return structure == CovStructure::Toeplitz ? 2 * N : N;
}

} // namespace

ComplexMat circulant_transform(Index N)
{
    return unitary_dft_rows(N, N, N);
}

ComplexMat toeplitz_transform(Index N)
{
    return unitary_dft_rows(2 * N, N, 2 * N);
}

ComplexMat structured_covariance(CovStructure structure, const RealVec &spectrum)
{
    switch (structure)
    {
    case CovStructure::Circulant: {
        const ComplexMat &f = circulant_cache(spectrum.size());
        return hermitian(f.adjoint() * spectrum.asDiagonal() * f);
    }
    case CovStructure::Toeplitz: {
        if (spectrum.size() % 2 != 0)
            throw std::invalid_argument("structured_covariance: Toeplitz spectrum must have length 2N");
        const ComplexMat &q = toeplitz_cache(spectrum.size() / 2).transform;
        return hermitian(q.adjoint() * spectrum.asDiagonal() * q);
    }
    case CovStructure::Full:
        break;
    }
    throw std::invalid_argument("structured_covariance: full covariances have no spectrum");
}

RealVec circulant_projection(const ComplexMat &scatter, double floor)
{
    const ComplexMat &f = circulant_cache(scatter.rows());
    return (f * scatter * f.adjoint()).diagonal().real().cwiseMax(floor);
}

RealVec toeplitz_projection(const ComplexMat &scatter, double floor)
{
    const ToeplitzCache &cache = toeplitz_cache(scatter.rows());
    const RealVec b = (cache.transform * scatter * cache.transform.adjoint()).diagonal().real();
    return (cache.gram_pinv * b).cwiseMax(floor);
}

GmmModel GmmModel::full(RealVec weights, std::vector<ComplexVec> means, std::vector<ComplexMat> covariances)
{
    GmmModel m;
    m.structure_ = CovStructure::Full;
    m.weights_ = std::move(weights);
    m.means_ = std::move(means);
    m.full_ = std::move(covariances);
    m.validate();
    return m;
}

GmmModel GmmModel::structured(CovStructure structure, RealVec weights, std::vector<ComplexVec> means,
                              std::vector<RealVec> spectra)
{
    if (structure == CovStructure::Full)
        throw std::invalid_argument("GmmModel::structured: use GmmModel::full for dense covariances");
    GmmModel m;
    m.structure_ = structure;
    m.weights_ = std::move(weights);
    m.means_ = std::move(means);
    m.spectra_ = std::move(spectra);
    m.validate();
    return m;
}

void GmmModel::validate() const
{
    const auto K = means_.size();
    if (K == 0 || static_cast<std::size_t>(weights_.size()) != K)
        throw std::invalid_argument("GmmModel: weights and means disagree");
    if (!(weights_.array() > 0.0).all() || std::abs(weights_.sum() - 1.0) > 1e-9)
        throw std::invalid_argument("GmmModel: weights must be positive and sum to one");
    const Index N = means_.front().size();
    for (const auto &m : means_)
        if (m.size() != N || !m.allFinite())
            throw std::invalid_argument("GmmModel: inconsistent means");
    if (structure_ == CovStructure::Full)
    {
        if (full_.size() != K)
            throw std::invalid_argument("GmmModel: one covariance per component required");
        for (const auto &c : full_)
            if (c.rows() != N || c.cols() != N || !c.allFinite())
                throw std::invalid_argument("GmmModel: covariance shape mismatch");
    }
    else
    {
        if (spectra_.size() != K)
            throw std::invalid_argument("GmmModel: one spectrum per component required");
        for (const auto &s : spectra_)
            if (s.size() != spectrum_length(structure_, N) || !(s.array() >= 0.0).all() || !s.allFinite())
                throw std::invalid_argument("GmmModel: spectra must be nonnegative with the structure's length");
    }
}

ComplexMat GmmModel::covariance(Index k) const
{
    if (structure_ == CovStructure::Full)
        return full_[static_cast<std::size_t>(k)];
    return structured_covariance(structure_, spectra_[static_cast<std::size_t>(k)]);
}

const RealVec &GmmModel::spectrum(Index k) const
{
    if (structure_ == CovStructure::Full)
        throw std::logic_error("GmmModel::spectrum: full-covariance model");
    return spectra_[static_cast<std::size_t>(k)];
}

GmmModel gmm_from_mfa(const MfaModel &model)
{
    std::vector<ComplexVec> means;
    std::vector<ComplexMat> covs;
    for (const auto &c : model.components())
    {
        means.push_back(c.mean);
        covs.push_back(c.cov.dense());
    }
    return GmmModel::full(model.weights(), std::move(means), std::move(covs));
}

GmmFitResult fit_gmm(const ChannelDataset &dataset, Index K, CovStructure structure, const FitConfig &config)
{
    config.validate();
    const ComplexMat &H = dataset.samples;
    const Index T = dataset.size();
    if (K < 1)
        throw std::invalid_argument("fit_gmm: K must be at least 1");
    if (T < K)
        throw std::invalid_argument("fit_gmm: need at least K samples");

    const double global_floor = psi_floor_for(dataset);
    Rng rng(config.seed);

    const ComplexVec global_mean = H.rowwise().mean();
    const ComplexMat global_centred = H.colwise() - global_mean;
    const ComplexMat global_scatter = global_centred * global_centred.adjoint() / static_cast<double>(T);
    const Params fallback = project(structure, global_scatter, scatter_floor(global_scatter, global_floor));

    std::vector<ComplexVec> means(static_cast<std::size_t>(K));
    std::vector<Params> params(static_cast<std::size_t>(K));
    RealVec weights = RealVec::Constant(K, 1.0 / static_cast<double>(K));

    if (config.init == InitMethod::Random)
    {
        std::vector<Index> order(static_cast<std::size_t>(T));
        std::iota(order.begin(), order.end(), Index{0});
        std::shuffle(order.begin(), order.end(), rng);
        for (Index k = 0; k < K; ++k)
        {
            means[k] = H.col(order[k]);
            params[k] = fallback;
        }
    }
    else
    {
        const detail::Clustering clusters = detail::kmeans(H, K, config.kmeans_iter, rng);
        for (Index k = 0; k < K; ++k)
        {
            means[k] = clusters.centers.col(k);
            Index count = 0;
            const ComplexMat scatter =
                detail::member_covariance(H, clusters.labels, static_cast<int>(k), means[k], count);
            params[k] = count >= 2 ? project(structure, scatter, scatter_floor(scatter, global_floor)) : fallback;
        }
    }

    FitTrace trace;
    RealVec sample_ll(T);
    RealMat resp(T, K);
    auto reseed = [&](Index k, int iteration) {
        Index worst = 0;
        sample_ll.minCoeff(&worst);
        means[k] = H.col(worst);
        params[k] = fallback;
        weights(k) = 1.0 / static_cast<double>(K);
        weights /= weights.sum();
        trace.reseeds.push_back({iteration, static_cast<int>(k)});
    };

    auto e_step = [&](int iteration) {
        sample_ll.setConstant(0.0);
        for (Index attempt = 0;; ++attempt)
        {
            try
            {
                for (Index k = 0; k < K; ++k)
                    resp.col(k) = std::log(weights(k)) +
                                  component_log_density(structure, params[k], H.colwise() - means[k],
                                                        static_cast<int>(k)).array();
                break;
            }
            catch (const ConditioningError &err)
            {
                if (err.component() < 0 || attempt >= K)
                    throw;
                reseed(err.component(), iteration);
            }
        }
        std::vector<double> row(static_cast<std::size_t>(K));
        for (Index t = 0; t < T; ++t)
        {
            for (Index k = 0; k < K; ++k)
                row[k] = resp(t, k);
            sample_ll(t) = normalize_log_weights(row);
            for (Index k = 0; k < K; ++k)
                resp(t, k) = row[k];
        }
        return sample_ll.mean();
    };

    trace.log_likelihood.push_back(e_step(0));
    for (int it = 1; it <= config.max_iter; ++it)
    {
        for (Index k = 0; k < K; ++k)
        {
            const RealVec r = resp.col(k);
            const double R = r.sum();
            if (R / static_cast<double>(T) < config.weight_floor)
            {
                reseed(k, it);
                continue;
            }
            means[k] = H * r.cast<Complex>() / R;
            const ComplexMat centred = H.colwise() - means[k];
            const ComplexMat scatter = hermitian(centred * r.asDiagonal() * centred.adjoint() / R);
            params[k] = project(structure, scatter, scatter_floor(scatter, global_floor));
            weights(k) = std::max(R / static_cast<double>(T), config.weight_floor);
        }
        weights /= weights.sum();

        const double prev = trace.log_likelihood.back();
        const double cur = e_step(it);
        trace.log_likelihood.push_back(cur);
        trace.iterations = it;
        if (std::abs(cur - prev) < config.rel_tol * std::max(std::abs(prev), 1e-300))
        {
            trace.converged = true;
            break;
        }
    }
    return GmmFitResult{assemble(structure, weights, means, params), std::move(trace)};
}

double gmm_log_likelihood(const GmmModel &model, const ChannelDataset &dataset)
{
    if (dataset.dim() != model.dim())
        throw std::invalid_argument("gmm_log_likelihood: dimension mismatch");
    const Index K = model.num_components();
    const Index T = dataset.size();
    RealMat joint(T, K);
    for (Index k = 0; k < K; ++k)
    {
        Params p;
        if (model.structure() == CovStructure::Full)
            p.full = model.covariance(k);
        else
            p.spectrum = model.spectrum(k);
        joint.col(k) = std::log(model.weights()(k)) +
                       component_log_density(model.structure(), p, dataset.samples.colwise() - model.mean(k),
                                             static_cast<int>(k)).array();
    }
    double total = 0.0;
    std::vector<double> row(static_cast<std::size_t>(K));
    for (Index t = 0; t < T; ++t)
    {
        for (Index k = 0; k < K; ++k)
            row[k] = joint(t, k);
        total += log_sum_exp(row);
    }
    return total / static_cast<double>(T);
}

GmmFilterBank::GmmFilterBank(const GmmModel &model, NoiseLevel noise)
    : structure_(model.structure()), dim_(model.dim()), noise_(noise)
{
    if (!(noise.sigma2 >= 0.0))
        throw std::invalid_argument("GmmFilterBank: noise variance must be nonnegative");
    if (structure_ == CovStructure::Circulant)
        transform_ = circulant_cache(dim_);
    for (Index k = 0; k < model.num_components(); ++k)
    {
        Entry e;
        e.log_weight = std::log(model.weights()(k));
        e.mean = model.mean(k);
        if (structure_ == CovStructure::Circulant)
        {
            const RealVec shifted = model.spectrum(k).array() + noise.sigma2;
            if (!(shifted.array() > 0.0).all())
                throw ConditioningError("circulant covariance plus noise is singular", static_cast<int>(k),
                                        std::numeric_limits<double>::infinity());
            e.inv_spectrum = shifted.cwiseInverse();
            e.shrink = model.spectrum(k).cwiseProduct(e.inv_spectrum);
            e.logdet = shifted.array().log().sum();
        }
        else
        {
            ComplexMat cy = model.covariance(k);
            cy.diagonal().array() += noise.sigma2;
            const Eigen::LLT<ComplexMat> llt(cy);
            if (llt.info() != Eigen::Success)
                throw ConditioningError("GMM covariance plus noise is not positive definite", static_cast<int>(k),
                                        std::numeric_limits<double>::infinity());
            e.precision = hermitian(llt.solve(ComplexMat::Identity(dim_, dim_)));
            e.logdet = 2.0 * llt.matrixLLT().diagonal().real().array().log().sum();
        }
        entries_.push_back(std::move(e));
    }
}

void GmmFilterBank::evaluate(const ComplexMat &y, RealMat &log_terms, std::vector<ComplexMat> &filtered) const
{
    const Index K = static_cast<Index>(entries_.size());
    const double norm = static_cast<double>(dim_) * kLogPi;
    log_terms.resize(y.cols(), K);
    filtered.resize(static_cast<std::size_t>(K));
    for (Index k = 0; k < K; ++k)
    {
        const Entry &e = entries_[static_cast<std::size_t>(k)];
        const ComplexMat diff = y.colwise() - e.mean;
        RealVec maha;
        if (structure_ == CovStructure::Circulant)
        {
            const ComplexMat z = transform_ * diff;
            maha = (e.inv_spectrum.transpose() * z.cwiseAbs2()).transpose();
            filtered[k] = (transform_.adjoint() * (e.shrink.asDiagonal() * z)).colwise() + e.mean;
        }
        else
        {
            const ComplexMat u = e.precision * diff;
            maha = (diff.array().conjugate() * u.array()).real().colwise().sum().transpose();
            filtered[k] = y - noise_.sigma2 * u;
        }
        log_terms.col(k) = (e.log_weight - norm - e.logdet) - maha.array();
    }
}

ComplexVec GmmFilterBank::estimate(const ComplexVec &y) const
{
    if (y.size() != dim_)
        throw std::invalid_argument("gmm_estimate: observation dimension mismatch");
    require_finite(y, "observation");
    return estimate_batch(y);
}

ComplexMat GmmFilterBank::estimate_batch(const ComplexMat &y) const
{
    if (y.rows() != dim_)
        throw std::invalid_argument("gmm_estimate: observation dimension mismatch");
    const Index K = static_cast<Index>(entries_.size());
    constexpr Index kChunk = 512;
    ComplexMat out(dim_, y.cols());
    RealMat log_terms;
    std::vector<ComplexMat> filtered;
    std::vector<double> row(static_cast<std::size_t>(K));
    for (Index start = 0; start < y.cols(); start += kChunk)
    {
        const Index n = std::min(kChunk, y.cols() - start);
        evaluate(y.middleCols(start, n), log_terms, filtered);
        for (Index t = 0; t < n; ++t)
        {
            for (Index k = 0; k < K; ++k)
                row[k] = log_terms(t, k);
            normalize_log_weights(row);
            ComplexVec acc = ComplexVec::Zero(dim_);
            for (Index k = 0; k < K; ++k)
                acc += row[k] * filtered[k].col(t);
            out.col(start + t) = acc;
        }
    }
    return out;
}

ComplexVec gmm_estimate(const GmmModel &model, NoiseLevel noise, const ComplexVec &y)
{
    return GmmFilterBank(model, noise).estimate(y);
}

ComplexVec gmm_cme_oracle(const GmmModel &true_model, NoiseLevel noise, const ComplexVec &y)
{
    std::vector<ComplexVec> means;
    std::vector<ComplexMat> covs;
    for (Index k = 0; k < true_model.num_components(); ++k)
    {
        means.push_back(true_model.mean(k));
        covs.push_back(true_model.covariance(k));
    }
    return mixture_cme(true_model.weights(), means, covs, noise, y);
}

namespace
{
constexpr std::string_view kGmmMagic = "GMM1";
constexpr std::uint32_t kGmmVersion = 1;
} // namespace

void write_gmm(std::ostream &out, const GmmModel &model)
{
    detail::LeWriter w(out);
    const Index N = model.dim();
    w.bytes(kGmmMagic);
    w.scalar<std::uint32_t>(kGmmVersion);
    w.scalar<std::uint8_t>(static_cast<std::uint8_t>(model.structure()));
    w.scalar<std::uint32_t>(static_cast<std::uint32_t>(N));
    w.scalar<std::uint32_t>(static_cast<std::uint32_t>(model.num_components()));
    for (Index k = 0; k < model.num_components(); ++k)
    {
        w.scalar<double>(model.weights()(k));
        for (Index n = 0; n < N; ++n)
            w.complex(model.mean(k)(n));
        if (model.structure() == CovStructure::Full)
        {
            const ComplexMat &c = model.full_covariances()[static_cast<std::size_t>(k)];
            for (Index j = 0; j < N; ++j)
                for (Index i = 0; i < N; ++i)
                    w.complex(c(i, j));
        }
        else
        {
            const RealVec &s = model.spectrum(k);
            for (Index i = 0; i < s.size(); ++i)
                w.scalar<double>(s(i));
        }
    }
    w.check("gmm");
}

void write_gmm(const std::filesystem::path &path, const GmmModel &model)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_gmm(out, model);
}

GmmModel read_gmm(std::istream &in)
{
    detail::LeReader r(in);
    r.expect_magic(kGmmMagic);
    const auto version = r.scalar<std::uint32_t>("version");
    if (version != kGmmVersion)
        throw FormatError("unsupported GMM version " + std::to_string(version), 4);
    const auto tag = r.scalar<std::uint8_t>("structure");
    if (tag > 2)
        throw FormatError("unknown covariance structure tag " + std::to_string(tag), 8);
    const auto structure = static_cast<CovStructure>(tag);
    const auto N = r.scalar<std::uint32_t>("N");
    const auto K = r.scalar<std::uint32_t>("K");
    if (N == 0 || K == 0)
        throw FormatError("GMM has zero dimension or no components", 9);
    const std::uint64_t payload = structure == CovStructure::Full ? 2ull * N * N
                                  : structure == CovStructure::Toeplitz ? 2ull * N
                                                                        : N;
    r.require_available(8ull * K * (1 + 2ull * N + payload), "components");

    RealVec weights(K);
    std::vector<ComplexVec> means(K);
    std::vector<ComplexMat> covs;
    std::vector<RealVec> spectra;
    for (std::uint32_t k = 0; k < K; ++k)
    {
        weights(k) = r.scalar<double>("weight");
        means[k].resize(N);
        for (Index n = 0; n < N; ++n)
            means[k](n) = r.complex("mean");
        if (structure == CovStructure::Full)
        {
            ComplexMat c(N, N);
            for (Index j = 0; j < N; ++j)
                for (Index i = 0; i < N; ++i)
                    c(i, j) = r.complex("covariance");
            covs.push_back(std::move(c));
        }
        else
        {
            RealVec s(spectrum_length(structure, N));
            for (Index i = 0; i < s.size(); ++i)
                s(i) = r.scalar<double>("spectrum");
            spectra.push_back(std::move(s));
        }
    }
    const std::uint64_t end = r.offset();
    r.expect_end();
    try
    {
        if (structure == CovStructure::Full)
            return GmmModel::full(std::move(weights), std::move(means), std::move(covs));
        return GmmModel::structured(structure, std::move(weights), std::move(means), std::move(spectra));
    }
    catch (const std::invalid_argument &err)
    {
        throw FormatError(std::string("invalid GMM parameters: ") + err.what(), end);
    }
}

GmmModel read_gmm(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path.string() + " for reading");
    return read_gmm(in);
}

} // namespace mfa
