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

#include "mfa/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace mfa
{

namespace
{

const double kLogPi = std::log(std::numbers::pi);

void check_observation(Index dim, const ComplexVec &y)
{
    if (y.size() != dim)
        throw std::invalid_argument("observation dimension does not match the model");
    require_finite(y, "observation");
}

// Normalizes log terms into responsibilities and forms sum_k r_k h_k.
Estimate combine(std::vector<double> &log_terms, const std::vector<ComplexVec> &per_component)
{
    normalize_log_weights(log_terms);
    Estimate out;
    out.responsibilities = Eigen::Map<const RealVec>(log_terms.data(), static_cast<Index>(log_terms.size()));
    out.value = ComplexVec::Zero(per_component.front().size());
    for (std::size_t k = 0; k < per_component.size(); ++k)
        out.value += log_terms[k] * per_component[k];
    return out;
}

} // namespace

ComplexVec component_lmmse(const MfaComponent &component, NoiseLevel noise, const ComplexVec &y)
{
    check_observation(component.mean.size(), y);
    if (!(noise.sigma2 >= 0.0))
        throw std::invalid_argument("noise variance must be nonnegative");
    const LowRankFactorization fact(component.cov, noise);
    return y - noise.sigma2 * fact.solve(ComplexVec(y - component.mean));
}

RealVec noisy_responsibilities(const MfaModel &model, NoiseLevel noise, const ComplexVec &y)
{
    return estimate(model, noise, y).responsibilities;
}

Estimate estimate(const MfaModel &model, NoiseLevel noise, const ComplexVec &y)
{
    check_observation(model.dim(), y);
    if (!(noise.sigma2 >= 0.0))
        throw std::invalid_argument("noise variance must be nonnegative");
    const Index K = model.num_components();
    const double norm = static_cast<double>(model.dim()) * kLogPi;

    std::vector<double> log_terms(static_cast<std::size_t>(K));
    std::vector<ComplexVec> filtered(static_cast<std::size_t>(K));
    for (Index k = 0; k < K; ++k)
    {
        const auto &c = model.component(k);
        const LowRankFactorization fact(c.cov, noise, static_cast<int>(k));
        const ComplexVec diff = y - c.mean;
        const ComplexVec u = fact.solve(diff);
        log_terms[k] = std::log(c.weight) - norm - fact.logdet() - diff.dot(u).real();
        filtered[k] = y - noise.sigma2 * u;
    }
    return combine(log_terms, filtered);
}

FilterBank::FilterBank(std::vector<Entry> entries, NoiseLevel noise) : entries_(std::move(entries)), noise_(noise)
{
    if (entries_.empty())
        throw std::invalid_argument("FilterBank: no components");
}

FilterBank build_filter_bank(const MfaModel &model, NoiseLevel noise)
{
    if (!(noise.sigma2 > 0.0))
        throw std::invalid_argument("build_filter_bank: noise variance must be positive");
    std::vector<FilterBank::Entry> entries;
    entries.reserve(static_cast<std::size_t>(model.num_components()));
    for (Index k = 0; k < model.num_components(); ++k)
    {
        const auto &c = model.component(k);
        const LowRankFactorization fact(c.cov, noise, static_cast<int>(k));
        FilterBank::Entry e;
        e.log_weight = std::log(c.weight);
        e.mean = c.mean;
        e.precision = fact.inverse();
        e.gain = -noise.sigma2 * e.precision;
        e.gain.diagonal().array() += 1.0;
        e.bias = c.mean - e.gain * c.mean;
        e.logdet = fact.logdet();
        entries.push_back(std::move(e));
    }
    return FilterBank(std::move(entries), noise);
}

Estimate estimate_with_bank(const FilterBank &bank, const ComplexVec &y)
{
    check_observation(bank.dim(), y);
    const Index K = bank.num_components();
    const double norm = static_cast<double>(bank.dim()) * kLogPi;
    std::vector<double> log_terms(static_cast<std::size_t>(K));
    std::vector<ComplexVec> filtered(static_cast<std::size_t>(K));
    for (Index k = 0; k < K; ++k)
    {
        const auto &e = bank.entry(k);
        const ComplexVec diff = y - e.mean;
        const ComplexVec u = e.precision * diff;
        log_terms[k] = e.log_weight - norm - e.logdet - diff.dot(u).real();
        filtered[k].noalias() = e.gain * y;
        filtered[k] += e.bias;
    }
    return combine(log_terms, filtered);
}

ComplexMat estimate_batch(const FilterBank &bank, const ComplexMat &y)
{
    if (y.rows() != bank.dim())
        throw std::invalid_argument("estimate_batch: observation dimension does not match the bank");
    const Index K = bank.num_components();
    const Index T = y.cols();
    const double norm = static_cast<double>(bank.dim()) * kLogPi;
    constexpr Index kChunk = 512;

    ComplexMat out(y.rows(), T);
    std::vector<ComplexMat> filtered(static_cast<std::size_t>(K));
    RealMat log_terms;
    std::vector<double> row(static_cast<std::size_t>(K));
    for (Index start = 0; start < T; start += kChunk)
    {
        const Index n = std::min(kChunk, T - start);
        const auto block = y.middleCols(start, n);
        log_terms.resize(n, K);
        for (Index k = 0; k < K; ++k)
        {
            const auto &e = bank.entry(k);
            const ComplexMat diff = block.colwise() - e.mean;
            const ComplexMat u = e.precision * diff;
            const RealVec maha = (diff.array().conjugate() * u.array()).real().colwise().sum().transpose();
            log_terms.col(k) = (e.log_weight - norm - e.logdet) - maha.array();
            filtered[k] = block - bank.noise().sigma2 * u;
        }
        for (Index t = 0; t < n; ++t)
        {
            for (Index k = 0; k < K; ++k)
                row[k] = log_terms(t, k);
            normalize_log_weights(row);
            ComplexVec acc = ComplexVec::Zero(y.rows());
            for (Index k = 0; k < K; ++k)
                acc += row[k] * filtered[k].col(t);
            out.col(start + t) = acc;
        }
    }
    return out;
}

ComplexVec mixture_cme(const RealVec &weights, const std::vector<ComplexVec> &means,
                       const std::vector<ComplexMat> &covariances, NoiseLevel noise, const ComplexVec &y)
{
    const auto K = means.size();
    if (K == 0 || covariances.size() != K || static_cast<std::size_t>(weights.size()) != K)
        throw std::invalid_argument("mixture_cme: inconsistent mixture description");
    check_observation(means.front().size(), y);
    const Index N = y.size();
    const double norm = static_cast<double>(N) * kLogPi;

    std::vector<double> log_terms(K);
    std::vector<ComplexVec> filtered(K);
    for (std::size_t k = 0; k < K; ++k)
    {
        ComplexMat cy = covariances[k];
        cy.diagonal().array() += noise.sigma2;
        const Eigen::LLT<ComplexMat> llt(cy);
        if (llt.info() != Eigen::Success)
            throw ConditioningError("mixture_cme: covariance plus noise is not positive definite",
                                    static_cast<int>(k), std::numeric_limits<double>::infinity());
        const ComplexVec diff = y - means[k];
        const ComplexVec u = llt.solve(diff);
        const double logdet = 2.0 * llt.matrixLLT().diagonal().real().array().log().sum();
        log_terms[k] = std::log(weights(static_cast<Index>(k))) - norm - logdet - diff.dot(u).real();
        filtered[k] = means[k] + covariances[k] * u;
    }
    return combine(log_terms, filtered).value;
}

ComplexVec gmm_cme_oracle(const MfaModel &true_model, NoiseLevel noise, const ComplexVec &y)
{
    std::vector<ComplexVec> means;
    std::vector<ComplexMat> covs;
    for (const auto &c : true_model.components())
    {
        means.push_back(c.mean);
        covs.push_back(c.cov.dense());
    }
    return mixture_cme(true_model.weights(), means, covs, noise, y);
}

} // namespace mfa
