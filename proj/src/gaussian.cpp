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

#include "mfa/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace mfa
{

ComplexMat LowRankCovariance::dense() const
{
    ComplexMat c = loading * loading.adjoint();
    c.diagonal() += diag_term.cast<Complex>();
    return c;
}

LowRankCovariance LowRankCovariance::scaled_identity(Index dim, Index rank, double psi2)
{
    return LowRankCovariance{ComplexMat::Zero(dim, rank), RealVec::Constant(dim, psi2)};
}

LowRankFactorization::LowRankFactorization(const LowRankCovariance &cov, NoiseLevel noise, int component)
    : loading_(cov.loading)
{
    const Index n = cov.dim();
    if (cov.loading.rows() != n)
        throw std::invalid_argument("loading rows do not match the diagonal length");

    RealVec shifted = cov.diag_term.array() + noise.sigma2;
    if (!(shifted.array() > 0.0).all() || !shifted.allFinite())
        throw std::invalid_argument("diagonal term plus noise variance must be strictly positive");

    inv_diag_ = shifted.cwiseInverse();
    logdet_ = shifted.array().log().sum();

    if (cov.rank() == 0)
    {
        scaled_loading_.resize(n, 0);
        return;
    }

    scaled_loading_ = inv_diag_.asDiagonal() * loading_;
    ComplexMat cap = loading_.adjoint() * scaled_loading_;
    cap.diagonal().array() += 1.0;
    capacitance_.compute(cap);
    if (capacitance_.info() != Eigen::Success)
        throw ConditioningError("capacitance matrix is not positive definite", component,
                                std::numeric_limits<double>::infinity());

    const RealVec pivots = capacitance_.matrixLLT().diagonal().real();
    if (!((pivots.array() > 0.0).all()))
        throw ConditioningError("non-positive pivot in capacitance factorization", component,
                                std::numeric_limits<double>::infinity());
    const double ratio = pivots.maxCoeff() / pivots.minCoeff();
    condition_ = ratio * ratio;
    if (!(condition_ <= kConditionLimit))
        throw ConditioningError("capacitance matrix is ill-conditioned", component, condition_);

    logdet_ += 2.0 * pivots.array().log().sum();
}

ComplexVec LowRankFactorization::solve(const ComplexVec &x) const
{
    ComplexVec out = inv_diag_.cwiseProduct(x);
    if (rank() > 0)
        out.noalias() -= scaled_loading_ * capacitance_.solve(scaled_loading_.adjoint() * x);
    return out;
}

ComplexMat LowRankFactorization::solve(const ComplexMat &x) const
{
    ComplexMat out = inv_diag_.asDiagonal() * x;
    if (rank() > 0)
        out.noalias() -= scaled_loading_ * capacitance_.solve(scaled_loading_.adjoint() * x);
    return out;
}

RealVec LowRankFactorization::quadratic_form(const ComplexMat &x) const
{
    RealVec out = (inv_diag_.transpose() * x.cwiseAbs2()).transpose();
    if (rank() > 0)
    {
        ComplexMat proj = scaled_loading_.adjoint() * x;
        capacitance_.matrixL().solveInPlace(proj);
        out -= proj.colwise().squaredNorm().transpose();
    }
    return out;
}

double LowRankFactorization::quadratic_form(const ComplexVec &x) const
{
    double out = inv_diag_.dot(x.cwiseAbs2());
    if (rank() > 0)
    {
        ComplexVec proj = scaled_loading_.adjoint() * x;
        capacitance_.matrixL().solveInPlace(proj);
        out -= proj.squaredNorm();
    }
    return out;
}

ComplexMat LowRankFactorization::inverse() const
{
    ComplexMat out = ComplexMat::Zero(dim(), dim());
    out.diagonal() = inv_diag_.cast<Complex>();
    if (rank() > 0)
    {
        // S A S^H = (L^-1 S^H)^H (L^-1 S^H)
        ComplexMat right = scaled_loading_.adjoint();
        capacitance_.matrixL().solveInPlace(right);
        out.noalias() -= right.adjoint() * right;
    }
    return 0.5 * (out + out.adjoint());
}

ComplexMat LowRankFactorization::latent_mean(const ComplexMat &x) const
{
    if (rank() == 0)
        return ComplexMat::Zero(0, x.cols());
    return capacitance_.solve(scaled_loading_.adjoint() * x);
}

void LowRankFactorization::quadratic_form_and_latent(const ComplexMat &x, RealVec &quad, ComplexMat &latent) const
{
    quad = (inv_diag_.transpose() * x.cwiseAbs2()).transpose();
    if (rank() == 0)
    {
        latent = ComplexMat::Zero(0, x.cols());
        return;
    }
    latent = scaled_loading_.adjoint() * x;
    capacitance_.matrixL().solveInPlace(latent);
    quad -= latent.colwise().squaredNorm().transpose();
    capacitance_.matrixU().solveInPlace(latent);
}

ComplexMat LowRankFactorization::latent_covariance() const
{
    if (rank() == 0)
        return ComplexMat::Zero(0, 0);
    ComplexMat a = capacitance_.solve(ComplexMat::Identity(rank(), rank()));
    return 0.5 * (a + a.adjoint());
}

ComplexMat woodbury_inverse(const LowRankCovariance &cov, NoiseLevel noise)
{
    return LowRankFactorization(cov, noise).inverse();
}

double lowrank_logdet(const LowRankCovariance &cov, NoiseLevel noise)
{
    return LowRankFactorization(cov, noise).logdet();
}

double cgauss_logpdf(const ComplexVec &x, const ComplexVec &mean, const LowRankCovariance &cov,
                     NoiseLevel noise)
{
    if (x.size() != cov.dim() || mean.size() != cov.dim())
        throw std::invalid_argument("cgauss_logpdf: dimension mismatch");
    const LowRankFactorization fact(cov, noise);
    const ComplexVec diff = x - mean;
    return -static_cast<double>(x.size()) * std::log(std::numbers::pi) - fact.logdet() - fact.quadratic_form(diff);
}

ComplexVec standard_complex_normal(Index n, Rng &rng)
{
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    ComplexVec out(n);
    for (Index i = 0; i < n; ++i)
    {
        const double re = normal(rng);
        const double im = normal(rng);
        out(i) = Complex(re, im);
    }
    return out;
}

ComplexVec sample_component(const ComplexVec &mean, const LowRankCovariance &cov, Rng &rng)
{
    const ComplexVec z = standard_complex_normal(cov.rank(), rng);
    const ComplexVec u = standard_complex_normal(cov.dim(), rng);
    ComplexVec out = mean + cov.diag_term.cwiseSqrt().cwiseProduct(u);
    if (cov.rank() > 0)
        out.noalias() += cov.loading * z;
    return out;
}

double log_sum_exp(std::span<const double> values)
{
    if (values.empty())
        throw std::invalid_argument("log_sum_exp: empty input");
    if (values.size() == 1)
        return values[0];
    const double peak = *std::max_element(values.begin(), values.end());
    if (!std::isfinite(peak))
        return peak;
    double acc = 0.0;
    for (double v : values)
        acc += std::exp(v - peak);
    return peak + std::log(acc);
}

double normalize_log_weights(std::span<double> log_weights)
{
    const double total = log_sum_exp(log_weights);
    for (double &v : log_weights)
        v = std::exp(v - total);
    // renormalize to clear rounding drift in the sum
    double sum = 0.0;
    for (double v : log_weights)
        sum += v;
    for (double &v : log_weights)
        v /= sum;
    return total;
}

} // namespace mfa
