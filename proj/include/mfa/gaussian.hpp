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

#pragma once

#include "mfa/types.hpp"

#include <span>

namespace mfa
{

// Capacitance systems whose estimated condition number exceeds this are rejected.
inline constexpr double kConditionLimit = 1e12;

// Covariance of the form W W^H + Psi with W (N x L) and Psi diagonal.
// A scaled identity Psi is stored as a constant diagonal.
struct LowRankCovariance
{
    ComplexMat loading; // W, N x L
    RealVec diag_term;  // diagonal of Psi, length N

    Index dim() const { return diag_term.size(); }
    Index rank() const { return loading.cols(); }

    // W W^H + Psi as a dense N x N matrix.
    ComplexMat dense() const;

    static LowRankCovariance scaled_identity(Index dim, Index rank, double psi2);
};

// Cached factorization of C = W W^H + Psi + sigma2 I via the inversion lemma:
//   C^-1 = D - D W A W^H D,  D = (Psi + sigma2 I)^-1,  A = (I + W^H D W)^-1.
// The L x L capacitance I + W^H D W is Cholesky factored once; all
// subsequent solves, quadratic forms and log-determinants reuse it.
class LowRankFactorization
{
  public:
    // Throws std::invalid_argument when Psi + sigma2 has a non-positive entry,
    // ConditioningError when the capacitance is not safely positive definite.
    LowRankFactorization(const LowRankCovariance &cov, NoiseLevel noise, int component = -1);

    Index dim() const { return inv_diag_.size(); }
    Index rank() const { return scaled_loading_.cols(); }

    double logdet() const { return logdet_; }
    double condition_estimate() const { return condition_; }

    // C^-1 x, per column for matrices.
    ComplexVec solve(const ComplexVec &x) const;
    ComplexMat solve(const ComplexMat &x) const;

    // x^H C^-1 x for each column of x.
    RealVec quadratic_form(const ComplexMat &x) const;
    double quadratic_form(const ComplexVec &x) const;

    // Dense C^-1.
    ComplexMat inverse() const;

    // A W^H D x per column: posterior mean of the latent factors given x
    // (the residual from the mean) when noise is folded into D.
    ComplexMat latent_mean(const ComplexMat &x) const;
    // quadratic_form() and latent_mean() in one pass over x, sharing the projection.
    void quadratic_form_and_latent(const ComplexMat &x, RealVec &quad, ComplexMat &latent) const;
    // A = (I + W^H D W)^-1.
    ComplexMat latent_covariance() const;

    const RealVec &inverse_diagonal() const { return inv_diag_; }

  private:
    ComplexMat loading_;        // W
    RealVec inv_diag_;          // D
    ComplexMat scaled_loading_; // D W
    Eigen::LLT<ComplexMat> capacitance_;
    double logdet_ = 0.0;
    double condition_ = 1.0;
};

// (W W^H + Psi + sigma2 I)^-1 computed through the L x L capacitance.
ComplexMat woodbury_inverse(const LowRankCovariance &cov, NoiseLevel noise);

// log det(W W^H + Psi + sigma2 I) by the matrix determinant lemma.
double lowrank_logdet(const LowRankCovariance &cov, NoiseLevel noise);

// Circularly-symmetric complex Gaussian log-density
//   -N log(pi) - log det C - (x - mean)^H C^-1 (x - mean)
// with C = W W^H + Psi + sigma2 I.
double cgauss_logpdf(const ComplexVec &x, const ComplexVec &mean, const LowRankCovariance &cov,
                     NoiseLevel noise);

// n i.i.d. draws of CN(0, 1): real and imaginary parts N(0, 1/2) each.
ComplexVec standard_complex_normal(Index n, Rng &rng);

// mean + W z + u with z ~ CN(0, I_L) and u ~ CN(0, Psi).
ComplexVec sample_component(const ComplexVec &mean, const LowRankCovariance &cov, Rng &rng);

// log sum_i exp(values_i), max-shifted. Throws std::invalid_argument on empty input.
double log_sum_exp(std::span<const double> values);

// In-place conversion of log-weights to a probability vector; returns their log-sum-exp.
double normalize_log_weights(std::span<double> log_weights);

} // namespace mfa
