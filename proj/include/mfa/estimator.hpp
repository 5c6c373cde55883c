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

#include "mfa/model.hpp"

#include <vector>

namespace mfa
{

// Channel estimate together with the posterior component probabilities p(k | y).
struct Estimate
{
    ComplexVec value;
    RealVec responsibilities;
};

// mu_k + C_k (C_k + sigma2 I)^-1 (y - mu_k), C_k = W_k W_k^H + Psi_k.
// Evaluated as y - sigma2 (C_k + sigma2 I)^-1 (y - mu_k) so that sigma2 = 0
// returns y exactly.
ComplexVec component_lmmse(const MfaComponent &component, NoiseLevel noise, const ComplexVec &y);

// Softmax over log p(k) + log N_C(y; mu_k, C_k + sigma2 I).
RealVec noisy_responsibilities(const MfaModel &model, NoiseLevel noise, const ComplexVec &y);

// Convex combination of the per-component LMMSE estimates weighted by p(k | y).
// Each component is factored once and shared by its filter and density term.
Estimate estimate(const MfaModel &model, NoiseLevel noise, const ComplexVec &y);

// Per-SNR precomputation: for every component the gain G_k = C_k (C_k + sigma2 I)^-1,
// the bias b_k = mu_k - G_k mu_k, the precision (C_k + sigma2 I)^-1 and its
// log-determinant. Applying a bank needs only matrix-vector products.
class FilterBank
{
  public:
    struct Entry
    {
        double log_weight;
        ComplexVec mean;
        ComplexMat gain;
        ComplexVec bias;
        ComplexMat precision;
        double logdet;
    };

    FilterBank(std::vector<Entry> entries, NoiseLevel noise);

    Index dim() const { return entries_.front().mean.size(); }
    Index num_components() const { return static_cast<Index>(entries_.size()); }
    NoiseLevel noise() const { return noise_; }
    const Entry &entry(Index k) const { return entries_[static_cast<std::size_t>(k)]; }

  private:
    std::vector<Entry> entries_;
    NoiseLevel noise_;
};

// Requires sigma2 > 0.
FilterBank build_filter_bank(const MfaModel &model, NoiseLevel noise);

Estimate estimate_with_bank(const FilterBank &bank, const ComplexVec &y);

// Bank estimates for every column of y (N x T), using matrix-matrix products.
ComplexMat estimate_batch(const FilterBank &bank, const ComplexMat &y);

// Conditional mean E[h | y] under a Gaussian mixture prior with dense
// covariances, by Cholesky factorization of each C_k + sigma2 I. Independent
// of the low-rank path; used as ground truth when the prior is known.
ComplexVec mixture_cme(const RealVec &weights, const std::vector<ComplexVec> &means,
                       const std::vector<ComplexMat> &covariances, NoiseLevel noise, const ComplexVec &y);

// Exact CME when the MFA model is the true generating distribution.
ComplexVec gmm_cme_oracle(const MfaModel &true_model, NoiseLevel noise, const ComplexVec &y);

} // namespace mfa
