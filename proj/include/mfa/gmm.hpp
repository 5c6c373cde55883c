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

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace mfa
{

enum class CovStructure : std::uint8_t
{
    Full = 0,
    Toeplitz = 1,
    Circulant = 2,
};

// Unitary N-point DFT, F(m, n) = exp(-j 2 pi m n / N) / sqrt(N).
ComplexMat circulant_transform(Index N);
// First N columns of the unitary 2N-point DFT (2N x N, orthonormal columns).
ComplexMat toeplitz_transform(Index N);

// Q^H diag(c) Q for the structure's transform Q (F for circulant).
ComplexMat structured_covariance(CovStructure structure, const RealVec &spectrum);

// Gaussian mixture with full, Toeplitz or circulant covariances.
// Structured components are stored by their nonnegative spectra c_k.
class GmmModel
{
  public:
    GmmModel() = default;
    static GmmModel full(RealVec weights, std::vector<ComplexVec> means, std::vector<ComplexMat> covariances);
    static GmmModel structured(CovStructure structure, RealVec weights, std::vector<ComplexVec> means,
                               std::vector<RealVec> spectra);

    CovStructure structure() const { return structure_; }
    Index dim() const { return means_.front().size(); }
    Index num_components() const { return static_cast<Index>(means_.size()); }

    const RealVec &weights() const { return weights_; }
    const ComplexVec &mean(Index k) const { return means_[static_cast<std::size_t>(k)]; }
    // Dense covariance of component k for any structure.
    ComplexMat covariance(Index k) const;
    // Spectrum of a structured component; throws for Full.
    const RealVec &spectrum(Index k) const;
    const std::vector<ComplexMat> &full_covariances() const { return full_; }

  private:
    void validate() const;

    CovStructure structure_ = CovStructure::Full;
    RealVec weights_;
    std::vector<ComplexVec> means_;
    std::vector<ComplexMat> full_;
    std::vector<RealVec> spectra_;
};

// The full-covariance GMM with C_k = W_k W_k^H + Psi_k.
GmmModel gmm_from_mfa(const MfaModel &model);

// Frobenius-nearest structured spectra of a Hermitian scatter matrix, clipped at floor.
RealVec circulant_projection(const ComplexMat &scatter, double floor);
RealVec toeplitz_projection(const ComplexMat &scatter, double floor);

struct GmmFitResult
{
    GmmModel model;
    FitTrace trace;
};

// EM with a Gaussian E-step; the covariance M-step is the weighted scatter
// (full, eigenvalue floored) or its structured projection. The Toeplitz
// projection is not an exact M-step, so its trace may decrease.
GmmFitResult fit_gmm(const ChannelDataset &dataset, Index K, CovStructure structure, const FitConfig &config = {});

double gmm_log_likelihood(const GmmModel &model, const ChannelDataset &dataset);

// Precomputed per-noise-level filters for gmm_estimate.
class GmmFilterBank
{
  public:
    GmmFilterBank(const GmmModel &model, NoiseLevel noise);

    Index dim() const { return dim_; }
    NoiseLevel noise() const { return noise_; }

    ComplexVec estimate(const ComplexVec &y) const;
    ComplexMat estimate_batch(const ComplexMat &y) const;

  private:
    struct Entry
    {
        double log_weight;
        double logdet;
        ComplexVec mean;
        ComplexMat precision; // (C_k + sigma2 I)^-1 for dense components
        RealVec inv_spectrum; // 1 / (c_k + sigma2) for circulant components
        RealVec shrink;       // c_k / (c_k + sigma2)
    };

    // log-terms (T x K) and per-component estimates for the columns of y.
    void evaluate(const ComplexMat &y, RealMat &log_terms, std::vector<ComplexMat> &filtered) const;

    CovStructure structure_;
    Index dim_;
    NoiseLevel noise_;
    ComplexMat transform_; // F for circulant
    std::vector<Entry> entries_;
};

// sum_k p(k | y) (mu_k + C_k (C_k + sigma2 I)^-1 (y - mu_k)).
ComplexVec gmm_estimate(const GmmModel &model, NoiseLevel noise, const ComplexVec &y);

// Exact CME when the GMM is the true prior (dense route).
ComplexVec gmm_cme_oracle(const GmmModel &true_model, NoiseLevel noise, const ComplexVec &y);

// "GMM1" container: magic, version u32 = 1, structure u8, N u32, K u32, then per
// component weight f64, mean (2N f64), and the covariance payload: full N*N
// complex column-major (2N^2 f64), toeplitz 2N f64, circulant N f64.
void write_gmm(std::ostream &out, const GmmModel &model);
void write_gmm(const std::filesystem::path &path, const GmmModel &model);
GmmModel read_gmm(std::istream &in);
GmmModel read_gmm(const std::filesystem::path &path);

} // namespace mfa
