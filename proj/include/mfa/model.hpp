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

#include "mfa/dataset.hpp"
#include "mfa/gaussian.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

namespace mfa
{

// One factor analyzer: h | k = W z + u + mu with z ~ CN(0, I), u ~ CN(0, Psi).
struct MfaComponent
{
    double weight = 1.0;
    ComplexVec mean;
    LowRankCovariance cov;
};

// Mixture of K factor analyzers sharing dimension N and latent rank L;
// equivalently a GMM with covariances W_k W_k^H + Psi_k.
class MfaModel
{
  public:
    MfaModel() = default;
    // Validates shapes and the weight simplex (sum within 1e-12 after
    // renormalization of rounding drift). Throws std::invalid_argument.
    explicit MfaModel(std::vector<MfaComponent> components);

    Index dim() const { return dim_; }
    Index latent_dim() const { return latent_dim_; }
    Index num_components() const { return static_cast<Index>(components_.size()); }

    const MfaComponent &component(Index k) const { return components_[static_cast<std::size_t>(k)]; }
    const std::vector<MfaComponent> &components() const { return components_; }
    RealVec weights() const;

  private:
    std::vector<MfaComponent> components_;
    Index dim_ = 0;
    Index latent_dim_ = 0;
};

enum class PsiMode
{
    ScaledIdentity,    // Psi_k = psi_k^2 I
    SharedDiagonal,    // Psi_k = Psi for all k
    ComponentDiagonal, // unrestricted diagonal per component
};

enum class InitMethod
{
    KMeansPca,
    Random,
};

struct FitConfig
{
    int max_iter = 300;
    double rel_tol = 1e-6;
    std::uint64_t seed = 0;
    PsiMode psi_mode = PsiMode::ScaledIdentity;
    InitMethod init = InitMethod::KMeansPca;
    int kmeans_iter = 30;
    double weight_floor = 1e-8;

    void validate() const;
};

struct Reseed
{
    int iteration;
    int component;
};

// Average log-likelihood of the model before the first update and after every
// EM iteration; log_likelihood.size() == iterations + 1.
struct FitTrace
{
    std::vector<double> log_likelihood;
    std::vector<Reseed> reseeds;
    int iterations = 0;
    bool converged = false;

    // True when no step decreases by more than slack * |previous|.
    bool is_monotone(double slack = 1e-8) const;
};

struct FitResult
{
    MfaModel model;
    FitTrace trace;
};

// Posterior over the latent factors for every (sample, component):
// means[k] is L x T, covariances[k] = A_k is shared by all samples.
struct LatentStats
{
    std::vector<ComplexMat> means;
    std::vector<ComplexMat> covariances;
};

struct EStepResult
{
    RealMat responsibilities; // T x K, rows on the simplex
    LatentStats latent;
    RealVec sample_log_likelihood; // log p(h_t) per sample
    double average_log_likelihood = 0.0;
};

// 1e-8 times the mean per-entry energy of the dataset.
double psi_floor_for(const ChannelDataset &dataset);

EStepResult e_step(const MfaModel &model, const ChannelDataset &dataset);

struct MStepOptions
{
    PsiMode psi_mode = PsiMode::ScaledIdentity;
    std::optional<double> psi_floor;  // defaults to psi_floor_for(dataset)
    double weight_floor = 1e-8;
    double ridge = 1e-10;             // relative to trace(Gram)/(L+1)
};

// Closed-form updates: [W_k, mu_k] by responsibility-weighted regression on
// the augmented latent [z; 1], then Psi_k from the expected residual energy,
// then weights as column means of the responsibilities.
std::vector<MfaComponent> m_step(const ChannelDataset &dataset, const RealMat &responsibilities,
                                 const LatentStats &latent, const MStepOptions &options);

// Average per-sample log p(h) under the mixture.
double log_likelihood(const MfaModel &model, const ChannelDataset &dataset);

// Per-sample log p(h_t), and per-(t, k) log p(k) + log N(h_t; mu_k, C_k) when
// joint is non-null (resized to T x K).
RealVec sample_log_likelihood(const MfaModel &model, const ComplexMat &samples, RealMat *joint = nullptr);

FitResult fit_em(const ChannelDataset &dataset, Index K, Index L, const FitConfig &config = {});

ChannelDataset sample(const MfaModel &model, Index n, Rng &rng);
// Same as sample(), also reporting the component index of every draw.
ChannelDataset sample(const MfaModel &model, Index n, Rng &rng, std::vector<int> &labels);

enum class ParamKind
{
    Mfa,
    GmmFull,
    GmmToeplitz,
    GmmCirculant,
};

// Real parameter counts under the scaled-identity Psi restriction:
//   mfa K(LN + N + 2), gmm-full K(N^2/2 + 2N + 1) with N^2/2 rounded up,
//   gmm-toep K(5N + 1), gmm-circ K(2N + 1). L is ignored for the GMM kinds.
std::int64_t parameter_count(ParamKind kind, std::int64_t K, std::int64_t N, std::int64_t L = 0);

// "MFA1" container: magic, version u32 = 1, N, L, K (u32), then per component
// weight f64, mean (2N f64), W (2NL f64, column-major), psi diagonal (N f64).
void write_model(std::ostream &out, const MfaModel &model);
void write_model(const std::filesystem::path &path, const MfaModel &model);
MfaModel read_model(std::istream &in);
MfaModel read_model(const std::filesystem::path &path);

} // namespace mfa
