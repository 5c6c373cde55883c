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
#include "mfa/types.hpp"

namespace mfa
{

// Synthetic clustered multipath scenario seen by a uniform rectangular array.
// Cluster centres are fixed by seed; each sample picks one cluster and sums
// paths_per_cluster plane waves with Laplacian angle offsets around it.
struct ScenarioConfig
{
    int Nv = 4;               // vertical elements
    int Nh = 16;              // horizontal elements
    double spacing_v = 1.0;   // wavelengths
    double spacing_h = 0.5;   // wavelengths
    int num_clusters = 16;
    int paths_per_cluster = 10;
    double angle_spread_deg = 5.0;
    std::uint64_t seed = 1;

    int dim() const { return Nv * Nh; }
    void validate() const;
};

// Mean azimuth/elevation of each cluster, radians.
struct ClusterLayout
{
    RealVec azimuth;
    RealVec elevation;
};

ClusterLayout cluster_layout(const ScenarioConfig &config);

// Kronecker product of the vertical and horizontal ULA responses,
// element (v, h) at index v * Nh + h. Entries have unit modulus.
ComplexVec ura_steering(double azimuth, double elevation, const ScenarioConfig &config);

// T samples, normalized so that the empirical mean of ||h||^2 is N.
// Sample t draws from its own stream derived from (config.seed, stream_seed, t).
ChannelDataset generate_channels(const ScenarioConfig &config, Index T, std::uint64_t stream_seed);

// Scales all samples by one common factor so that (1/T) sum ||h_t||^2 = N.
ChannelDataset normalize_dataset(ChannelDataset dataset);

struct Observation
{
    ComplexVec y;
    NoiseLevel noise;
};

// y = h + n, n ~ CN(0, sigma2 I), sigma2 = 10^(-snr_db/10).
Observation corrupt(const ComplexVec &h, double snr_db, Rng &rng);

// Column-wise corrupt() over a sample matrix.
ComplexMat corrupt_samples(const ComplexMat &h, double snr_db, Rng &rng);

} // namespace mfa
