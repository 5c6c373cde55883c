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

#include "mfa/scenario.hpp"

#include "mfa/gaussian.hpp"

#include <cmath>
#include <numbers>

namespace mfa
{

namespace
{

constexpr double kDeg = std::numbers::pi / 180.0;

// Cluster centres span a 120 degree sector in azimuth and a band below the horizon.
constexpr double kAzimuthHalfSector = 60.0 * kDeg;
constexpr double kElevationLow = -20.0 * kDeg;
constexpr double kElevationHigh = 5.0 * kDeg;

double laplacian(Rng &rng, double scale)
{
    if (scale == 0.0)
        return 0.0;
    std::exponential_distribution<double> mag(1.0);
    std::bernoulli_distribution sign(0.5);
    const double m = mag(rng) * scale;
    return sign(rng) ? m : -m;
}

ComplexVec ula(int count, double spacing, double sine)
{
    ComplexVec a(count);
    for (int i = 0; i < count; ++i)
        a(i) = std::polar(1.0, 2.0 * std::numbers::pi * spacing * i * sine);
    return a;
}

} // namespace

void ScenarioConfig::validate() const
{
    if (Nv < 1 || Nh < 1)
        throw std::invalid_argument("scenario: array dimensions must be positive");
    if (!(spacing_v > 0.0) || !(spacing_h > 0.0))
        throw std::invalid_argument("scenario: element spacings must be positive");
    if (num_clusters < 1 || paths_per_cluster < 1)
        throw std::invalid_argument("scenario: need at least one cluster and one path");
    if (!(angle_spread_deg >= 0.0) || !std::isfinite(angle_spread_deg))
        throw std::invalid_argument("scenario: angle spread must be finite and nonnegative");
}

ClusterLayout cluster_layout(const ScenarioConfig &config)
{
    config.validate();
    std::seed_seq seq{config.seed, std::uint64_t{0xC1u}};
    Rng rng(seq);
    std::uniform_real_distribution<double> az(-kAzimuthHalfSector, kAzimuthHalfSector);
    std::uniform_real_distribution<double> el(kElevationLow, kElevationHigh);
    ClusterLayout layout{RealVec(config.num_clusters), RealVec(config.num_clusters)};
    for (int c = 0; c < config.num_clusters; ++c)
    {
        layout.azimuth(c) = az(rng);
        layout.elevation(c) = el(rng);
    }
    return layout;
}

ComplexVec ura_steering(double azimuth, double elevation, const ScenarioConfig &config)
{
    const ComplexVec av = ula(config.Nv, config.spacing_v, std::sin(elevation));
    const ComplexVec ah = ula(config.Nh, config.spacing_h, std::cos(elevation) * std::sin(azimuth));
    ComplexVec a(config.dim());
    for (int v = 0; v < config.Nv; ++v)
        a.segment(v * config.Nh, config.Nh) = av(v) * ah;
    return a;
}

ChannelDataset generate_channels(const ScenarioConfig &config, Index T, std::uint64_t stream_seed)
{
    if (T < 1)
        throw std::invalid_argument("generate_channels: T must be at least 1");
    const ClusterLayout layout = cluster_layout(config);
    const double spread = config.angle_spread_deg * kDeg;
    const double gain_scale = 1.0 / std::sqrt(static_cast<double>(config.paths_per_cluster));

    ChannelDataset ds;
    ds.seed = stream_seed;
    ds.samples = ComplexMat::Zero(config.dim(), T);
    for (Index t = 0; t < T; ++t)
    {
        std::seed_seq seq{config.seed, stream_seed, static_cast<std::uint64_t>(t)};
        Rng rng(seq);
        std::uniform_int_distribution<int> pick(0, config.num_clusters - 1);
        const int c = pick(rng);
        for (int p = 0; p < config.paths_per_cluster; ++p)
        {
            const double az = layout.azimuth(c) + laplacian(rng, spread);
            const double el = layout.elevation(c) + laplacian(rng, spread);
            const Complex gain = gain_scale * standard_complex_normal(1, rng)(0);
            ds.samples.col(t) += gain * ura_steering(az, el, config);
        }
    }
    return normalize_dataset(std::move(ds));
}

ChannelDataset normalize_dataset(ChannelDataset dataset)
{
    const double energy = dataset.mean_energy();
    if (!(energy > 0.0) || !std::isfinite(energy))
        throw std::invalid_argument("normalize_dataset: dataset has no energy");
    const double scale = std::sqrt(static_cast<double>(dataset.dim()) / energy);
    dataset.samples *= scale;
    dataset.normalization *= scale;
    return dataset;
}

Observation corrupt(const ComplexVec &h, double snr_db, Rng &rng)
{
    const NoiseLevel noise = NoiseLevel::from_snr_db(snr_db);
    return {h + std::sqrt(noise.sigma2) * standard_complex_normal(h.size(), rng), noise};
}

ComplexMat corrupt_samples(const ComplexMat &h, double snr_db, Rng &rng)
{
    ComplexMat y(h.rows(), h.cols());
    for (Index t = 0; t < h.cols(); ++t)
        y.col(t) = corrupt(h.col(t), snr_db, rng).y;
    return y;
}

} // namespace mfa
