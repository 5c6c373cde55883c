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

#include "mfa/dataset.hpp"
#include "mfa/model.hpp"
#include "mfa/scenario.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <sstream>

using namespace mfa;

namespace
{

ScenarioConfig small_config()
{
    ScenarioConfig c;
    c.Nv = 2;
    c.Nh = 4;
    c.num_clusters = 3;
    c.paths_per_cluster = 4;
    return c;
}

} // namespace

TEST(Steering, BroadsideIsAllOnes)
{
    const ComplexVec a = ura_steering(0.0, 0.0, ScenarioConfig{});
    EXPECT_LT((a - ComplexVec::Ones(64)).norm(), 1e-12);
}

TEST(Steering, SingleElement)
{
    ScenarioConfig c;
    c.Nv = c.Nh = 1;
    const ComplexVec a = ura_steering(0.7, -0.2, c);
    ASSERT_EQ(a.size(), 1);
    EXPECT_LT(std::abs(a(0) - 1.0), 1e-15);
}

TEST(Steering, UnitModulusAndKroneckerLayout)
{
    ScenarioConfig c;
    c.Nv = 3;
    c.Nh = 5;
    const double az = 0.4, el = -0.1;
    const ComplexVec a = ura_steering(az, el, c);
    EXPECT_NEAR(a.squaredNorm(), 15.0, 1e-12);
    EXPECT_LT((a.cwiseAbs().array() - 1.0).abs().maxCoeff(), 1e-12);
    // one step along h advances the phase by 2 pi d_h cos(el) sin(az)
    const double dh = 2.0 * std::numbers::pi * c.spacing_h * std::cos(el) * std::sin(az);
    const double dv = 2.0 * std::numbers::pi * c.spacing_v * std::sin(el);
    for (int v = 0; v < 3; ++v)
        for (int h = 0; h < 5; ++h)
        {
            const Complex ratio = a(v * 5 + h) / a(0);
            EXPECT_LT(std::abs(std::abs(std::arg(ratio * std::polar(1.0, -(v * dv + h * dh))))), 1e-9);
        }
}

TEST(Generate, MeanEnergyIsDimension)
{
    const ChannelDataset ds = generate_channels(small_config(), 500, 3);
    EXPECT_NEAR(ds.mean_energy(), 8.0, 1e-10);
    EXPECT_EQ(ds.dim(), 8);
    EXPECT_EQ(ds.size(), 500);
    EXPECT_GT(ds.normalization, 0.0);
}

TEST(Generate, ZeroSpreadSingleClusterIsRankOne)
{
    ScenarioConfig c = small_config();
    c.num_clusters = 1;
    c.angle_spread_deg = 0.0;
    const ChannelDataset ds = generate_channels(c, 300, 1);
    const RealVec ev =
        Eigen::SelfAdjointEigenSolver<ComplexMat>(ds.samples * ds.samples.adjoint()).eigenvalues().reverse();
    EXPECT_LT(ev(1), 1e-8 * ev(0));
}

TEST(Generate, Deterministic)
{
    const ChannelDataset a = generate_channels(small_config(), 50, 9);
    const ChannelDataset b = generate_channels(small_config(), 50, 9);
    EXPECT_EQ(a.samples, b.samples);
    const ChannelDataset c = generate_channels(small_config(), 50, 10);
    EXPECT_GT((a.samples - c.samples).norm(), 1.0);
}

TEST(Generate, SamplesIndependentOfSetSize)
{
    // each sample has its own stream; only the common normalization differs
    const ChannelDataset a = generate_channels(small_config(), 20, 4);
    const ChannelDataset b = generate_channels(small_config(), 40, 4);
    const ComplexMat raw_a = a.samples / a.normalization;
    const ComplexMat raw_b = b.samples.leftCols(20) / b.normalization;
    EXPECT_LT((raw_a - raw_b).norm(), 1e-10 * raw_a.norm());
}

TEST(Generate, Errors)
{
    ScenarioConfig c = small_config();
    EXPECT_THROW(generate_channels(c, 0, 1), std::invalid_argument);
    c.Nh = 0;
    EXPECT_THROW(generate_channels(c, 1, 1), std::invalid_argument);
    c = small_config();
    c.angle_spread_deg = -1.0;
    EXPECT_THROW(generate_channels(c, 1, 1), std::invalid_argument);
}

TEST(Normalize, IdempotentAndScaleInvariant)
{
    Rng rng(1);
    ChannelDataset ds;
    ds.samples = mfa::test::random_matrix(4, 30, rng);
    const ChannelDataset once = normalize_dataset(ds);
    const ChannelDataset twice = normalize_dataset(once);
    EXPECT_LT((once.samples - twice.samples).norm(), 1e-12);
    ChannelDataset scaled = ds;
    scaled.samples *= 7.5;
    EXPECT_LT((normalize_dataset(scaled).samples - once.samples).norm(), 1e-12);
}

TEST(Normalize, SingleSample)
{
    ChannelDataset ds;
    ds.samples = ComplexMat::Zero(4, 1);
    ds.samples(2, 0) = 1.0;
    const ChannelDataset n = normalize_dataset(ds);
    EXPECT_NEAR(n.samples.norm(), 2.0, 1e-15);
    EXPECT_NEAR(n.normalization, 2.0, 1e-15);
    ds.samples.setZero();
    EXPECT_THROW(normalize_dataset(ds), std::invalid_argument);
}

TEST(Corrupt, NoiseLevelFromSnr)
{
    Rng rng(2);
    EXPECT_NEAR(corrupt(ComplexVec::Zero(3), 10.0, rng).noise.sigma2, 0.1, 1e-15);
    EXPECT_NEAR(corrupt(ComplexVec::Zero(3), 0.0, rng).noise.sigma2, 1.0, 1e-15);
    EXPECT_NEAR(corrupt(ComplexVec::Zero(3), -20.0, rng).noise.sigma2, 100.0, 1e-12);
}

TEST(Corrupt, NoisePowerAndCircularity)
{
    Rng rng(3);
    const int N = 16, n = 20000;
    const ComplexMat h = ComplexMat::Zero(N, n);
    const ComplexMat noise = corrupt_samples(h, 6.0, rng);
    const double sigma2 = std::pow(10.0, -0.6);
    const double count = static_cast<double>(N) * n;
    // per-entry |n|^2 has variance sigma2^2 under CN(0, sigma2)
    EXPECT_NEAR(noise.squaredNorm() / count, sigma2, 4 * sigma2 / std::sqrt(count));
    EXPECT_NEAR(noise.real().squaredNorm() / count, sigma2 / 2, 4 * sigma2 / std::sqrt(2 * count));
    EXPECT_NEAR(noise.imag().squaredNorm() / count, sigma2 / 2, 4 * sigma2 / std::sqrt(2 * count));
    EXPECT_NEAR(std::abs((noise.array() * noise.array()).mean()), 0.0, 4 * sigma2 / std::sqrt(count));
}

TEST(DatasetIo, RoundTrip)
{
    const ChannelDataset ds = generate_channels(small_config(), 17, 2);
    std::stringstream ss;
    write_dataset(ss, ds);
    EXPECT_EQ(ss.str().size(), 4u + 4 + 4 + 8 + 8 + 17u * 8 * 16);
    const ChannelDataset back = read_dataset(ss);
    EXPECT_EQ(back.samples, ds.samples);
    EXPECT_EQ(back.normalization, ds.normalization);
}

TEST(DatasetIo, RejectsTruncationAndCorruption)
{
    const ChannelDataset ds = generate_channels(small_config(), 3, 2);
    std::stringstream ss;
    write_dataset(ss, ds);
    const std::string bytes = ss.str();
    for (std::size_t len = 0; len < bytes.size(); ++len)
    {
        std::istringstream in(bytes.substr(0, len));
        EXPECT_THROW(read_dataset(in), FormatError) << len;
    }
    std::string bad = bytes;
    bad[1] = 'Z';
    std::istringstream in(bad);
    try
    {
        read_dataset(in);
        ADD_FAILURE();
    }
    catch (const FormatError &e)
    {
        EXPECT_EQ(e.offset(), 0u);
    }
    std::istringstream trailing(bytes + "!");
    EXPECT_THROW(read_dataset(trailing), FormatError);
}

TEST(DatasetIo, EmptyDatasetNotWritten)
{
    ChannelDataset ds;
    ds.samples.resize(4, 0);
    std::stringstream ss;
    EXPECT_THROW(write_dataset(ss, ds), std::invalid_argument);
}

TEST(ScenarioModel, ZeroSpreadNeedsOneFactor)
{
    ScenarioConfig c = small_config();
    c.angle_spread_deg = 0.0;
    const ChannelDataset ds = generate_channels(c, 2000, 5);
    FitConfig cfg;
    cfg.max_iter = 100;
    const Index K = c.num_clusters;
    double best = -std::numeric_limits<double>::infinity();
    double one = 0.0;
    for (Index L = 1; L <= 4; ++L)
    {
        const double ll = log_likelihood(fit_em(ds, K, L, cfg).model, ds);
        if (L == 1)
            one = ll;
        best = std::max(best, ll);
    }
    EXPECT_GT(one, best - 0.1) << one << " " << best;
}
