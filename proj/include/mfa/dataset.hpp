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

#include <filesystem>
#include <iosfwd>

namespace mfa
{

// T complex channel vectors of dimension N, stored one sample per column.
struct ChannelDataset
{
    ComplexMat samples;          // N x T
    double normalization = 1.0;  // cumulative scale applied to the raw samples
    std::uint64_t seed = 0;      // provenance of the generating stream

    Index dim() const { return samples.rows(); }
    Index size() const { return samples.cols(); }

    // (1/T) sum_t ||h_t||^2
    double mean_energy() const;
};

// Binary container "CHD1": magic, version u32 = 1, N u32, T u64,
// normalization f64, then T*N complex entries as interleaved (re, im) f64,
// one sample after another. Little-endian throughout.
void write_dataset(std::ostream &out, const ChannelDataset &dataset);
void write_dataset(const std::filesystem::path &path, const ChannelDataset &dataset);
ChannelDataset read_dataset(std::istream &in);
ChannelDataset read_dataset(const std::filesystem::path &path);

} // namespace mfa
