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

#include "binary_io.hpp"

#include <fstream>
#include <limits>

namespace mfa
{

namespace
{
constexpr std::string_view kMagic = "CHD1";
constexpr std::uint32_t kVersion = 1;
} // namespace

double ChannelDataset::mean_energy() const
{
    if (size() == 0)
        return 0.0;
    return samples.squaredNorm() / static_cast<double>(size());
}

void write_dataset(std::ostream &out, const ChannelDataset &dataset)
{
    if (dataset.size() == 0)
        throw std::invalid_argument("write_dataset: empty dataset");
    if (dataset.dim() == 0 || dataset.dim() > std::numeric_limits<std::uint32_t>::max())
        throw std::invalid_argument("write_dataset: unsupported dimension");

    detail::LeWriter w(out);
    w.bytes(kMagic);
    w.scalar<std::uint32_t>(kVersion);
    w.scalar<std::uint32_t>(static_cast<std::uint32_t>(dataset.dim()));
    w.scalar<std::uint64_t>(static_cast<std::uint64_t>(dataset.size()));
    w.scalar<double>(dataset.normalization);
    for (Index t = 0; t < dataset.size(); ++t)
        for (Index n = 0; n < dataset.dim(); ++n)
            w.complex(dataset.samples(n, t));
    w.check("dataset");
}

void write_dataset(const std::filesystem::path &path, const ChannelDataset &dataset)
{
    if (dataset.size() == 0)
        throw std::invalid_argument("write_dataset: empty dataset");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_dataset(out, dataset);
}

ChannelDataset read_dataset(std::istream &in)
{
    detail::LeReader r(in);
    r.expect_magic(kMagic);
    const auto version = r.scalar<std::uint32_t>("version");
    if (version != kVersion)
        throw FormatError("unsupported dataset version " + std::to_string(version), 4);
    const auto dim = r.scalar<std::uint32_t>("N");
    const auto count = r.scalar<std::uint64_t>("T");
    if (dim == 0)
        throw FormatError("dataset dimension is zero", 8);
    if (count == 0)
        throw FormatError("dataset holds no samples", 12);
    const double normalization = r.scalar<double>("normalization");

    if (count > std::numeric_limits<std::uint64_t>::max() / 16 / dim)
        throw FormatError("dataset size overflows", 12);
    r.require_available(count * dim * 16, "samples");

    // Read into a temporary so a truncated file never yields a partial dataset.
    ChannelDataset ds;
    ds.normalization = normalization;
    ds.samples.resize(dim, static_cast<Index>(count));
    for (Index t = 0; t < static_cast<Index>(count); ++t)
        for (Index n = 0; n < static_cast<Index>(dim); ++n)
            ds.samples(n, t) = r.complex("samples");
    r.expect_end();
    return ds;
}

ChannelDataset read_dataset(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path.string() + " for reading");
    return read_dataset(in);
}

} // namespace mfa
