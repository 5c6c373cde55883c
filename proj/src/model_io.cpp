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

#include "mfa/model.hpp"

#include "binary_io.hpp"

#include <fstream>
#include <limits>

namespace mfa
{

namespace
{
constexpr std::string_view kMagic = "MFA1";
constexpr std::uint32_t kVersion = 1;
} // namespace

void write_model(std::ostream &out, const MfaModel &model)
{
    if (model.num_components() == 0)
        throw std::invalid_argument("write_model: empty model");
    detail::LeWriter w(out);
    w.bytes(kMagic);
    w.scalar<std::uint32_t>(kVersion);
    w.scalar<std::uint32_t>(static_cast<std::uint32_t>(model.dim()));
    w.scalar<std::uint32_t>(static_cast<std::uint32_t>(model.latent_dim()));
    w.scalar<std::uint32_t>(static_cast<std::uint32_t>(model.num_components()));
    for (const auto &c : model.components())
    {
        w.scalar<double>(c.weight);
        for (Index n = 0; n < model.dim(); ++n)
            w.complex(c.mean(n));
        // column-major
        for (Index j = 0; j < model.latent_dim(); ++j)
            for (Index n = 0; n < model.dim(); ++n)
                w.complex(c.cov.loading(n, j));
        for (Index n = 0; n < model.dim(); ++n)
            w.scalar<double>(c.cov.diag_term(n));
    }
    w.check("model");
}

void write_model(const std::filesystem::path &path, const MfaModel &model)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_model(out, model);
}

MfaModel read_model(std::istream &in)
{
    detail::LeReader r(in);
    r.expect_magic(kMagic);
    const auto version = r.scalar<std::uint32_t>("version");
    if (version != kVersion)
        throw FormatError("unsupported model version " + std::to_string(version), 4);
    const auto N = r.scalar<std::uint32_t>("N");
    const auto L = r.scalar<std::uint32_t>("L");
    const auto K = r.scalar<std::uint32_t>("K");
    if (N == 0 || K == 0)
        throw FormatError("model has zero dimension or no components", 8);
    if (L > N)
        throw FormatError("latent dimension exceeds model dimension", 12);
    const std::uint64_t per_component = 8ull * (1 + 2ull * N + 2ull * N * L + N);
    r.require_available(per_component * K, "components");

    std::vector<MfaComponent> components(K);
    for (auto &c : components)
    {
        c.weight = r.scalar<double>("weight");
        c.mean.resize(N);
        for (Index n = 0; n < N; ++n)
            c.mean(n) = r.complex("mean");
        c.cov.loading.resize(N, L);
        for (Index j = 0; j < L; ++j)
            for (Index n = 0; n < N; ++n)
                c.cov.loading(n, j) = r.complex("loading");
        c.cov.diag_term.resize(N);
        for (Index n = 0; n < N; ++n)
            c.cov.diag_term(n) = r.scalar<double>("psi");
    }
    const std::uint64_t end = r.offset();
    r.expect_end();
    try
    {
        return MfaModel(std::move(components));
    }
    catch (const std::invalid_argument &err)
    {
        throw FormatError(std::string("invalid model parameters: ") + err.what(), end);
    }
}

MfaModel read_model(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path.string() + " for reading");
    return read_model(in);
}

} // namespace mfa
