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

#include "mfa/gaussian.hpp"
#include "mfa/model.hpp"

#include <random>

namespace mfa::test
{

inline ComplexMat random_matrix(Index rows, Index cols, Rng &rng)
{
    ComplexMat m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        m.col(j) = standard_complex_normal(rows, rng);
    return m;
}

inline LowRankCovariance random_cov(Index N, Index L, Rng &rng, bool scaled_identity = false)
{
    std::uniform_real_distribution<double> psi(0.2, 2.0);
    LowRankCovariance c;
    c.loading = random_matrix(N, L, rng);
    if (scaled_identity)
        c.diag_term = RealVec::Constant(N, psi(rng));
    else
    {
        c.diag_term.resize(N);
        for (Index n = 0; n < N; ++n)
            c.diag_term(n) = psi(rng);
    }
    return c;
}

// K components with means spread by `separation`.
inline MfaModel random_model(Index K, Index N, Index L, Rng &rng, double separation = 3.0,
                             bool scaled_identity = true)
{
    std::uniform_real_distribution<double> w(0.5, 1.5);
    std::vector<MfaComponent> comps;
    double total = 0.0;
    for (Index k = 0; k < K; ++k)
    {
        MfaComponent c;
        c.weight = w(rng);
        total += c.weight;
        c.mean = separation * standard_complex_normal(N, rng);
        c.cov = random_cov(N, L, rng, scaled_identity);
        comps.push_back(std::move(c));
    }
    for (auto &c : comps)
        c.weight /= total;
    return MfaModel(std::move(comps));
}

inline double dense_logdet(const ComplexMat &c)
{
    const Eigen::LLT<ComplexMat> llt(c);
    return 2.0 * llt.matrixLLT().diagonal().real().array().log().sum();
}

inline ComplexMat with_noise(const LowRankCovariance &cov, double sigma2)
{
    ComplexMat c = cov.dense();
    c.diagonal().array() += sigma2;
    return c;
}

} // namespace mfa::test
