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

#include "mfa/baselines.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace mfa
{

namespace
{

// Columns e^{j 2 pi n g / G} / sqrt(count), g = 0..G-1.
ComplexMat dft_grid(int count, int grid)
{
    ComplexMat out(count, grid);
    const double scale = 1.0 / std::sqrt(static_cast<double>(count));
    for (int g = 0; g < grid; ++g)
        for (int n = 0; n < count; ++n)
            out(n, g) = std::polar(scale, 2.0 * std::numbers::pi * n * g / grid);
    return out;
}

constexpr double kDependenceTol = 1e-10;

} // namespace

ComplexVec ls_estimate(const ComplexVec &y)
{
    return y;
}

Dictionary build_dft_dictionary(int Nv, int Nh, int oversampling_v, int oversampling_h)
{
    if (Nv < 1 || Nh < 1 || oversampling_v < 1 || oversampling_h < 1)
        throw std::invalid_argument("build_dft_dictionary: arguments must be positive");
    // a single-element axis has one distinct direction; oversampling it only duplicates atoms
    const int Gv = Nv == 1 ? 1 : oversampling_v * Nv;
    const int Gh = Nh == 1 ? 1 : oversampling_h * Nh;
    const ComplexMat av = dft_grid(Nv, Gv);
    const ComplexMat ah = dft_grid(Nh, Gh);

    Dictionary dict{ComplexMat(Nv * Nh, Gv * Gh), Nv, Nh, oversampling_v, oversampling_h};
    for (int gv = 0; gv < Gv; ++gv)
        for (int gh = 0; gh < Gh; ++gh)
        {
            auto col = dict.atoms.col(gv * Gh + gh);
            for (int v = 0; v < Nv; ++v)
                col.segment(v * Nh, Nh) = av(v, gv) * ah.col(gh);
            col.normalize();
        }
    return dict;
}

ComplexVec SparseCode::dense_coefficients(Index M) const
{
    ComplexVec out = ComplexVec::Zero(M);
    for (std::size_t i = 0; i < support.size(); ++i)
        out(support[i]) = coefficients(static_cast<Index>(i));
    return out;
}

SparseCode omp(const ComplexVec &y, const Dictionary &dict, int sparsity)
{
    const Index N = dict.dim();
    if (y.size() != N)
        throw std::invalid_argument("omp: observation dimension does not match the dictionary");
    if (sparsity < 1 || sparsity > N)
        throw std::invalid_argument("omp: sparsity must satisfy 1 <= s <= N");

    SparseCode code;
    ComplexMat basis(N, sparsity);         // orthonormal span of the support
    ComplexMat triangle = ComplexMat::Zero(sparsity, sparsity); // atoms = basis * triangle
    ComplexVec projections(sparsity);      // basis^H y
    ComplexVec residual = y;
    ComplexVec estimate = ComplexVec::Zero(N);
    std::vector<bool> used(static_cast<std::size_t>(dict.size()), false);

    const double exact_tol = 1e-13 * y.norm();
    Index depth = 0;
    for (; depth < sparsity; ++depth)
    {
        if (residual.norm() <= exact_tol)
            break; // y already lies in the span of the support
        const RealVec corr = (dict.atoms.adjoint() * residual).cwiseAbs2();
        Index pick = -1;
        double best = -1.0;
        for (Index m = 0; m < dict.size(); ++m)
            if (!used[m] && corr(m) > best)
            {
                best = corr(m);
                pick = m;
            }
        if (pick < 0)
            break;

        // twice-iterated Gram-Schmidt against the current basis
        ComplexVec q = dict.atoms.col(pick);
        ComplexVec r_col = ComplexVec::Zero(depth + 1);
        for (int pass = 0; pass < 2 && depth > 0; ++pass)
        {
            const ComplexVec c = basis.leftCols(depth).adjoint() * q;
            q -= basis.leftCols(depth) * c;
            r_col.head(depth) += c;
        }
        const double norm = q.norm();
        if (norm < kDependenceTol)
            break;
        q /= norm;
        r_col(depth) = norm;

        used[pick] = true;
        basis.col(depth) = q;
        triangle.col(depth).head(depth + 1) = r_col;
        projections(depth) = q.dot(residual);
        residual -= projections(depth) * q;
        estimate += projections(depth) * q;

        code.support.push_back(pick);
        code.residual_norms.push_back(residual.norm());
        code.prefix_estimates.push_back(estimate);
    }

    const Index s = depth;
    code.estimate = estimate;
    if (s > 0)
        code.coefficients =
            triangle.topLeftCorner(s, s).triangularView<Eigen::Upper>().solve(projections.head(s));
    else
        code.coefficients.resize(0);
    return code;
}

ComplexVec genie_omp(const ComplexVec &y, const Dictionary &dict, const ComplexVec &h_true, int s_max,
                     int *chosen_depth)
{
    if (s_max < 1)
        throw std::invalid_argument("genie_omp: s_max must be at least 1");
    if (h_true.size() != y.size())
        throw std::invalid_argument("genie_omp: true channel dimension mismatch");
    const SparseCode code = omp(y, dict, std::min<int>(s_max, static_cast<int>(dict.dim())));
    if (code.prefix_estimates.empty())
    {
        if (chosen_depth)
            *chosen_depth = 0;
        return ComplexVec::Zero(y.size());
    }
    std::size_t best = 0;
    double best_err = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < code.prefix_estimates.size(); ++s)
    {
        const double err = (code.prefix_estimates[s] - h_true).squaredNorm();
        if (err < best_err)
        {
            best_err = err;
            best = s;
        }
    }
    if (chosen_depth)
        *chosen_depth = static_cast<int>(best + 1);
    return code.prefix_estimates[best];
}

SampleCovariance fit_sample_lmmse(const ChannelDataset &dataset)
{
    if (dataset.size() < 1)
        throw std::invalid_argument("fit_sample_lmmse: empty dataset");
    ComplexMat c = dataset.samples * dataset.samples.adjoint() / static_cast<double>(dataset.size());
    return SampleCovariance{0.5 * (c + c.adjoint())};
}

ComplexMat lmmse_filter(const SampleCovariance &cov, NoiseLevel noise)
{
    ComplexMat cy = cov.matrix;
    cy.diagonal().array() += noise.sigma2;
    const Eigen::LLT<ComplexMat> llt(cy);
    if (llt.info() != Eigen::Success)
        throw ConditioningError("sample covariance plus noise is not positive definite", -1,
                                std::numeric_limits<double>::infinity());
    // C and C + sigma2 I commute
    return llt.solve(cov.matrix);
}

ComplexVec apply(const SampleCovariance &cov, NoiseLevel noise, const ComplexVec &y)
{
    if (y.size() != cov.matrix.rows())
        throw std::invalid_argument("apply: observation dimension mismatch");
    return lmmse_filter(cov, noise) * y;
}

} // namespace mfa
