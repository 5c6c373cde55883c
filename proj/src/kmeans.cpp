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

#include "kmeans.hpp"

#include <algorithm>
#include <numeric>

namespace mfa::detail
{

RealMat squared_distances(const ComplexMat &samples, const ComplexMat &centers)
{
    const RealVec xn = samples.colwise().squaredNorm().transpose();
    const RealVec cn = centers.colwise().squaredNorm().transpose();
    RealMat d = -2.0 * (samples.adjoint() * centers).real();
    d.colwise() += xn;
    d.rowwise() += cn.transpose();
    return d.cwiseMax(0.0);
}

Clustering kmeans(const ComplexMat &samples, Index K, int max_iter, Rng &rng)
{
    const Index T = samples.cols();
    if (K < 1 || K > T)
        throw std::invalid_argument("kmeans: need 1 <= K <= T");

    Clustering out;
    out.centers.resize(samples.rows(), K);

    // k-means++ seeding
    std::uniform_int_distribution<Index> first(0, T - 1);
    out.centers.col(0) = samples.col(first(rng));
    RealVec closest = (samples.colwise() - out.centers.col(0)).colwise().squaredNorm().transpose();
    for (Index k = 1; k < K; ++k)
    {
        const double total = closest.sum();
        Index pick = 0;
        if (total > 0.0)
        {
            std::uniform_real_distribution<double> u(0.0, total);
            double target = u(rng);
            for (pick = 0; pick < T - 1; ++pick)
            {
                target -= closest(pick);
                if (target <= 0.0)
                    break;
            }
        }
        else
        {
            pick = first(rng);
        }
        out.centers.col(k) = samples.col(pick);
        closest = closest.cwiseMin((samples.colwise() - out.centers.col(k)).colwise().squaredNorm().transpose());
    }

    out.labels.assign(static_cast<std::size_t>(T), -1);
    for (int iter = 0; iter < std::max(max_iter, 1); ++iter)
    {
        const RealMat d = squared_distances(samples, out.centers);
        bool changed = false;
        RealVec best(T);
        for (Index t = 0; t < T; ++t)
        {
            Index arg;
            best(t) = d.row(t).minCoeff(&arg);
            if (out.labels[t] != static_cast<int>(arg))
            {
                out.labels[t] = static_cast<int>(arg);
                changed = true;
            }
        }

        ComplexMat sums = ComplexMat::Zero(samples.rows(), K);
        std::vector<Index> counts(static_cast<std::size_t>(K), 0);
        for (Index t = 0; t < T; ++t)
        {
            sums.col(out.labels[t]) += samples.col(t);
            ++counts[out.labels[t]];
        }
        for (Index k = 0; k < K; ++k)
        {
            if (counts[k] > 0)
            {
                out.centers.col(k) = sums.col(k) / static_cast<double>(counts[k]);
                continue;
            }
            Index far;
            best.maxCoeff(&far);
            out.centers.col(k) = samples.col(far);
            best(far) = 0.0;
            changed = true;
        }
        if (!changed && iter > 0)
            break;
    }
    // final assignment consistent with the returned centres
    const RealMat d = squared_distances(samples, out.centers);
    for (Index t = 0; t < T; ++t)
    {
        Index arg;
        d.row(t).minCoeff(&arg);
        out.labels[t] = static_cast<int>(arg);
    }
    return out;
}

ComplexMat member_covariance(const ComplexMat &samples, const std::vector<int> &labels, int cluster,
                             const ComplexVec &center, Index &count)
{
    std::vector<Index> members;
    for (Index t = 0; t < samples.cols(); ++t)
        if (labels[t] == cluster)
            members.push_back(t);
    count = static_cast<Index>(members.size());
    ComplexMat centred(samples.rows(), count);
    for (Index i = 0; i < count; ++i)
        centred.col(i) = samples.col(members[i]) - center;
    if (count == 0)
        return ComplexMat::Zero(samples.rows(), samples.rows());
    return centred * centred.adjoint() / static_cast<double>(count);
}

} // namespace mfa::detail
