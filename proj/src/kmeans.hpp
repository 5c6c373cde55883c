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

#include <vector>

namespace mfa::detail
{

struct Clustering
{
    ComplexMat centers;      // N x K
    std::vector<int> labels; // length T
};

// k-means++ seeding followed by up to max_iter Lloyd steps. Empty clusters
// are re-seeded at the point farthest from its centre.
Clustering kmeans(const ComplexMat &samples, Index K, int max_iter, Rng &rng);

// Squared distances between every sample (column) and every centre: T x K.
RealMat squared_distances(const ComplexMat &samples, const ComplexMat &centers);

// Mean-removed scatter (1/n) sum (x - m)(x - m)^H over the selected columns.
ComplexMat member_covariance(const ComplexMat &samples, const std::vector<int> &labels, int cluster,
                             const ComplexVec &center, Index &count);

} // namespace mfa::detail
