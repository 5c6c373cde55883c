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

#include <vector>

namespace mfa
{

// Least squares with an identity pilot: h_hat = y.
ComplexVec ls_estimate(const ComplexVec &y);

// Oversampled 2D DFT dictionary matched to a Nv x Nh array.
struct Dictionary
{
    ComplexMat atoms; // N x M, unit-norm columns
    int Nv = 1;
    int Nh = 1;
    int oversampling_v = 1;
    int oversampling_h = 1;

    Index dim() const { return atoms.rows(); }
    Index size() const { return atoms.cols(); }
};

// Kronecker product of an (oversampling_v * Nv)-point grid over the vertical
// axis and an (oversampling_h * Nh)-point grid over the horizontal axis.
// Atom (gv, gh) sits at column gv * (oversampling_h * Nh) + gh. An axis with
// a single element is not oversampled.
Dictionary build_dft_dictionary(int Nv, int Nh, int oversampling_v = 2, int oversampling_h = 2);

struct SparseCode
{
    std::vector<Index> support;     // selected atoms in selection order
    ComplexVec coefficients;        // least-squares weights on the support
    ComplexVec estimate;            // dictionary * coefficients
    std::vector<double> residual_norms; // ||y - estimate|| after each selection
    // Least-squares estimate on the first s selected atoms, s = 1..support.size().
    std::vector<ComplexVec> prefix_estimates;

    // Coefficients scattered into a length-M vector.
    ComplexVec dense_coefficients(Index M) const;
};

// Orthogonal matching pursuit to the given depth. Stops early when the next
// atom is numerically dependent on the selected set or y is already
// represented exactly (zero y gives an empty support).
SparseCode omp(const ComplexVec &y, const Dictionary &dict, int sparsity);

// One OMP pass to depth s_max; returns the prefix estimate closest to h_true.
// chosen_depth, when given, receives the selected prefix length.
ComplexVec genie_omp(const ComplexVec &y, const Dictionary &dict, const ComplexVec &h_true, int s_max,
                     int *chosen_depth = nullptr);

// C = (1/T) sum_t h_t h_t^H (no mean removal).
struct SampleCovariance
{
    ComplexMat matrix;
};

SampleCovariance fit_sample_lmmse(const ChannelDataset &dataset);

// C (C + sigma2 I)^-1, precomputed per noise level.
ComplexMat lmmse_filter(const SampleCovariance &cov, NoiseLevel noise);

// C (C + sigma2 I)^-1 y.
ComplexVec apply(const SampleCovariance &cov, NoiseLevel noise, const ComplexVec &y);

} // namespace mfa
