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

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace mfa
{

using Index = Eigen::Index;
using Complex = std::complex<double>;
using ComplexVec = Eigen::VectorXcd;
using ComplexMat = Eigen::MatrixXcd;
using RealVec = Eigen::VectorXd;
using RealMat = Eigen::MatrixXd;

// All randomness flows through caller-owned engines of this type.
using Rng = std::mt19937_64;

// Variance of the additive circularly-symmetric white noise, linear power units.
struct NoiseLevel
{
    double sigma2 = 0.0;

    // SNR is defined as 1/sigma2 under the normalization E||h||^2 = N.
    static NoiseLevel from_snr_db(double snr_db);
    double snr_db() const;
};

// A factorization was refused because the system is too ill-conditioned.
// component is the mixture component index, or -1 when not applicable.
class ConditioningError : public std::runtime_error
{
  public:
    ConditioningError(const std::string &what, int component, double condition);

    int component() const noexcept { return component_; }
    double condition() const noexcept { return condition_; }

  private:
    int component_;
    double condition_;
};

// Malformed binary file. offset is the byte position at which parsing failed.
class FormatError : public std::runtime_error
{
  public:
    FormatError(const std::string &what, std::uint64_t offset);

    std::uint64_t offset() const noexcept { return offset_; }

  private:
    std::uint64_t offset_;
};

// Rejects vectors containing NaN or infinite entries.
void require_finite(const ComplexVec &x, const char *what);

} // namespace mfa
