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

#include "mfa/types.hpp"

#include <cmath>

namespace mfa
{

NoiseLevel NoiseLevel::from_snr_db(double snr_db)
{
    return NoiseLevel{std::pow(10.0, -snr_db / 10.0)};
}

double NoiseLevel::snr_db() const
{
    return -10.0 * std::log10(sigma2);
}

ConditioningError::ConditioningError(const std::string &what, int component, double condition)
    : std::runtime_error(component >= 0 ? what + " (component " + std::to_string(component) + ")" : what),
      component_(component), condition_(condition)
{
}

FormatError::FormatError(const std::string &what, std::uint64_t offset)
    : std::runtime_error(what + " at byte offset " + std::to_string(offset)), offset_(offset)
{
}

void require_finite(const ComplexVec &x, const char *what)
{
    if (!x.allFinite())
        throw std::invalid_argument(std::string(what) + " contains non-finite entries");
}

} // namespace mfa
