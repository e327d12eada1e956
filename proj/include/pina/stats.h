// Copyright 2026 The PINA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PINA_STATS_H_
#define PINA_STATS_H_

#include <cstddef>
#include <span>
#include <vector>

#include "pina/numeric.h"

namespace pina {

inline constexpr std::size_t kShapiroMinN = 3;
inline constexpr std::size_t kShapiroMaxN = 5000;

struct NormalityReport {
  double w = 1.0;
  std::size_t n = 0;
  bool subsampled = false;
};

// Shapiro-Wilk coefficients a_1..a_{n/2} for the upper half of the order
// statistics (Royston 1995, AS R94): normalized Blom scores with polynomial
// corrections to the two most extreme coefficients. The full antisymmetric
// vector has unit norm.
std::vector<double> ShapiroCoefficients(std::size_t n);

// Shapiro-Wilk W. Requires 3 <= n <= 5000; throws std::invalid_argument
// otherwise and std::domain_error for a constant sample.
NormalityReport ShapiroW(std::span<const double> sample);

// All coordinates when v.size() <= cap, otherwise `cap` distinct coordinates
// chosen uniformly from `stream` (kept in index order).
std::vector<double> CoordinateSubsample(const ParamVector& v, std::size_t cap,
                                        RngStream& stream);

}  // namespace pina

#endif  // PINA_STATS_H_
