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

#include "pina/stats.h"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

namespace pina {
namespace {

// Polynomials in 1/sqrt(n) correcting a_n and a_{n-1} (AS R94).
constexpr double kC1[] = {0.0, 0.221157, -0.147981, -2.071190, 4.434685,
                          -2.706056};
constexpr double kC2[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633,
                          -3.582633};

double Poly(std::span<const double> c, double x) {
  double result = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) result = result * x + *it;
  return result;
}

}  // namespace

std::vector<double> ShapiroCoefficients(std::size_t n) {
  if (n < kShapiroMinN || n > kShapiroMaxN) {
    throw std::invalid_argument("Shapiro-Wilk requires 3 <= n <= 5000");
  }
  const std::size_t half = n / 2;
  std::vector<double> a(half);
  if (n == 3) {
    a[0] = std::sqrt(0.5);
    return a;
  }
  const boost::math::normal_distribution<double> normal;
  const double an = static_cast<double>(n);
  // m[i] is the Blom score of the (i+1)-th smallest order statistic, so it
  // is negative; the upper-half coefficients are -m[i] after scaling.
  std::vector<double> m(half);
  double summ2 = 0.0;
  for (std::size_t i = 0; i < half; ++i) {
    m[i] = boost::math::quantile(normal, (i + 1 - 0.375) / (an + 0.25));
    summ2 += m[i] * m[i];
  }
  summ2 *= 2.0;
  const double ssumm2 = std::sqrt(summ2);
  const double rsn = 1.0 / std::sqrt(an);
  const double a1 = Poly(kC1, rsn) - m[0] / ssumm2;

  std::size_t first_plain;
  double fac;
  if (n > 5) {
    first_plain = 2;
    const double a2 = -m[1] / ssumm2 + Poly(kC2, rsn);
    fac = std::sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) /
                    (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
    a[1] = a2;
  } else {
    first_plain = 1;
    fac = std::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1));
  }
  a[0] = a1;
  for (std::size_t i = first_plain; i < half; ++i) a[i] = -m[i] / fac;
  return a;
}

NormalityReport ShapiroW(std::span<const double> sample) {
  const std::size_t n = sample.size();
  if (n < kShapiroMinN || n > kShapiroMaxN) {
    throw std::invalid_argument("Shapiro-Wilk requires 3 <= n <= 5000");
  }
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  if (x.front() == x.back()) {
    throw std::domain_error("Shapiro-Wilk: zero-variance sample");
  }
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  if (!(ss > 0.0)) throw std::domain_error("Shapiro-Wilk: zero-variance sample");

  const std::vector<double> a = ShapiroCoefficients(n);
  double numer = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    numer += a[i] * (x[n - 1 - i] - x[i]);
  }
  NormalityReport report;
  report.n = n;
  report.w = std::min(1.0, numer * numer / ss);
  return report;
}

std::vector<double> CoordinateSubsample(const ParamVector& v, std::size_t cap,
                                        RngStream& stream) {
  if (cap < kShapiroMinN) {
    throw std::invalid_argument("CoordinateSubsample: cap must be >= 3");
  }
  auto values = v.values();
  if (values.size() <= cap) return {values.begin(), values.end()};
  std::vector<double> out;
  out.reserve(cap);
  std::sample(values.begin(), values.end(), std::back_inserter(out), cap,
              stream.engine());
  return out;
}

}  // namespace pina
