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
#include <set>
#include <stdexcept>
#include <vector>

#include "gtest/gtest.h"

namespace pina {
namespace {

std::vector<double> NormalSample(std::uint64_t seed, std::size_t n) {
  RngStream rng(seed, {StreamKind::kTest, 0, 0});
  std::vector<double> x(n);
  for (double& v : x) v = rng.Gaussian();
  return x;
}

std::vector<double> BimodalSample(std::uint64_t seed, std::size_t n) {
  RngStream rng(seed, {StreamKind::kTest, 1, 0});
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = (i % 2 == 0 ? 5.0 : -5.0) + 0.01 * rng.Gaussian();
  }
  return x;
}

// Published exact Shapiro-Wilk coefficients a_1..a_{n/2} (4 decimals).
const std::vector<std::vector<double>>& TabulatedCoefficients() {
  static const std::vector<std::vector<double>> table = {
      {0.6872, 0.1677},
      {0.6646, 0.2413},
      {0.6431, 0.2806, 0.0875},
      {0.6233, 0.3031, 0.1401},
      {0.6052, 0.3164, 0.1743, 0.0561},
      {0.5888, 0.3244, 0.1976, 0.0947},
      {0.5739, 0.3291, 0.2141, 0.1224, 0.0399},
  };
  return table;
}

// W from the tabulated coefficients, for 4 <= n <= 10.
double TableW(std::vector<double> x) {
  const std::size_t n = x.size();
  std::sort(x.begin(), x.end());
  const std::vector<double>& a = TabulatedCoefficients()[n - 4];
  double num = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) num += a[i] * (x[n - 1 - i] - x[i]);
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double den = 0.0;
  for (double v : x) den += (v - mean) * (v - mean);
  return num * num / den;
}

TEST(ShapiroCoefficientsTest, ThreePointsAreExact) {
  const std::vector<double> a = ShapiroCoefficients(3);
  ASSERT_EQ(a.size(), 1u);
  EXPECT_NEAR(a[0], std::sqrt(0.5), 1e-15);
}

TEST(ShapiroCoefficientsTest, UnitNormAndDecreasing) {
  for (std::size_t n : {4u, 5u, 6u, 11u, 20u, 100u, 1000u, 5000u}) {
    const std::vector<double> a = ShapiroCoefficients(n);
    ASSERT_EQ(a.size(), n / 2);
    double norm = 0.0;
    for (double v : a) norm += 2.0 * v * v;
    EXPECT_NEAR(norm, 1.0, 1e-12) << n;
    for (std::size_t i = 1; i < a.size(); ++i) EXPECT_GT(a[i - 1], a[i]);
  }
}

TEST(ShapiroWTest, ThreeEvenlySpacedPointsGiveOne) {
  const std::vector<double> x = {-1.0, 0.0, 1.0};
  const NormalityReport r = ShapiroW(x);
  EXPECT_NEAR(r.w, 1.0, 1e-9);
  EXPECT_EQ(r.n, 3u);
}

TEST(ShapiroWTest, MatchesReferenceImplementation) {
  // Values from an independent AS R94 implementation (scipy.stats.shapiro).
  struct Case {
    std::vector<double> x;
    double w;
  };
  const std::vector<Case> cases = {
      {{148, 154, 158, 160, 161, 162, 166, 170, 182, 195, 236},
       0.7888146948631716},
      {{2.0, 3.5, 1.0, 7.25, 4.0, 4.5, 0.5, 9.0}, 0.9386929291221583},
      {{-1.3, 0.2, 0.8, 1.1, -0.4, 2.9, 0.05, -2.2, 1.7, 0.6, -0.9,
        3.3, -0.1, 0.45, 1.25, -1.05, 0.3, 0.7, -0.6, 2.2, 5.0},
       0.9577275135503107},
  };
  for (const auto& c : cases) {
    EXPECT_NEAR(ShapiroW(c.x).w, c.w, 1e-5);
  }
}

TEST(ShapiroWTest, NormalSamplesLookNormal) {
  int passes = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    if (ShapiroW(NormalSample(seed, 500)).w > 0.98) ++passes;
  }
  EXPECT_GE(passes, 18);
}

TEST(ShapiroWTest, BimodalSamplesDoNot) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    EXPECT_LT(ShapiroW(BimodalSample(seed, 500)).w, 0.9);
  }
}

TEST(ShapiroWTest, RejectsOutOfRangeAndConstantSamples) {
  EXPECT_THROW(ShapiroW(std::vector<double>{1.0, 2.0}), std::invalid_argument);
  EXPECT_THROW(ShapiroW(std::vector<double>(5001, 0.0)),
               std::invalid_argument);
  EXPECT_THROW(ShapiroW(std::vector<double>{2.0, 2.0, 2.0, 2.0}),
               std::domain_error);
}

TEST(ShapiroWProperty, AffineInvariantAndBounded) {
  RngStream rng(3, {StreamKind::kTest, 2, 0});
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + static_cast<std::size_t>(rng.Uniform() * 300);
    std::vector<double> x(n);
    // Mixture of shapes: normal, exponential, uniform.
    const int shape = trial % 3;
    for (double& v : x) {
      const double g = rng.Gaussian();
      const double u = rng.Uniform();
      v = shape == 0 ? g : shape == 1 ? -std::log(1.0 - u) : u;
    }
    const double w = ShapiroW(x).w;
    EXPECT_GT(w, 0.0);
    EXPECT_LE(w, 1.0 + 1e-9);
    double alpha = 0.1 + 10.0 * rng.Uniform();
    if (trial % 2 == 1) alpha = -alpha;
    const double beta = 100.0 * rng.Gaussian();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = alpha * x[i] + beta;
    EXPECT_NEAR(ShapiroW(y).w, w, 1e-9);
  }
}

TEST(ShapiroWProperty, MaximalWhenSortedSampleFollowsCoefficients) {
  for (std::size_t n : {5u, 8u, 13u}) {
    const std::vector<double> half = ShapiroCoefficients(n);
    std::vector<double> x(n, 0.0);
    for (std::size_t i = 0; i < half.size(); ++i) {
      x[n - 1 - i] = half[i];
      x[i] = -half[i];
    }
    EXPECT_NEAR(ShapiroW(x).w, 1.0, 1e-12);
  }
}

TEST(ShapiroWOracle, CoefficientsMatchTheExactTable) {
  for (std::size_t n = 4; n <= 10; ++n) {
    const std::vector<double> a = ShapiroCoefficients(n);
    const std::vector<double>& want = TabulatedCoefficients()[n - 4];
    ASSERT_EQ(a.size(), n / 2);
    for (std::size_t i = 0; i < want.size(); ++i) {
      EXPECT_NEAR(a[i], want[i], 2e-3) << "n=" << n << " i=" << i;
    }
  }
}

TEST(ShapiroWOracle, AgreesWithTableCoefficients) {
  RngStream rng(4, {StreamKind::kTest, 3, 0});
  for (std::size_t n = 4; n <= 10; ++n) {
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> x(n);
      for (double& v : x) v = rng.Gaussian();
      const double oracle = TableW(x);
      EXPECT_NEAR(ShapiroW(x).w, oracle, 0.01 * oracle) << "n=" << n;
    }
  }
}

TEST(CoordinateSubsampleTest, SmallVectorsAreReturnedWhole) {
  RngStream rng(5, {StreamKind::kSubsample, 0, 0});
  const ParamVector v = GaussianNoise(rng, 100, 1.0);
  const std::vector<double> out = CoordinateSubsample(v, 5000, rng);
  EXPECT_TRUE(std::equal(out.begin(), out.end(), v.values().begin(),
                         v.values().end()));
}

TEST(CoordinateSubsampleTest, LargeVectorsGiveDistinctCoordinates) {
  std::vector<double> values(10000);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = i;
  const ParamVector v = ParamVector::FromValues(values);
  RngStream a(6, {StreamKind::kSubsample, 1, 3});
  RngStream b(6, {StreamKind::kSubsample, 1, 3});
  const std::vector<double> first = CoordinateSubsample(v, 5000, a);
  const std::vector<double> second = CoordinateSubsample(v, 5000, b);
  EXPECT_EQ(first.size(), 5000u);
  EXPECT_EQ(std::set<double>(first.begin(), first.end()).size(), 5000u);
  EXPECT_TRUE(std::is_sorted(first.begin(), first.end()));
  EXPECT_EQ(first, second);
}

}  // namespace
}  // namespace pina
