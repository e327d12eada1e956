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

#include "pina/privacy.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "boost/multiprecision/cpp_bin_float.hpp"
#include "gtest/gtest.h"

namespace pina {
namespace {

using Big = boost::multiprecision::cpp_bin_float_50;

// Binomial-expansion bound evaluated directly (no log domain) with 50
// significant digits: log(sum_i C(a,i) q^i (1-q)^(a-i) e^((i^2-i)/(2z^2)))
// / (a - 1).
double SubsampledRdpOracle(double z, double q, int alpha) {
  const Big bq(q);
  const Big b1mq = Big(1) - bq;
  const Big two_z2 = Big(2) * Big(z) * Big(z);
  Big sum = 0;
  Big binom = 1;
  for (int i = 0; i <= alpha; ++i) {
    if (i > 0) binom = binom * Big(alpha - i + 1) / Big(i);
    sum += binom * boost::multiprecision::pow(bq, i) *
           boost::multiprecision::pow(b1mq, alpha - i) *
           boost::multiprecision::exp(Big(i * i - i) / two_z2);
  }
  return static_cast<double>(boost::multiprecision::log(sum) /
                             Big(alpha - 1));
}

// Single-release Gaussian mechanism converted with the continuous order:
// min over alpha > 1 of alpha/(2z^2) + log((a-1)/a) - (log a + log d)/(a-1).
double ContinuousOrderEpsilon(double z, double delta) {
  auto eps = [&](double a) {
    return a / (2.0 * z * z) + std::log((a - 1.0) / a) -
           (std::log(a) + std::log(delta)) / (a - 1.0);
  };
  // The objective is unimodal in log(a - 1); golden-section search there.
  double lo = std::log(1e-6);
  double hi = std::log(1e6);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 200; ++it) {
    const double m1 = hi - g * (hi - lo);
    const double m2 = lo + g * (hi - lo);
    if (eps(1.0 + std::exp(m1)) < eps(1.0 + std::exp(m2))) {
      hi = m2;
    } else {
      lo = m1;
    }
  }
  return eps(1.0 + std::exp(0.5 * (lo + hi)));
}

double ContinuousOrderCalibration(double epsilon, double delta) {
  double lo = 0.01;
  double hi = 100.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (ContinuousOrderEpsilon(mid, delta) > epsilon) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

// Asymptotic two-sample Kolmogorov-Smirnov p-value.
double KsPValue(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() -
                             static_cast<double>(j) / b.size()));
  }
  const double ne = static_cast<double>(a.size()) * b.size() /
                    static_cast<double>(a.size() + b.size());
  const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) {
    p += 2.0 * ((k % 2 == 1) ? 1.0 : -1.0) *
         std::exp(-2.0 * k * k * lambda * lambda);
  }
  return std::clamp(p, 0.0, 1.0);
}

double SampleVariance(std::span<const double> v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

TEST(GaussianRdpTest, Examples) {
  EXPECT_DOUBLE_EQ(GaussianRdp(1.0, 2.0), 1.0);
  EXPECT_DOUBLE_EQ(GaussianRdp(2.0, 9.0), 1.125);
  for (double a : {1.5, 3.0, 40.0}) {
    EXPECT_DOUBLE_EQ(GaussianRdp(3.0, a), GaussianRdp(1.0, a) / 9.0);
  }
  EXPECT_THROW(GaussianRdp(1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(GaussianRdp(0.0, 2.0), std::invalid_argument);
}

TEST(SubsampledRdpTest, FullSamplingIsPlainGaussian) {
  for (double z : {0.5, 1.0, 2.0, 4.0}) {
    for (int a = 2; a <= 64; ++a) {
      const double expected = a / (2.0 * z * z);
      EXPECT_NEAR(SubsampledGaussianRdp(z, 1.0, a), expected, 1e-9 * expected);
    }
  }
}

TEST(SubsampledRdpTest, TinySamplingLeaksAlmostNothing) {
  EXPECT_LT(SubsampledGaussianRdp(1.0, 1e-6, 2.0), 1e-9);
  EXPECT_GE(SubsampledGaussianRdp(1.0, 1e-6, 2.0), 0.0);
}

TEST(SubsampledRdpTest, MatchesFiftyDigitOracle) {
  const double value = SubsampledGaussianRdp(1.0, 0.01, 16.0);
  const double oracle = SubsampledRdpOracle(1.0, 0.01, 16);
  EXPECT_NEAR(value, oracle, 1e-8 * oracle);
  for (double z : {0.7, 1.3, 3.0}) {
    for (double q : {0.001, 0.05, 0.3}) {
      for (int a : {2, 5, 32, 128}) {
        const double o = SubsampledRdpOracle(z, q, a);
        EXPECT_NEAR(SubsampledGaussianRdp(z, q, a), o, 1e-8 * o)
            << "z=" << z << " q=" << q << " alpha=" << a;
      }
    }
  }
}

TEST(SubsampledRdpTest, FiniteInOverflowRegime) {
  // e^((a^2 - a) / (2 z^2)) overflows a double by hundreds of orders.
  const double v = SubsampledGaussianRdp(0.3, 0.5, 256.0);
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_NEAR(v, SubsampledRdpOracle(0.3, 0.5, 256), 1e-8 * v);
}

TEST(SubsampledRdpTest, FractionalOrderIsBetweenNeighbours) {
  const double v = SubsampledGaussianRdp(1.0, 0.1, 1.5);
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_GE(v, 0.0);
  EXPECT_LE(v, SubsampledGaussianRdp(1.0, 0.1, 2.0));
}

TEST(SubsampledRdpProperty, MonotoneInRateAndNoise) {
  const std::vector<double> qs = {0.001, 0.01, 0.05, 0.1, 0.3, 0.7, 1.0};
  const std::vector<double> zs = {0.5, 0.8, 1.0, 2.0, 4.0};
  for (int a : {2, 8, 32, 100}) {
    for (double z : zs) {
      for (std::size_t i = 1; i < qs.size(); ++i) {
        EXPECT_LE(SubsampledGaussianRdp(z, qs[i - 1], a),
                  SubsampledGaussianRdp(z, qs[i], a) * (1 + 1e-12));
      }
    }
    for (double q : qs) {
      for (std::size_t i = 1; i < zs.size(); ++i) {
        EXPECT_GE(SubsampledGaussianRdp(zs[i - 1], q, a) * (1 + 1e-12),
                  SubsampledGaussianRdp(zs[i], q, a));
      }
    }
  }
}

TEST(SubsampledRdpProperty, NonDecreasingInOrder) {
  const std::vector<double> orders = DefaultOrders();
  const RdpCurve curve = SubsampledGaussianCurve(1.1, 0.1, orders);
  for (std::size_t i = 1; i < curve.size(); ++i) {
    EXPECT_LE(curve[i - 1].rdp, curve[i].rdp * (1 + 1e-12));
  }
}

TEST(RdpToDpTest, SinglePointHandValue) {
  const RdpCurve curve = {{10.0, 1.0}};
  const double eps = RdpToDp(curve, 1e-5);
  const double direct =
      1.0 + std::log(0.9) - (std::log(10.0) + std::log(1e-5)) / 9.0;
  EXPECT_NEAR(eps, 1.918011, 1e-4);
  EXPECT_NEAR(eps, direct, 1e-12);
}

TEST(RdpToDpTest, MinimumOverPointsAndDominatedPoints) {
  const RdpCurve one = {{10.0, 1.0}};
  const RdpCurve two = {{10.0, 1.0}, {20.0, 5.0}};
  EXPECT_EQ(RdpToDp(two, 1e-5), RdpToDp(one, 1e-5));
  const RdpCurve better = {{10.0, 1.0}, {32.0, 0.5}};
  EXPECT_LT(RdpToDp(better, 1e-5), RdpToDp(one, 1e-5));
  EXPECT_EQ(ConvertRdpToDp(better, 1e-5).order, 32.0);
}

TEST(RdpToDpTest, NonIncreasingInDelta) {
  const RdpCurve curve =
      SubsampledGaussianCurve(1.0, 0.05, DefaultOrders());
  EXPECT_GE(RdpToDp(Compose(curve, 100), 1e-5),
            RdpToDp(Compose(curve, 100), 1e-3));
}

TEST(RdpToDpTest, RejectsEmptyCurveAndBadDelta) {
  EXPECT_THROW(RdpToDp({}, 1e-5), std::invalid_argument);
  EXPECT_THROW(RdpToDp({{2.0, 1.0}}, 0.0), std::invalid_argument);
  EXPECT_THROW(RdpToDp({{2.0, 1.0}}, 1.0), std::invalid_argument);
}

TEST(ComposeTest, ScalesPointwise) {
  const RdpCurve c = GaussianCurve(1.0, DefaultOrders());
  for (const auto& p : Compose(c, 0)) EXPECT_EQ(p.rdp, 0.0);
  const RdpCurve once = Compose(c, 1);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_EQ(once[i].rdp, c[i].rdp);
  const RdpCurve a = Compose(Compose(c, 2), 3);
  const RdpCurve b = Compose(c, 6);
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_NEAR(a[i].rdp, b[i].rdp, 1e-15 * b[i].rdp);
  }
  EXPECT_THROW(Compose(c, -1), std::invalid_argument);
}

TEST(CombineTest, AddsAndChecksGrid) {
  const RdpCurve c = GaussianCurve(1.0, DefaultOrders());
  const RdpCurve sum = Combine(c, c);
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(sum[i].rdp, 2.0 * c[i].rdp);
  }
  EXPECT_THROW(Combine(c, {{2.0, 1.0}}), std::invalid_argument);
}

TEST(CalibrationTest, RoundTripStaysWithinBudget) {
  for (double eps : {0.5, 2.0, 8.0}) {
    for (double q : {0.01, 0.1, 1.0}) {
      for (int rounds : {1, 30, 200}) {
        CalibrationTarget t;
        t.epsilon = eps;
        t.delta = 1e-5;
        t.q = q;
        t.rounds = rounds;
        const double z = CalibrateNoiseMultiplier(t);
        const double spent = SpentEpsilon(t, z);
        EXPECT_LE(spent, eps);
        EXPECT_GE(spent, eps * (1 - 1e-3))
            << "eps=" << eps << " q=" << q << " T=" << rounds;
      }
    }
  }
}

TEST(CalibrationTest, MoreRoundsNeverNeedLessNoise) {
  CalibrationTarget t;
  t.epsilon = 2.0;
  t.q = 0.05;
  double previous = 0.0;
  for (int rounds : {1, 2, 4, 8, 16, 32, 64, 128, 256}) {
    t.rounds = rounds;
    const double z = CalibrateNoiseMultiplier(t);
    EXPECT_GE(z, previous);
    previous = z;
  }
}

TEST(CalibrationTest, SingleShotMatchesContinuousOrderOracle) {
  CalibrationTarget t;
  t.epsilon = 2.0;
  t.delta = 1e-5;
  t.q = 1.0;
  t.rounds = 1;
  const double z = CalibrateNoiseMultiplier(t);
  const double oracle = ContinuousOrderCalibration(2.0, 1e-5);
  EXPECT_NEAR(z, oracle, 0.005 * oracle);
}

TEST(CalibrationTest, StageOneReleasesCountAsFullGaussian) {
  CalibrationTarget t;
  t.epsilon = 2.0;
  t.q = 1.0;
  t.rounds = 1;
  const double z_round = CalibrateNoiseMultiplier(t);
  t.rounds = 0;
  t.stage1_participations = 1;
  EXPECT_DOUBLE_EQ(CalibrateNoiseMultiplier(t), z_round);
}

TEST(CalibrationTest, InfeasibleAndInvalidTargets) {
  CalibrationTarget t;
  t.epsilon = 1e-6;
  t.q = 1.0;
  t.rounds = 100000;
  EXPECT_THROW(CalibrateNoiseMultiplier(t), std::runtime_error);
  t.epsilon = -1.0;
  EXPECT_THROW(CalibrateNoiseMultiplier(t), std::invalid_argument);
  t.epsilon = 1.0;
  t.rounds = 0;
  EXPECT_THROW(CalibrateNoiseMultiplier(t), std::invalid_argument);
}

TEST(SpentBudgetTest, ZeroReleasesCostNothing) {
  PrivacySpec spec;
  EXPECT_EQ(SpentBudget(spec, 0, 0), 0.0);
  spec.noise_multiplier = 0.0;
  EXPECT_EQ(SpentBudget(spec, 0, 0), 0.0);
  EXPECT_TRUE(std::isinf(SpentBudget(spec, 0, 1)));
}

TEST(SpentBudgetTest, MonotoneInEachCount) {
  PrivacySpec spec;
  spec.noise_multiplier = 1.2;
  spec.q = 0.1;
  for (int p1 = 0; p1 < 3; ++p1) {
    double previous = -1.0;
    for (int r = 0; r <= 40; r += 5) {
      const double eps = SpentBudget(spec, p1, r);
      EXPECT_GE(eps, previous);
      EXPECT_LE(eps, SpentBudget(spec, p1 + 1, r));
      previous = eps;
    }
  }
}

TEST(SpentBudgetTest, StageTwoOnlyReproducesCalibratedTarget) {
  CalibrationTarget t;
  t.epsilon = 4.0;
  t.delta = 1e-5;
  t.q = 0.1;
  t.rounds = 50;
  PrivacySpec spec;
  spec.delta = t.delta;
  spec.q = t.q;
  spec.noise_multiplier = CalibrateNoiseMultiplier(t);
  EXPECT_NEAR(SpentBudget(spec, 0, 50), 4.0, 4e-3);
}

TEST(PrivacySpecTest, DefaultDelta) {
  EXPECT_NEAR(PrivacySpec::DefaultDelta(200), std::pow(200.0, -1.1), 1e-18);
  EXPECT_NEAR(PrivacySpec::DefaultDelta(200), 0.0029435, 1e-7);
}

TEST(LocalDpTest, NoiselessIsClip) {
  const ParamVector d = ParamVector::FromValues({3, 4});
  RngStream rng(1, {StreamKind::kClientNoise, 0, 0});
  EXPECT_EQ(LocalDp(d, 0.0, 2.5, rng), Clip(d, 2.5));
  EXPECT_THROW(LocalDp(d, -1.0, 1.0, rng), std::invalid_argument);
}

TEST(LocalDpTest, NoiseVarianceIsZSSquared) {
  const ParamVector zero = ParamVector::Zeros(Layout::Flat(1000000));
  RngStream rng(2, {StreamKind::kClientNoise, 0, 0});
  const ParamVector out = LocalDp(zero, 1.0, 1.0, rng);
  EXPECT_NEAR(SampleVariance(out.values()), 1.0, 0.01);
}

TEST(LocalDpTest, SameStreamNoiseRecoversClip) {
  RngStream data_rng(3, {StreamKind::kTest, 0, 0});
  const ParamVector d = GaussianNoise(data_rng, 50, 2.0);
  const StreamId id{StreamKind::kClientNoise, 4, 7};
  RngStream a(3, id);
  RngStream b(3, id);
  const ParamVector out = LocalDp(d, 0.8, 1.5, a);
  const ParamVector noise = GaussianNoise(b, d.shared_layout(), 0.8 * 1.5);
  const ParamVector clipped = Clip(d, 1.5);
  EXPECT_EQ(out, Add(clipped, noise));
  const ParamVector recovered = Subtract(out, noise);
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_NEAR(recovered[i], clipped[i], 1e-15);
  }
}

std::vector<RngStream> ClientStreams(std::uint64_t seed, std::size_t k,
                                     std::uint64_t round = 0) {
  std::vector<RngStream> streams;
  for (std::size_t i = 0; i < k; ++i) {
    streams.emplace_back(seed, StreamId{StreamKind::kClientNoise, i, round});
  }
  return streams;
}

TEST(SecureSumTest, OneNoiselessClientIsClip) {
  const std::vector<ParamVector> d = {ParamVector::FromValues({3, 4})};
  auto streams = ClientStreams(1, 1);
  EXPECT_EQ(SecureSumDp(d, 0.0, 2.5, streams), Clip(d[0], 2.5));
}

TEST(SecureSumTest, NoiselessSumOfClips) {
  const std::vector<ParamVector> d = {ParamVector::FromValues({3, 4}),
                                      ParamVector::FromValues({0.1, 0.2}),
                                      ParamVector::FromValues({-6, 0})};
  auto streams = ClientStreams(1, 3);
  const ParamVector out = SecureSumDp(d, 0.0, 1.0, streams);
  EXPECT_NEAR(out[0], 0.6 + 0.1 - 1.0, 1e-15);
  EXPECT_NEAR(out[1], 0.8 + 0.2, 1e-15);
}

TEST(SecureSumTest, TotalNoiseVarianceIndependentOfClientCount) {
  const std::size_t trials = 100000;
  for (std::size_t k : {5u, 50u}) {
    std::vector<ParamVector> d(k, ParamVector::Zeros(Layout::Flat(trials)));
    auto streams = ClientStreams(7, k);
    const double z = 1.3;
    const double s = 0.7;
    const ParamVector out = SecureSumDp(d, z, s, streams);
    const double expected = (z * s) * (z * s);
    EXPECT_NEAR(SampleVariance(out.values()), expected, 0.02 * expected)
        << "K=" << k;
  }
}

TEST(SecureSumTest, PermutationExactWithPairedStreams) {
  RngStream data_rng(8, {StreamKind::kTest, 0, 0});
  const std::size_t k = 9;
  std::vector<ParamVector> d;
  for (std::size_t i = 0; i < k; ++i) d.push_back(GaussianNoise(data_rng, 30, 1.0));
  auto streams = ClientStreams(8, k);
  const ParamVector forward = SecureSumDp(d, 1.0, 1.0, streams);

  std::vector<std::size_t> perm(k);
  for (std::size_t i = 0; i < k; ++i) perm[i] = (i * 4 + 3) % k;
  std::vector<ParamVector> shuffled;
  std::vector<RngStream> shuffled_streams;
  for (std::size_t i : perm) {
    shuffled.push_back(d[i]);
    shuffled_streams.emplace_back(8, StreamId{StreamKind::kClientNoise, i, 0});
  }
  EXPECT_EQ(SecureSumDp(shuffled, 1.0, 1.0, shuffled_streams), forward);
}

TEST(SecureSumTest, DistributedMatchesCentralNoise) {
  const std::size_t trials = 10000;
  const std::size_t k = 10;
  const double z = 1.0;
  const double s = 1.0;
  std::vector<ParamVector> d(k, ParamVector::Zeros(Layout::Flat(trials)));
  auto streams = ClientStreams(9, k);
  const ParamVector distributed = SecureSumDp(d, z, s, streams);
  RngStream central_rng(9, {StreamKind::kTest, 1, 0});
  const ParamVector central = GaussianNoise(central_rng, trials, z * s);
  const std::vector<double> a(distributed.values().begin(),
                              distributed.values().end());
  const std::vector<double> b(central.values().begin(), central.values().end());
  EXPECT_GT(KsPValue(a, b), 0.01);
}

TEST(SecureSumTest, EmptyAndMismatchedInputsThrow) {
  std::vector<RngStream> none;
  EXPECT_THROW(SecureSumDp({}, 1.0, 1.0, none), std::invalid_argument);
  const std::vector<ParamVector> d = {ParamVector::FromValues({1.0})};
  EXPECT_THROW(SecureSumDp(d, 1.0, 1.0, none), std::invalid_argument);
}

TEST(SecureSumChannelTest, ExposesOnlyTheReleasedSum) {
  static_assert(!std::is_copy_constructible_v<SecureSumChannel>);
  static_assert(!std::is_copy_assignable_v<SecureSumChannel>);
  auto layout = std::make_shared<const Layout>(Layout::Flat(2));
  SecureSumChannel channel(layout, 1.0, 0.0, 2);
  RngStream rng(1, {StreamKind::kClientNoise, 0, 0});
  channel.Contribute(0, ParamVector(layout, {0.5, 0.0}), rng);
  EXPECT_THROW(channel.Contribute(0, ParamVector(layout, {0.5, 0.0}), rng),
               std::logic_error);
  EXPECT_THROW(channel.Release(), std::logic_error);
  EXPECT_THROW(channel.Contribute(2, ParamVector(layout, {0.5, 0.0}), rng),
               std::out_of_range);
  EXPECT_THROW(channel.Contribute(1, ParamVector::FromValues({1, 2, 3}), rng),
               std::invalid_argument);
  channel.Contribute(1, ParamVector(layout, {0.0, 2.0}), rng);
  const ParamVector sum = channel.Release();
  EXPECT_DOUBLE_EQ(sum[0], 0.5);
  EXPECT_DOUBLE_EQ(sum[1], 1.0);
  EXPECT_THROW(channel.Release(), std::logic_error);
}

}  // namespace
}  // namespace pina
