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
#include <string>

namespace pina {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Relative width of the final bisection bracket in CalibrateNoiseMultiplier.
constexpr double kCalibrationBracket = 1e-6;

double LogAdd(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// log(exp(a) - exp(b)) for a >= b.
double LogSub(double a, double b) {
  if (b == kNegInf) return a;
  if (a < b) throw std::domain_error("LogSub: negative result");
  if (a == b) return kNegInf;
  return std::log(std::expm1(a - b)) + b;
}

double LogErfc(double x) {
  if (x < 25.0) return std::log(std::erfc(x));
  // Asymptotic expansion; erfc underflows long before the series degrades.
  const double x2 = x * x;
  const double series = 1.0 - 1.0 / (2.0 * x2) + 3.0 / (4.0 * x2 * x2) -
                        15.0 / (8.0 * x2 * x2 * x2);
  return -x2 - std::log(x) - 0.5 * std::log(M_PI) + std::log(series);
}

bool IsInteger(double alpha) { return alpha == std::floor(alpha); }

// log A_alpha for integer alpha: log sum_i C(a,i) q^i (1-q)^(a-i)
// exp((i^2 - i) / (2 z^2)).
double LogAInteger(double z, double q, int alpha) {
  const double log_q = std::log(q);
  const double log_1mq = std::log1p(-q);
  const double inv_2z2 = 1.0 / (2.0 * z * z);
  double log_a = kNegInf;
  double log_binom = 0.0;
  for (int i = 0; i <= alpha; ++i) {
    if (i > 0) {
      log_binom += std::log(static_cast<double>(alpha - i + 1)) -
                   std::log(static_cast<double>(i));
    }
    const double di = i;
    const double term = log_binom + di * log_q + (alpha - di) * log_1mq +
                        (di * di - di) * inv_2z2;
    log_a = LogAdd(log_a, term);
  }
  return log_a;
}

// log A_alpha for fractional alpha, split at z0 into two tails.
double LogAFractional(double z, double q, double alpha) {
  double log_a0 = kNegInf;
  double log_a1 = kNegInf;
  const double z0 = z * z * std::log(1.0 / q - 1.0) + 0.5;
  const double log_q = std::log(q);
  const double log_1mq = std::log1p(-q);
  const double sqrt2z = std::sqrt(2.0) * z;
  // C(alpha, i) tracked as (log |C|, sign).
  double log_coef = 0.0;
  bool positive = true;
  for (int i = 0; i < 100000; ++i) {
    if (i > 0) {
      const double ratio = (alpha - (i - 1)) / static_cast<double>(i);
      log_coef += std::log(std::abs(ratio));
      if (ratio < 0) positive = !positive;
    }
    const double di = i;
    const double j = alpha - di;
    const double log_t0 = log_coef + di * log_q + j * log_1mq;
    const double log_t1 = log_coef + j * log_q + di * log_1mq;
    const double log_e0 = std::log(0.5) + LogErfc((di - z0) / sqrt2z);
    const double log_e1 = std::log(0.5) + LogErfc((z0 - j) / sqrt2z);
    const double log_s0 = log_t0 + (di * di - di) / (2.0 * z * z) + log_e0;
    const double log_s1 = log_t1 + (j * j - j) / (2.0 * z * z) + log_e1;
    if (positive) {
      log_a0 = LogAdd(log_a0, log_s0);
      log_a1 = LogAdd(log_a1, log_s1);
    } else {
      log_a0 = LogSub(log_a0, log_s0);
      log_a1 = LogSub(log_a1, log_s1);
    }
    if (std::max(log_s0, log_s1) < -30.0) break;
  }
  return LogAdd(log_a0, log_a1);
}

void CheckOrders(const RdpCurve& a, const RdpCurve& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("RdpCurve: order grids differ");
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].order != b[i].order) {
      throw std::invalid_argument("RdpCurve: order grids differ");
    }
  }
}

}  // namespace

void PrivacySpec::Validate() const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("delta must lie in (0, 1)");
  }
  if (!(q > 0.0 && q <= 1.0)) {
    throw std::invalid_argument("sampling rate must lie in (0, 1]");
  }
  if (t_in < 0 || t_tr < 0) throw std::invalid_argument("negative rounds");
  if (!(clip > 0.0) || !(clip_init > 0.0)) {
    throw std::invalid_argument("clip thresholds must be > 0");
  }
  if (!(noise_multiplier >= 0.0)) {
    throw std::invalid_argument("noise multiplier must be >= 0");
  }
}

double PrivacySpec::DefaultDelta(std::size_t num_clients) {
  return 1.0 / std::pow(static_cast<double>(num_clients), 1.1);
}

std::vector<double> DefaultOrders() {
  std::vector<double> orders{1.5};
  for (int a = 2; a <= 256; ++a) orders.push_back(a);
  return orders;
}

double GaussianRdp(double z, double alpha) {
  if (!(z > 0.0)) throw std::invalid_argument("GaussianRdp: z must be > 0");
  if (!(alpha > 1.0)) {
    throw std::invalid_argument("GaussianRdp: order must be > 1");
  }
  return alpha / (2.0 * z * z);
}

double SubsampledGaussianRdp(double z, double q, double alpha) {
  if (!(z > 0.0)) {
    throw std::invalid_argument("SubsampledGaussianRdp: z must be > 0");
  }
  if (!(q > 0.0 && q <= 1.0)) {
    throw std::invalid_argument("SubsampledGaussianRdp: q must lie in (0,1]");
  }
  if (!(alpha > 1.0)) {
    throw std::invalid_argument("SubsampledGaussianRdp: order must be > 1");
  }
  if (q == 1.0) return GaussianRdp(z, alpha);
  const double log_a = IsInteger(alpha)
                           ? LogAInteger(z, q, static_cast<int>(alpha))
                           : LogAFractional(z, q, alpha);
  return std::max(0.0, log_a / (alpha - 1.0));
}

RdpCurve GaussianCurve(double z, std::span<const double> orders) {
  RdpCurve curve;
  curve.reserve(orders.size());
  for (double a : orders) curve.push_back({a, GaussianRdp(z, a)});
  return curve;
}

RdpCurve SubsampledGaussianCurve(double z, double q,
                                 std::span<const double> orders) {
  RdpCurve curve;
  curve.reserve(orders.size());
  for (double a : orders) curve.push_back({a, SubsampledGaussianRdp(z, q, a)});
  return curve;
}

RdpCurve Compose(const RdpCurve& curve, int rounds) {
  if (rounds < 0) throw std::invalid_argument("Compose: negative rounds");
  RdpCurve out = curve;
  for (auto& p : out) p.rdp *= rounds;
  return out;
}

RdpCurve Combine(const RdpCurve& a, const RdpCurve& b) {
  CheckOrders(a, b);
  RdpCurve out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rdp += b[i].rdp;
  return out;
}

DpConversion ConvertRdpToDp(const RdpCurve& curve, double delta) {
  if (curve.empty()) throw std::invalid_argument("RdpToDp: empty curve");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("RdpToDp: delta must lie in (0, 1)");
  }
  DpConversion best{std::numeric_limits<double>::infinity(), 0.0};
  const double log_delta = std::log(delta);
  for (const auto& [a, rdp] : curve) {
    if (!(a > 1.0)) throw std::invalid_argument("RdpToDp: order must be > 1");
    const double eps = rdp + std::log((a - 1.0) / a) -
                       (std::log(a) + log_delta) / (a - 1.0);
    if (eps < best.epsilon) best = {eps, a};
  }
  best.epsilon = std::max(0.0, best.epsilon);
  return best;
}

double RdpToDp(const RdpCurve& curve, double delta) {
  return ConvertRdpToDp(curve, delta).epsilon;
}

double SpentEpsilon(const CalibrationTarget& target, double z) {
  if (target.rounds < 0 || target.stage1_participations < 0) {
    throw std::invalid_argument("SpentEpsilon: negative counts");
  }
  if (target.rounds == 0 && target.stage1_participations == 0) return 0.0;
  if (z == 0.0) return std::numeric_limits<double>::infinity();
  const std::vector<double> orders = DefaultOrders();
  RdpCurve total = Compose(GaussianCurve(z, orders),
                           target.stage1_participations);
  if (target.rounds > 0) {
    total = Combine(total, Compose(SubsampledGaussianCurve(z, target.q, orders),
                                   target.rounds));
  }
  return RdpToDp(total, target.delta);
}

double CalibrateNoiseMultiplier(const CalibrationTarget& target) {
  if (!(target.epsilon > 0.0)) {
    throw std::invalid_argument("calibration: epsilon must be > 0");
  }
  if (!(target.q > 0.0 && target.q <= 1.0)) {
    throw std::invalid_argument("calibration: q must lie in (0, 1]");
  }
  if (!(target.delta > 0.0 && target.delta < 1.0)) {
    throw std::invalid_argument("calibration: delta must lie in (0, 1)");
  }
  if (target.rounds + target.stage1_participations <= 0) {
    throw std::invalid_argument("calibration: no releases to calibrate for");
  }
  double hi = kMaxNoiseMultiplier;
  if (SpentEpsilon(target, hi) > target.epsilon) {
    throw std::runtime_error(
        "calibration infeasible: epsilon " + std::to_string(target.epsilon) +
        " not reachable with noise multiplier <= " +
        std::to_string(kMaxNoiseMultiplier));
  }
  double lo = hi;
  while (SpentEpsilon(target, lo) <= target.epsilon) {
    hi = lo;
    lo /= 4.0;
    if (lo < 1e-4) return hi;
  }
  while (hi / lo - 1.0 > kCalibrationBracket) {
    const double mid = std::sqrt(lo * hi);
    if (SpentEpsilon(target, mid) <= target.epsilon) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double SpentBudget(const PrivacySpec& spec, int participations_stage1,
                   int rounds_stage2) {
  CalibrationTarget target;
  target.delta = spec.delta;
  target.q = spec.q;
  target.rounds = rounds_stage2;
  target.stage1_participations = participations_stage1;
  return SpentEpsilon(target, spec.noise_multiplier);
}

ParamVector LocalDp(const ParamVector& delta, double z, double clip,
                    RngStream& stream) {
  if (!(z >= 0.0)) throw std::invalid_argument("LocalDp: z must be >= 0");
  const ParamVector clipped = Clip(delta, clip);
  return Add(clipped, GaussianNoise(stream, delta.shared_layout(), z * clip));
}

ParamVector SecureSumDp(std::span<const ParamVector> deltas, double z,
                        double clip, std::span<RngStream> streams) {
  if (deltas.empty()) throw std::invalid_argument("SecureSumDp: no inputs");
  if (streams.size() != deltas.size()) {
    throw std::invalid_argument("SecureSumDp: one stream per input required");
  }
  if (!(z >= 0.0)) throw std::invalid_argument("SecureSumDp: z must be >= 0");
  SecureSumChannel channel(deltas.front().shared_layout(), clip, z * clip,
                           deltas.size());
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    channel.Contribute(k, deltas[k], streams[k]);
  }
  return channel.Release();
}

SecureSumChannel::SecureSumChannel(std::shared_ptr<const Layout> layout,
                                   double clip, double total_noise_std,
                                   std::size_t num_clients)
    : layout_(std::move(layout)),
      clip_(clip),
      per_client_std_(0.0),
      slots_(num_clients),
      filled_(num_clients, 0) {
  if (num_clients == 0) {
    throw std::invalid_argument("SecureSumChannel: no clients");
  }
  if (!(clip > 0.0)) throw std::invalid_argument("SecureSumChannel: clip <= 0");
  if (!(total_noise_std >= 0.0)) {
    throw std::invalid_argument("SecureSumChannel: negative noise");
  }
  per_client_std_ = total_noise_std / std::sqrt(static_cast<double>(num_clients));
}

void SecureSumChannel::Contribute(std::size_t slot, const ParamVector& update,
                                  RngStream& noise_stream) {
  if (released_) throw std::logic_error("SecureSumChannel: already released");
  if (slot >= slots_.size()) {
    throw std::out_of_range("SecureSumChannel: slot out of range");
  }
  if (filled_[slot]) {
    throw std::logic_error("SecureSumChannel: slot contributed twice");
  }
  if (!(update.layout() == *layout_)) {
    throw std::invalid_argument("SecureSumChannel: layout mismatch");
  }
  const ParamVector clipped = Clip(update, clip_);
  const ParamVector noise = GaussianNoise(noise_stream, layout_, per_client_std_);
  std::vector<double> share(clipped.size());
  for (std::size_t i = 0; i < share.size(); ++i) {
    share[i] = clipped[i] + noise[i];
  }
  slots_[slot] = std::move(share);
  filled_[slot] = 1;
}

ParamVector SecureSumChannel::Release() {
  if (released_) throw std::logic_error("SecureSumChannel: already released");
  for (char f : filled_) {
    if (!f) throw std::logic_error("SecureSumChannel: missing contribution");
  }
  released_ = true;
  // Each coordinate is summed over its sorted shares, so the result does
  // not depend on which client occupies which slot.
  std::vector<double> total(layout_->size(), 0.0);
  std::vector<double> column(slots_.size());
  for (std::size_t i = 0; i < total.size(); ++i) {
    for (std::size_t k = 0; k < slots_.size(); ++k) column[k] = slots_[k][i];
    std::sort(column.begin(), column.end());
    double s = 0.0;
    for (double v : column) s += v;
    total[i] = s;
  }
  slots_.clear();
  return ParamVector(layout_, std::move(total));
}

}  // namespace pina
