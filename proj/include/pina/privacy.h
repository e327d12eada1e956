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

// Gaussian mechanisms and a Renyi-DP accountant.
//
// The accountant follows the usual "moments accountant with RDP" recipe:
// per-release RDP of the (Poisson-subsampled) Gaussian mechanism is
// evaluated on a fixed grid of orders, composed by summation, and converted
// to (epsilon, delta)-DP by minimizing
//
//   eps'(a) + log((a - 1) / a) - (log a + log delta) / (a - 1)
//
// over the grid. All series are summed in the log domain.

#ifndef PINA_PRIVACY_H_
#define PINA_PRIVACY_H_

#include <cstddef>
#include <span>
#include <vector>

#include "pina/numeric.h"

namespace pina {

struct PrivacySpec {
  double epsilon = 2.0;
  double delta = 1e-5;
  // Poisson sampling rate of the training stage.
  double q = 0.1;
  int t_in = 10;
  int t_tr = 30;
  // Clip threshold of the training stage.
  double clip = 1.0;
  // Clip threshold of the sketch stage.
  double clip_init = 0.25;
  double noise_multiplier = 1.0;

  void Validate() const;
  // 1 / |K|^1.1.
  static double DefaultDelta(std::size_t num_clients);
};

struct RdpPoint {
  double order = 2.0;
  double rdp = 0.0;
};

// RDP guarantee on an ordered grid of orders.
using RdpCurve = std::vector<RdpPoint>;

// 1.5 followed by the integers 2..256.
std::vector<double> DefaultOrders();

// alpha / (2 z^2). Throws std::invalid_argument unless z > 0 and alpha > 1.
double GaussianRdp(double z, double alpha);

// RDP of the Poisson-subsampled Gaussian mechanism (sensitivity 1, noise
// multiplier z, rate q) at order alpha. Integer orders use the binomial
// expansion; fractional orders use the two-sided erfc series. q == 1
// reduces to GaussianRdp.
double SubsampledGaussianRdp(double z, double q, double alpha);

RdpCurve GaussianCurve(double z, std::span<const double> orders);
RdpCurve SubsampledGaussianCurve(double z, double q,
                                 std::span<const double> orders);

// Pointwise multiplication of the curve by `rounds`.
RdpCurve Compose(const RdpCurve& curve, int rounds);
// Pointwise sum of two curves on the same orders.
RdpCurve Combine(const RdpCurve& a, const RdpCurve& b);

struct DpConversion {
  double epsilon = 0.0;
  double order = 0.0;
};

// Throws std::invalid_argument for an empty curve or delta outside (0,1).
// The result is floored at zero.
DpConversion ConvertRdpToDp(const RdpCurve& curve, double delta);
double RdpToDp(const RdpCurve& curve, double delta);

struct CalibrationTarget {
  double epsilon = 2.0;
  double delta = 1e-5;
  double q = 0.1;
  // Subsampled releases of the training stage.
  int rounds = 1;
  // Unsubsampled (q = 1) sketch releases per client.
  int stage1_participations = 0;
};

// Largest z considered by CalibrateNoiseMultiplier.
inline constexpr double kMaxNoiseMultiplier = 1e3;

// Spent epsilon of the composed protocol at noise multiplier z: exactly 0
// with no releases, +infinity when z = 0.
double SpentEpsilon(const CalibrationTarget& target, double z);

// Smallest z (to within a relative bracket of 1e-6) whose spent epsilon is
// at most target.epsilon. Throws std::runtime_error when even
// kMaxNoiseMultiplier is insufficient.
double CalibrateNoiseMultiplier(const CalibrationTarget& target);

// Epsilon spent by `participations_stage1` sketch releases (q = 1 each) and
// `rounds_stage2` subsampled training rounds under `spec`. Exactly zero when
// both counts are zero.
double SpentBudget(const PrivacySpec& spec, int participations_stage1,
                   int rounds_stage2);

// Clip(delta, clip) + N(0, (z clip)^2 I).
ParamVector LocalDp(const ParamVector& delta, double z, double clip,
                    RngStream& stream);

// Sum of clipped inputs plus N(0, (z clip)^2 I) total noise, produced the
// distributed way: each input adds N(0, (z clip)^2 / K) of its own, drawn
// from its own stream. Throws std::invalid_argument for an empty input.
ParamVector SecureSumDp(std::span<const ParamVector> deltas, double z,
                        double clip, std::span<RngStream> streams);

// Simulated secure-sum channel. Clients contribute into private slots; the
// only thing the server can obtain is the released noisy sum. Each
// contribution is clipped to `clip` and carries its 1/K share of the noise
// variance before it enters the channel.
class SecureSumChannel {
 public:
  // `total_noise_std` is the standard deviation of the summed noise
  // (z * clip for the standard mechanism).
  SecureSumChannel(std::shared_ptr<const Layout> layout, double clip,
                   double total_noise_std, std::size_t num_clients);

  SecureSumChannel(const SecureSumChannel&) = delete;
  SecureSumChannel& operator=(const SecureSumChannel&) = delete;

  // Safe to call concurrently for distinct slots.
  void Contribute(std::size_t slot, const ParamVector& update,
                  RngStream& noise_stream);

  // Noisy sum over all slots; each coordinate is summed over its sorted
  // shares, so the result is independent of slot assignment. Throws
  // std::logic_error unless every slot contributed exactly once; the
  // channel is sealed afterwards.
  ParamVector Release();

  std::size_t num_clients() const { return slots_.size(); }

 private:
  std::shared_ptr<const Layout> layout_;
  double clip_;
  double per_client_std_;
  std::vector<std::vector<double>> slots_;
  std::vector<char> filled_;
  bool released_ = false;
};

}  // namespace pina

#endif  // PINA_PRIVACY_H_
