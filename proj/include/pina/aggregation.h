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

// Server-side processing of clustered training rounds.
//
// Every sampled client ships one stacked vector holding an update block per
// cluster; only the block of the cluster it selected is non-zero. The
// stacked vectors go through the secure-sum channel, so the server observes
// one noisy aggregate per cluster per round and nothing else. Aggregates
// are then equalized in norm (early rounds) or reweighted by their
// Shapiro-Wilk statistic, zeroing those that look like pure noise.

#ifndef PINA_AGGREGATION_H_
#define PINA_AGGREGATION_H_

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "pina/model.h"
#include "pina/numeric.h"
#include "pina/privacy.h"
#include "pina/stats.h"

namespace pina {

// Aggregates with W at or above this are zeroed by NormalityScale.
inline constexpr double kNormalityCutoff = 0.99;
// Aggregates below this norm are left alone by NormalizeUpdates.
inline constexpr double kZeroNormTolerance = 1e-12;

struct ClusterModelSet {
  std::vector<ParamVector> models;
  std::shared_ptr<const FrozenBackbone> backbone;
  int round = 0;

  int num_clusters() const { return static_cast<int>(models.size()); }
};

// argmin_i EmpiricalLoss(models[i], data), lowest index on ties.
int IdentifyCluster(const FrozenBackbone& backbone,
                    std::span<const ParamVector> models,
                    const ClientDataset& data);

struct StackedClientUpdate {
  int selected = 0;
  ParamVector stacked;
};

// C copies of `block`, segment names prefixed "cluster<i>/".
std::shared_ptr<const Layout> StackedLayout(const Layout& block,
                                            int num_clusters);

// Block `selected` holds `delta`; all other blocks are zero. Throws
// std::invalid_argument when selected is out of range.
StackedClientUpdate BuildStackedUpdate(int selected, const ParamVector& delta,
                                       int num_clusters);

// Inverse of the stacking: C vectors with the block layout.
std::vector<ParamVector> SplitStacked(
    const ParamVector& stacked, const std::shared_ptr<const Layout>& block,
    int num_clusters);

// One round of stacked secure aggregation. Clients call Contribute (safe to
// call concurrently for distinct slots); the server gets Finish(), the
// per-cluster mean updates (noisy sum / K).
class RoundAggregator {
 public:
  RoundAggregator(std::shared_ptr<const Layout> block, int num_clusters,
                  double clip, double total_noise_std,
                  std::size_t num_clients);

  void Contribute(std::size_t slot, const StackedClientUpdate& update,
                  RngStream& noise_stream);
  std::vector<ParamVector> Finish();

 private:
  std::shared_ptr<const Layout> block_;
  std::shared_ptr<const Layout> stacked_;
  int num_clusters_;
  std::size_t num_clients_;
  SecureSumChannel channel_;
};

// Joint clip of each stacked update to `clip`, secure sum with total noise
// std z * clip * noise_scale, division by |updates|, split per cluster.
// Throws std::invalid_argument for an empty round.
std::vector<ParamVector> AggregateRound(
    std::span<const StackedClientUpdate> updates, double z, double clip,
    std::span<RngStream> streams, double noise_scale = 1.0);

// Scales every aggregate to the smallest non-zero norm. Aggregates with
// norm below kZeroNormTolerance are excluded from the minimum and returned
// unchanged.
std::vector<ParamVector> NormalizeUpdates(
    std::span<const ParamVector> aggregates);

// W of each aggregate over at most `cap` coordinates. A constant aggregate
// reports W = 1.
std::vector<NormalityReport> NormalityReports(
    std::span<const ParamVector> aggregates, std::size_t cap,
    std::span<RngStream> streams);

// Delta_i * w_i / sum_j w_j when w_i < 0.99, otherwise zero. The sum runs
// over every cluster.
std::vector<double> NormalityFactors(std::span<const NormalityReport> reports);
std::vector<ParamVector> NormalityScale(
    std::span<const ParamVector> aggregates,
    std::span<const NormalityReport> reports);

// W_i += Delta_i (matched by segment name) and advances the round counter.
ClusterModelSet ApplyRound(const ClusterModelSet& models,
                           std::span<const ParamVector> scaled);

}  // namespace pina

#endif  // PINA_AGGREGATION_H_
