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

#include "pina/aggregation.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace pina {

int IdentifyCluster(const FrozenBackbone& backbone,
                    std::span<const ParamVector> models,
                    const ClientDataset& data) {
  if (models.empty()) {
    throw std::invalid_argument("IdentifyCluster: no cluster models");
  }
  int best = 0;
  double best_loss = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < models.size(); ++i) {
    const double loss = EmpiricalLoss(backbone, models[i], data);
    if (loss < best_loss) {
      best_loss = loss;
      best = static_cast<int>(i);
    }
  }
  return best;
}

std::shared_ptr<const Layout> StackedLayout(const Layout& block,
                                            int num_clusters) {
  std::vector<std::pair<std::string, std::size_t>> segments;
  for (int c = 0; c < num_clusters; ++c) {
    const std::string prefix = "cluster" + std::to_string(c) + "/";
    for (const auto& s : block.segments()) {
      segments.emplace_back(prefix + s.name, s.length);
    }
  }
  return std::make_shared<const Layout>(segments);
}

StackedClientUpdate BuildStackedUpdate(int selected, const ParamVector& delta,
                                       int num_clusters) {
  if (num_clusters < 1 || selected < 0 || selected >= num_clusters) {
    throw std::invalid_argument("BuildStackedUpdate: selected out of range");
  }
  const std::size_t block = delta.size();
  std::vector<double> values(block * num_clusters, 0.0);
  std::copy(delta.values().begin(), delta.values().end(),
            values.begin() + static_cast<std::ptrdiff_t>(block * selected));
  return StackedClientUpdate{
      selected,
      ParamVector(StackedLayout(delta.layout(), num_clusters),
                  std::move(values))};
}

std::vector<ParamVector> SplitStacked(
    const ParamVector& stacked, const std::shared_ptr<const Layout>& block,
    int num_clusters) {
  if (stacked.size() != block->size() * num_clusters) {
    throw std::invalid_argument("SplitStacked: size mismatch");
  }
  std::vector<ParamVector> out;
  out.reserve(num_clusters);
  auto values = stacked.values();
  for (int c = 0; c < num_clusters; ++c) {
    auto part = values.subspan(block->size() * c, block->size());
    out.emplace_back(block, std::vector<double>(part.begin(), part.end()));
  }
  return out;
}

RoundAggregator::RoundAggregator(std::shared_ptr<const Layout> block,
                                 int num_clusters, double clip,
                                 double total_noise_std,
                                 std::size_t num_clients)
    : block_(std::move(block)),
      stacked_(StackedLayout(*block_, num_clusters)),
      num_clusters_(num_clusters),
      num_clients_(num_clients),
      channel_(stacked_, clip, total_noise_std, num_clients) {}

void RoundAggregator::Contribute(std::size_t slot,
                                 const StackedClientUpdate& update,
                                 RngStream& noise_stream) {
  channel_.Contribute(slot, update.stacked, noise_stream);
}

std::vector<ParamVector> RoundAggregator::Finish() {
  const ParamVector sum = channel_.Release();
  const ParamVector mean = Scale(sum, 1.0 / static_cast<double>(num_clients_));
  return SplitStacked(mean, block_, num_clusters_);
}

std::vector<ParamVector> AggregateRound(
    std::span<const StackedClientUpdate> updates, double z, double clip,
    std::span<RngStream> streams, double noise_scale) {
  if (updates.empty()) throw std::invalid_argument("AggregateRound: no updates");
  if (streams.size() != updates.size()) {
    throw std::invalid_argument("AggregateRound: one stream per update");
  }
  // Recover the block layout from the first stacked vector.
  const Layout& stacked = updates.front().stacked.layout();
  const std::string first_prefix = "cluster0/";
  std::vector<std::pair<std::string, std::size_t>> block_segments;
  for (const auto& s : stacked.segments()) {
    if (s.name.rfind(first_prefix, 0) == 0) {
      block_segments.emplace_back(s.name.substr(first_prefix.size()), s.length);
    }
  }
  auto block = std::make_shared<const Layout>(block_segments);
  if (block->size() == 0 || stacked.size() % block->size() != 0) {
    throw std::invalid_argument("AggregateRound: malformed stacked layout");
  }
  const int num_clusters = static_cast<int>(stacked.size() / block->size());

  RoundAggregator aggregator(block, num_clusters, clip,
                             z * clip * noise_scale, updates.size());
  for (std::size_t k = 0; k < updates.size(); ++k) {
    aggregator.Contribute(k, updates[k], streams[k]);
  }
  return aggregator.Finish();
}

std::vector<ParamVector> NormalizeUpdates(
    std::span<const ParamVector> aggregates) {
  std::vector<double> norms;
  norms.reserve(aggregates.size());
  double smallest = std::numeric_limits<double>::infinity();
  for (const auto& a : aggregates) {
    norms.push_back(L2Norm(a));
    if (norms.back() >= kZeroNormTolerance) {
      smallest = std::min(smallest, norms.back());
    }
  }
  std::vector<ParamVector> out(aggregates.begin(), aggregates.end());
  if (!std::isfinite(smallest)) return out;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (norms[i] >= kZeroNormTolerance) {
      out[i] = Scale(aggregates[i], smallest / norms[i]);
    }
  }
  return out;
}

std::vector<NormalityReport> NormalityReports(
    std::span<const ParamVector> aggregates, std::size_t cap,
    std::span<RngStream> streams) {
  if (streams.size() != aggregates.size()) {
    throw std::invalid_argument("NormalityReports: one stream per aggregate");
  }
  std::vector<NormalityReport> reports;
  reports.reserve(aggregates.size());
  for (std::size_t i = 0; i < aggregates.size(); ++i) {
    const std::vector<double> sample =
        CoordinateSubsample(aggregates[i], cap, streams[i]);
    NormalityReport report;
    try {
      report = ShapiroW(sample);
    } catch (const std::domain_error&) {
      // Constant aggregate: no structure to keep.
      report.w = 1.0;
      report.n = sample.size();
    }
    report.subsampled = sample.size() < aggregates[i].size();
    reports.push_back(report);
  }
  return reports;
}

std::vector<double> NormalityFactors(std::span<const NormalityReport> reports) {
  double total = 0.0;
  for (const auto& r : reports) {
    if (!(r.w > 0.0 && r.w <= 1.0 + 1e-9)) {
      throw std::invalid_argument("NormalityFactors: W outside (0, 1]");
    }
    total += r.w;
  }
  std::vector<double> factors;
  factors.reserve(reports.size());
  for (const auto& r : reports) {
    factors.push_back(r.w < kNormalityCutoff ? r.w / total : 0.0);
  }
  return factors;
}

std::vector<ParamVector> NormalityScale(
    std::span<const ParamVector> aggregates,
    std::span<const NormalityReport> reports) {
  if (aggregates.size() != reports.size()) {
    throw std::invalid_argument("NormalityScale: one report per aggregate");
  }
  const std::vector<double> factors = NormalityFactors(reports);
  std::vector<ParamVector> out;
  out.reserve(aggregates.size());
  for (std::size_t i = 0; i < aggregates.size(); ++i) {
    out.push_back(Scale(aggregates[i], factors[i]));
  }
  return out;
}

ClusterModelSet ApplyRound(const ClusterModelSet& models,
                           std::span<const ParamVector> scaled) {
  if (scaled.size() != models.models.size()) {
    throw std::invalid_argument("ApplyRound: one update per cluster required");
  }
  ClusterModelSet next;
  next.backbone = models.backbone;
  next.round = models.round + 1;
  next.models.reserve(scaled.size());
  for (std::size_t i = 0; i < scaled.size(); ++i) {
    try {
      next.models.push_back(models.models[i].AddSegments(scaled[i]));
    } catch (const std::out_of_range& e) {
      throw std::invalid_argument(std::string("ApplyRound: layout mismatch: ") +
                                  e.what());
    }
  }
  return next;
}

}  // namespace pina
