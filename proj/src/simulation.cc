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

#include "pina/simulation.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "parallel.h"

namespace pina {
namespace {

constexpr int kMaxRelabelLabels = 9;

double Choose2(double n) { return n * (n - 1.0) / 2.0; }

}  // namespace

std::string_view AlgorithmName(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kPina:
      return "pina";
    case Algorithm::kPinaRandomInit:
      return "pina-random-init";
    case Algorithm::kIfcaLdp:
      return "ifca-ldp";
    case Algorithm::kFedAvg:
      return "fedavg";
  }
  return "unknown";
}

Algorithm ParseAlgorithm(std::string_view name) {
  for (Algorithm a : {Algorithm::kPina, Algorithm::kPinaRandomInit,
                      Algorithm::kIfcaLdp, Algorithm::kFedAvg}) {
    if (AlgorithmName(a) == name) return a;
  }
  throw std::invalid_argument("unknown algorithm '" + std::string(name) +
                              "' (expected pina, pina-random-init, ifca-ldp "
                              "or fedavg)");
}

void ExperimentConfig::Validate() const {
  privacy.Validate();
  train.Validate();
  model.Validate();
  population.Validate();
  if (num_clusters < 1) throw std::invalid_argument("clusters must be >= 1");
  if (t_no < 0) throw std::invalid_argument("rounds.normalize must be >= 0");
  if (model.input_dim != population.input_dim ||
      model.num_classes != population.num_classes) {
    throw std::invalid_argument(
        "model and population disagree on input_dim/num_classes");
  }
  if (privacy.q * population.num_clients() < 1.0) {
    throw std::invalid_argument(
        "sampling_rate * clients must be >= 1 expected client per round");
  }
  if (algorithm == Algorithm::kPina && privacy.t_in < 1) {
    throw std::invalid_argument("pina requires rounds.init >= 1");
  }
  if (!(virtual_cohort >= 0.0) || !(random_init_scale >= 0.0)) {
    throw std::invalid_argument("virtual_cohort/random_init_scale must be >= 0");
  }
  if (shapiro_cap < kShapiroMinN) {
    throw std::invalid_argument("shapiro_cap must be >= 3");
  }
}

std::vector<std::size_t> SampleRound(std::size_t num_clients, double q,
                                     RngStream& stream,
                                     const std::vector<char>* eligible) {
  if (!(q > 0.0 && q <= 1.0)) {
    throw std::invalid_argument("SampleRound: q must lie in (0, 1]");
  }
  if (eligible != nullptr && eligible->size() != num_clients) {
    throw std::invalid_argument("SampleRound: eligibility size mismatch");
  }
  auto allowed = [&](std::size_t k) {
    return eligible == nullptr || (*eligible)[k] != 0;
  };
  std::size_t candidates = 0;
  for (std::size_t k = 0; k < num_clients; ++k) candidates += allowed(k);
  std::vector<std::size_t> cohort;
  if (candidates == 0) return cohort;
  while (cohort.empty()) {
    for (std::size_t k = 0; k < num_clients; ++k) {
      // Every client consumes one draw so cohorts of different rounds and
      // eligibility masks stay aligned.
      const double u = stream.Uniform();
      if (allowed(k) && u < q) cohort.push_back(k);
    }
  }
  return cohort;
}

double ClusteringAccuracy(std::span<const int> predicted,
                          std::span<const int> truth, int num_predicted,
                          int num_truth) {
  if (predicted.size() != truth.size()) {
    throw std::invalid_argument("ClusteringAccuracy: size mismatch");
  }
  if (predicted.empty()) return 0.0;
  const int m = std::max(num_predicted, num_truth);
  if (m > kMaxRelabelLabels) {
    throw std::invalid_argument("ClusteringAccuracy: too many labels");
  }
  std::vector<std::vector<int>> counts(m, std::vector<int>(m, 0));
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] < 0 || predicted[i] >= num_predicted || truth[i] < 0 ||
        truth[i] >= num_truth) {
      throw std::invalid_argument("ClusteringAccuracy: label out of range");
    }
    ++counts[predicted[i]][truth[i]];
  }
  std::vector<int> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  int best = 0;
  do {
    int agree = 0;
    for (int p = 0; p < m; ++p) agree += counts[p][perm[p]];
    best = std::max(best, agree);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(best) / static_cast<double>(predicted.size());
}

double AdjustedRandIndex(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("AdjustedRandIndex: size mismatch");
  }
  const double n = static_cast<double>(a.size());
  if (a.size() < 2) return 1.0;
  const int ka = *std::max_element(a.begin(), a.end()) + 1;
  const int kb = *std::max_element(b.begin(), b.end()) + 1;
  std::vector<std::vector<double>> table(ka, std::vector<double>(kb, 0.0));
  std::vector<double> rows(ka, 0.0);
  std::vector<double> cols(kb, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    table[a[i]][b[i]] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  double index = 0.0;
  for (const auto& row : table) {
    for (double v : row) index += Choose2(v);
  }
  double sum_rows = 0.0;
  for (double v : rows) sum_rows += Choose2(v);
  double sum_cols = 0.0;
  for (double v : cols) sum_cols += Choose2(v);
  const double expected = sum_rows * sum_cols / Choose2(n);
  const double max_index = 0.5 * (sum_rows + sum_cols);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

Simulator::Simulator(ExperimentConfig config,
                     std::shared_ptr<const Population> population, int workers)
    : config_(std::move(config)),
      population_(std::move(population)),
      workers_(std::max(1, workers)) {
  config_.Validate();
  if (population_ == nullptr) {
    throw std::invalid_argument("Simulator: population required");
  }
  const std::uint64_t seed = config_.seed;
  RngStream backbone_stream(seed, {StreamKind::kBackbone, 0, 0});
  backbone_ = std::make_shared<const FrozenBackbone>(
      FrozenBackbone::Create(config_.model, backbone_stream));
  RngStream init_stream(seed, {StreamKind::kInitParams, 0, 0});
  base_ = InitialParams(*backbone_, init_stream);

  const std::vector<std::string> update_segments = TrainStageSegments();
  const std::vector<std::string> init_segments = InitStageSegments();
  update_layout_ = std::make_shared<const Layout>(
      base_.layout().Select(update_segments));
  init_layout_ =
      std::make_shared<const Layout>(base_.layout().Select(init_segments));

  if (config_.warmup_epochs > 0) {
    RngStream data_stream(seed, {StreamKind::kWarmup, 0, 0});
    ClientDataset public_set;
    public_set.samples = DrawBaseSamples(
        *population_, static_cast<std::size_t>(config_.warmup_samples),
        data_stream);
    TrainConfig warmup = config_.train;
    warmup.epochs = config_.warmup_epochs;
    const std::vector<std::string> head{kHeadWeight, kHeadBias};
    RngStream order_stream(seed, {StreamKind::kWarmup, 1, 0});
    base_ = LocalTrain(*backbone_, base_, head, public_set, warmup,
                       order_stream);
  }
}

Stage1Result Simulator::RunStage1() const {
  const Population& pop = *population_;
  const std::size_t n = pop.clients.size();
  const std::uint64_t seed = config_.seed;
  const PrivacySpec& privacy = config_.privacy;
  const std::vector<std::string> segments = InitStageSegments();

  Stage1Result result;
  std::vector<char> eligible(n, 1);
  std::vector<int> participations(n, 0);
  for (int t = 1; t <= privacy.t_in; ++t) {
    RngStream sampler(seed, {StreamKind::kSampling, 0,
                             static_cast<std::uint64_t>(t)});
    const std::vector<std::size_t> cohort =
        SampleRound(n, privacy.q, sampler,
                    config_.single_stage1_participation ? &eligible : nullptr);
    std::vector<Sketch> round_sketches(cohort.size());
    internal::ParallelFor(cohort.size(), workers_, [&](std::size_t i) {
      const std::size_t k = cohort[i];
      RngStream train_stream(seed, {StreamKind::kClientTrain, k,
                                    static_cast<std::uint64_t>(t)});
      const ParamVector after = LocalTrain(*backbone_, base_, segments,
                                           pop.clients[k], config_.train,
                                           train_stream);
      const ParamVector update = ModelDelta(base_, after).Extract(init_layout_);
      RngStream noise_stream(seed, {StreamKind::kSketchNoise, k,
                                    static_cast<std::uint64_t>(t)});
      round_sketches[i] =
          PrivatizeSketch(FilterTop2(update, k), privacy.noise_multiplier,
                          privacy.clip_init, noise_stream);
    });
    for (std::size_t i = 0; i < cohort.size(); ++i) {
      const std::size_t k = cohort[i];
      eligible[k] = 0;
      ++participations[k];
      result.sketches.push_back(std::move(round_sketches[i]));
      result.sketch_truth.push_back(pop.truth[k]);
    }
  }
  if (result.sketches.size() < static_cast<std::size_t>(config_.num_clusters)) {
    throw std::runtime_error("initialization produced " +
                             std::to_string(result.sketches.size()) +
                             " sketches, fewer than the cluster count");
  }
  result.max_participations =
      *std::max_element(participations.begin(), participations.end());

  RngStream kmeans_stream(seed, {StreamKind::kKMeans, 0, 0});
  result.prototypes =
      KMeansCluster(result.sketches, config_.num_clusters, kmeans_stream);
  result.adjusted_rand_index =
      AdjustedRandIndex(result.prototypes.labels, result.sketch_truth);
  result.models.backbone = backbone_;
  result.models.models =
      MaterializeClusterModels(result.prototypes, base_, segments);
  result.clustering_accuracy = EvaluateClustering(result.models.models);
  return result;
}

ClusterModelSet Simulator::RandomInitModels() const {
  ClusterModelSet set;
  set.backbone = backbone_;
  const double sigma = config_.random_init_scale * config_.privacy.clip /
                       std::sqrt(static_cast<double>(init_layout_->size()));
  for (int c = 0; c < config_.num_clusters; ++c) {
    RngStream stream(config_.seed, {StreamKind::kRandomInit,
                                    static_cast<std::uint64_t>(c), 0});
    set.models.push_back(
        base_.AddSegments(GaussianNoise(stream, init_layout_, sigma)));
  }
  return set;
}

ClusterModelSet Simulator::SingleModel() const {
  ClusterModelSet set;
  set.backbone = backbone_;
  set.models.push_back(base_);
  return set;
}

std::vector<int> Simulator::IdentifyAll(
    std::span<const ParamVector> models) const {
  const Population& pop = *population_;
  std::vector<int> choice(pop.clients.size());
  internal::ParallelFor(choice.size(), workers_, [&](std::size_t k) {
    choice[k] = IdentifyCluster(*backbone_, models, pop.clients[k]);
  });
  return choice;
}

double Simulator::EvaluateClustering(
    std::span<const ParamVector> models) const {
  const std::vector<int> choice = IdentifyAll(models);
  return ClusteringAccuracy(choice, population_->truth,
                            static_cast<int>(models.size()),
                            population_->config.true_clusters);
}

void Simulator::FillEvaluation(std::span<const ParamVector> models,
                               RoundMetrics& metrics) const {
  const Population& pop = *population_;
  const int num_models = static_cast<int>(models.size());
  const int num_truth = pop.config.true_clusters;
  const std::vector<int> choice = IdentifyAll(models);
  metrics.clustering_accuracy =
      ClusteringAccuracy(choice, pop.truth, num_models, num_truth);

  std::vector<double> acc(static_cast<std::size_t>(num_models) * num_truth);
  internal::ParallelFor(acc.size(), workers_, [&](std::size_t idx) {
    const std::size_t i = idx / num_truth;
    const std::size_t c = idx % num_truth;
    acc[idx] = Accuracy(*backbone_, models[i], pop.test_sets[c]);
  });
  std::vector<double> total(num_truth, 0.0);
  std::vector<int> count(num_truth, 0);
  double overall = 0.0;
  for (std::size_t k = 0; k < choice.size(); ++k) {
    const int c = pop.truth[k];
    const double a = acc[static_cast<std::size_t>(choice[k]) * num_truth + c];
    total[c] += a;
    ++count[c];
    overall += a;
  }
  metrics.cluster_test_accuracy.assign(num_truth, 0.0);
  for (int c = 0; c < num_truth; ++c) {
    if (count[c] > 0) metrics.cluster_test_accuracy[c] = total[c] / count[c];
  }
  metrics.mean_test_accuracy = overall / static_cast<double>(choice.size());
}

std::vector<RoundMetrics> Simulator::RunStage2(
    ClusterModelSet models, int stage1_participations, bool scale_updates,
    ClusterModelSet* final_models) const {
  const Population& pop = *population_;
  const std::size_t n = pop.clients.size();
  const std::uint64_t seed = config_.seed;
  const PrivacySpec& privacy = config_.privacy;
  const int num_clusters = models.num_clusters();
  const std::vector<std::string> segments = TrainStageSegments();

  std::vector<RoundMetrics> history;
  history.reserve(privacy.t_tr);
  for (int r = 1; r <= privacy.t_tr; ++r) {
    const auto t = static_cast<std::uint64_t>(privacy.t_in + r);
    RngStream sampler(seed, {StreamKind::kSampling, 0, t});
    const std::vector<std::size_t> cohort = SampleRound(n, privacy.q, sampler);
    const double noise_scale =
        config_.virtual_cohort > 0.0
            ? static_cast<double>(cohort.size()) / config_.virtual_cohort
            : 1.0;

    RoundAggregator aggregator(
        update_layout_, num_clusters, privacy.clip,
        privacy.noise_multiplier * privacy.clip * noise_scale, cohort.size());
    std::vector<int> selected(cohort.size());
    internal::ParallelFor(cohort.size(), workers_, [&](std::size_t i) {
      const std::size_t k = cohort[i];
      const int sel = IdentifyCluster(*backbone_, models.models, pop.clients[k]);
      RngStream train_stream(seed, {StreamKind::kClientTrain, k, t});
      const ParamVector& start = models.models[sel];
      const ParamVector after = LocalTrain(*backbone_, start, segments,
                                           pop.clients[k], config_.train,
                                           train_stream);
      const ParamVector delta =
          ModelDelta(start, after).Extract(update_layout_);
      RngStream noise_stream(seed, {StreamKind::kClientNoise, k, t});
      aggregator.Contribute(i, BuildStackedUpdate(sel, delta, num_clusters),
                            noise_stream);
      selected[i] = sel;
    });
    // Everything below sees only the per-cluster aggregates.
    const std::vector<ParamVector> aggregates = aggregator.Finish();

    RoundMetrics metrics;
    metrics.round = r;
    metrics.global_round = static_cast<int>(t);
    metrics.cohort_size = cohort.size();
    metrics.selections.assign(num_clusters, 0);
    for (int s : selected) ++metrics.selections[s];
    for (const auto& a : aggregates) metrics.norms_before.push_back(L2Norm(a));

    std::vector<ParamVector> scaled;
    if (!scale_updates) {
      metrics.phase = "plain";
      scaled = aggregates;
    } else if (r <= config_.t_no) {
      metrics.phase = "normalize";
      scaled = NormalizeUpdates(aggregates);
    } else {
      metrics.phase = "normality";
      std::vector<RngStream> streams;
      for (int c = 0; c < num_clusters; ++c) {
        streams.emplace_back(seed, StreamId{StreamKind::kSubsample,
                                            static_cast<std::uint64_t>(c), t});
      }
      const std::vector<NormalityReport> reports =
          NormalityReports(aggregates, config_.shapiro_cap, streams);
      for (const auto& rep : reports) metrics.shapiro_w.push_back(rep.w);
      scaled = NormalityScale(aggregates, reports);
    }
    for (const auto& a : scaled) metrics.norms_after.push_back(L2Norm(a));
    models = ApplyRound(models, scaled);

    metrics.epsilon = SpentBudget(privacy, stage1_participations, r);
    FillEvaluation(models.models, metrics);
    history.push_back(std::move(metrics));
  }
  if (final_models != nullptr) *final_models = std::move(models);
  return history;
}

std::vector<RoundMetrics> Simulator::RunIfcaLdp(ClusterModelSet models) const {
  const Population& pop = *population_;
  const std::size_t n = pop.clients.size();
  const std::uint64_t seed = config_.seed;
  const PrivacySpec& privacy = config_.privacy;
  const int num_clusters = models.num_clusters();
  const std::vector<std::string> segments = TrainStageSegments();
  std::vector<int> participations(n, 0);

  std::vector<RoundMetrics> history;
  history.reserve(privacy.t_tr);
  for (int r = 1; r <= privacy.t_tr; ++r) {
    const auto t = static_cast<std::uint64_t>(privacy.t_in + r);
    RngStream sampler(seed, {StreamKind::kSampling, 0, t});
    const std::vector<std::size_t> cohort = SampleRound(n, privacy.q, sampler);

    std::vector<int> selected(cohort.size());
    std::vector<ParamVector> released(cohort.size());
    internal::ParallelFor(cohort.size(), workers_, [&](std::size_t i) {
      const std::size_t k = cohort[i];
      const int sel = IdentifyCluster(*backbone_, models.models, pop.clients[k]);
      RngStream train_stream(seed, {StreamKind::kClientTrain, k, t});
      const ParamVector& start = models.models[sel];
      const ParamVector after = LocalTrain(*backbone_, start, segments,
                                           pop.clients[k], config_.train,
                                           train_stream);
      const ParamVector delta =
          ModelDelta(start, after).Extract(update_layout_);
      RngStream noise_stream(seed, {StreamKind::kClientNoise, k, t});
      released[i] = LocalDp(delta, privacy.noise_multiplier, privacy.clip,
                            noise_stream);
      selected[i] = sel;
    });

    RoundMetrics metrics;
    metrics.round = r;
    metrics.global_round = static_cast<int>(t);
    metrics.phase = "ifca";
    metrics.cohort_size = cohort.size();
    metrics.selections.assign(num_clusters, 0);
    std::vector<ParamVector> updates(num_clusters,
                                     ParamVector::Zeros(update_layout_));
    for (std::size_t i = 0; i < cohort.size(); ++i) {
      ++participations[cohort[i]];
      ++metrics.selections[selected[i]];
      updates[selected[i]] = Add(updates[selected[i]], released[i]);
    }
    for (int c = 0; c < num_clusters; ++c) {
      if (metrics.selections[c] > 0) {
        updates[c] = Scale(updates[c], 1.0 / metrics.selections[c]);
      }
      metrics.norms_before.push_back(L2Norm(updates[c]));
      metrics.norms_after.push_back(metrics.norms_before.back());
    }
    models = ApplyRound(models, updates);

    const int max_participation =
        *std::max_element(participations.begin(), participations.end());
    metrics.epsilon = SpentBudget(privacy, max_participation, 0);
    FillEvaluation(models.models, metrics);
    history.push_back(std::move(metrics));
  }
  return history;
}

ExperimentResult Simulator::Run() const {
  ExperimentResult result;
  switch (config_.algorithm) {
    case Algorithm::kPina: {
      Stage1Result stage1 = RunStage1();
      result.initial_clustering_accuracy = stage1.clustering_accuracy;
      result.rounds = RunStage2(stage1.models, stage1.max_participations);
      result.stage1 = std::move(stage1);
      break;
    }
    case Algorithm::kPinaRandomInit: {
      ClusterModelSet models = RandomInitModels();
      result.initial_clustering_accuracy = EvaluateClustering(models.models);
      result.rounds = RunStage2(std::move(models), 0);
      break;
    }
    case Algorithm::kIfcaLdp: {
      ClusterModelSet models = RandomInitModels();
      result.initial_clustering_accuracy = EvaluateClustering(models.models);
      result.rounds = RunIfcaLdp(std::move(models));
      break;
    }
    case Algorithm::kFedAvg: {
      ClusterModelSet models = SingleModel();
      result.initial_clustering_accuracy = EvaluateClustering(models.models);
      result.rounds = RunStage2(std::move(models), 0, /*scale_updates=*/false);
      break;
    }
  }
  return result;
}

}  // namespace pina
