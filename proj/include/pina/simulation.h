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

// End-to-end round loop: sketch-based cluster initialization, clustered
// training over secure aggregation, and the baselines it is compared with.
//
// Every random draw comes from a stream keyed by (seed, kind, entity,
// round), and every cross-client reduction runs in a fixed order, so the
// metrics are a pure function of the configuration regardless of how many
// worker threads train clients.

#ifndef PINA_SIMULATION_H_
#define PINA_SIMULATION_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pina/aggregation.h"
#include "pina/model.h"
#include "pina/population.h"
#include "pina/privacy.h"
#include "pina/sketch_init.h"

namespace pina {

enum class Algorithm { kPina, kPinaRandomInit, kIfcaLdp, kFedAvg };

std::string_view AlgorithmName(Algorithm algorithm);
// Throws std::invalid_argument for unknown names.
Algorithm ParseAlgorithm(std::string_view name);

struct ExperimentConfig {
  Algorithm algorithm = Algorithm::kPina;
  std::uint64_t seed = 1;
  // Number of cluster models C.
  int num_clusters = 2;
  // Training rounds that use norm equalization before switching to
  // normality scaling.
  int t_no = 5;
  // noise_multiplier and clip_init are used as given.
  PrivacySpec privacy;
  TrainConfig train;
  ModelShape model;
  PopulationConfig population;
  // When > 0, training-stage noise is scaled as if this many clients
  // contributed to each round.
  double virtual_cohort = 0.0;
  // Per-coordinate std of the random-init perturbation, in units of
  // clip / sqrt(dim) over the init segments.
  double random_init_scale = 1.0;
  // Epochs of head-only training on unrotated public data before
  // federation; 0 disables it.
  int warmup_epochs = 0;
  int warmup_samples = 1000;
  std::size_t shapiro_cap = kShapiroMaxN;
  // Each client contributes at most one sketch.
  bool single_stage1_participation = true;

  void Validate() const;
};

// Poisson sampling: each eligible client is included independently with
// probability q. An empty draw is redrawn from the same stream.
std::vector<std::size_t> SampleRound(std::size_t num_clients, double q,
                                     RngStream& stream,
                                     const std::vector<char>* eligible =
                                         nullptr);

// Fraction of agreeing labels under the best one-to-one relabeling of
// `predicted` (num_predicted labels) onto `truth` (num_truth labels).
double ClusteringAccuracy(std::span<const int> predicted,
                          std::span<const int> truth, int num_predicted,
                          int num_truth);

double AdjustedRandIndex(std::span<const int> a, std::span<const int> b);

struct RoundMetrics {
  // 1-based index within the training stage.
  int round = 0;
  // Index within the whole protocol (initialization rounds included).
  int global_round = 0;
  std::string phase;
  std::size_t cohort_size = 0;
  // Sampled clients that selected each cluster this round.
  std::vector<int> selections;
  double clustering_accuracy = 0.0;
  // Per ground-truth cluster: mean accuracy of the models its clients pick.
  std::vector<double> cluster_test_accuracy;
  double mean_test_accuracy = 0.0;
  std::vector<double> norms_before;
  std::vector<double> norms_after;
  std::vector<double> shapiro_w;
  double epsilon = 0.0;
};

struct Stage1Result {
  ClusterModelSet models;
  PrototypeSet prototypes;
  std::vector<Sketch> sketches;
  // Ground-truth cluster of each sketch, aligned with `sketches`.
  std::vector<int> sketch_truth;
  // ARI of the k-means assignment against ground truth.
  double adjusted_rand_index = 0.0;
  // Loss-based identification accuracy of the materialized models over the
  // whole population.
  double clustering_accuracy = 0.0;
  // Largest number of sketches any single client released.
  int max_participations = 0;
};

struct ExperimentResult {
  std::optional<Stage1Result> stage1;
  // Clustering accuracy of the models training starts from.
  double initial_clustering_accuracy = 0.0;
  std::vector<RoundMetrics> rounds;
};

class Simulator {
 public:
  Simulator(ExperimentConfig config,
            std::shared_ptr<const Population> population, int workers = 1);

  const ExperimentConfig& config() const { return config_; }
  const Population& population() const { return *population_; }
  const std::shared_ptr<const FrozenBackbone>& backbone() const {
    return backbone_;
  }
  // Shared starting point ("pre-trained" model) of every cluster model.
  const ParamVector& base_params() const { return base_; }
  // Layout of one cluster's training-stage update.
  const std::shared_ptr<const Layout>& update_layout() const {
    return update_layout_;
  }

  Stage1Result RunStage1() const;
  // C copies of the base model, each with a Gaussian perturbation of the
  // init segments.
  ClusterModelSet RandomInitModels() const;
  ClusterModelSet SingleModel() const;

  // Clustered training from `models`. With normality scaling disabled the
  // loop is plain DP-FedAvg per cluster (used by the fedavg baseline).
  // The models after the last round are stored in `final_models` when
  // non-null.
  std::vector<RoundMetrics> RunStage2(
      ClusterModelSet models, int stage1_participations,
      bool scale_updates = true,
      ClusterModelSet* final_models = nullptr) const;
  std::vector<RoundMetrics> RunIfcaLdp(ClusterModelSet models) const;

  // Dispatches on config().algorithm.
  ExperimentResult Run() const;

  // Loss-based cluster choice of every client.
  std::vector<int> IdentifyAll(std::span<const ParamVector> models) const;
  double EvaluateClustering(std::span<const ParamVector> models) const;

 private:
  void FillEvaluation(std::span<const ParamVector> models,
                      RoundMetrics& metrics) const;

  ExperimentConfig config_;
  std::shared_ptr<const Population> population_;
  int workers_;
  std::shared_ptr<const FrozenBackbone> backbone_;
  ParamVector base_;
  std::shared_ptr<const Layout> update_layout_;
  std::shared_ptr<const Layout> init_layout_;
};

}  // namespace pina

#endif  // PINA_SIMULATION_H_
