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

// YAML experiment configuration.
//
//   algorithm: pina            # pina | pina-random-init | ifca-ldp | fedavg
//   seed: 1
//   clusters: 2
//   rounds: {init: 10, train: 30, normalize: 5}
//   privacy:
//     epsilon: 2
//     delta: auto              # 1 / |K|^1.1
//     sampling_rate: 0.1
//     clip: 1.0
//     clip_init: auto          # sqrt(4 / stage-1 dim) * clip
//     noise_multiplier: auto   # calibrated over the whole protocol
//     virtual_cohort: 0
//   train: {epochs: 10, batch_size: 50, learning_rate: 0.01}
//   model: {input_dim: 16, hidden_dim: 32, num_classes: 4, init_rank: 1,
//           adapter_rank: 4, warmup_epochs: 0, warmup_samples: 1000}
//   population: {true_clusters: 2, clients_per_cluster: 100,
//                samples_per_client: 100, test_samples_per_cluster: 500,
//                class_separation: 4.0}
//   random_init_scale: 1.0
//   shapiro_cap: 5000
//
// Only algorithm, seed, clusters, rounds.init and rounds.train are required.
// Unknown keys are rejected. "auto" values are resolved at load time, and
// EmitConfig writes the fully resolved configuration, which parses back to
// the same ExperimentConfig.

#ifndef PINA_CONFIG_H_
#define PINA_CONFIG_H_

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "pina/simulation.h"

namespace pina {

class ConfigError : public std::runtime_error {
 public:
  // `line` is 1-based; 0 when the location is unknown (e.g. an override).
  ConfigError(std::string field, int line, const std::string& message);

  const std::string& field() const { return field_; }
  int line() const { return line_; }

 private:
  std::string field_;
  int line_;
};

// Parses YAML text after applying `overrides` of the form
// "dotted.path=value". Throws ConfigError on any syntax, schema or
// validation problem.
ExperimentConfig ParseConfig(std::string_view yaml,
                             std::span<const std::string> overrides = {});
ExperimentConfig LoadConfigFile(const std::string& path,
                                std::span<const std::string> overrides = {});

// Fully resolved YAML; ParseConfig(EmitConfig(c)) == c field by field.
std::string EmitConfig(const ExperimentConfig& config);

bool SameConfig(const ExperimentConfig& a, const ExperimentConfig& b);

}  // namespace pina

#endif  // PINA_CONFIG_H_
