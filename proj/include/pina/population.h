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

#ifndef PINA_POPULATION_H_
#define PINA_POPULATION_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pina/model.h"
#include "pina/numeric.h"

namespace pina {

// Synthetic "rotated" population: one class-conditional Gaussian mixture
// shared by everyone, and per ground-truth cluster c a fixed rotation by
// 360 * c / C degrees applied in every coordinate pair (0,1), (2,3), ...
struct PopulationConfig {
  int input_dim = 16;
  int num_classes = 4;
  int true_clusters = 2;
  int clients_per_cluster = 100;
  int samples_per_client = 100;
  int test_samples_per_cluster = 500;
  // Norm of each class mean; within-class noise is N(0, I).
  double class_separation = 4.0;

  void Validate() const;
  int num_clients() const { return true_clusters * clients_per_cluster; }
};

struct Population {
  PopulationConfig config;
  // Client k belongs to ground-truth cluster k % true_clusters.
  std::vector<ClientDataset> clients;
  std::vector<int> truth;
  // Held-out samples per ground-truth cluster.
  std::vector<std::vector<Sample>> test_sets;
  // Unrotated class means, row-major num_classes x input_dim.
  std::vector<double> class_means;
};

Population GeneratePopulation(const PopulationConfig& config,
                              std::uint64_t seed);

// Applies the rotation of cluster `cluster` (out of `true_clusters`).
std::vector<double> RotateFeatures(std::span<const double> x, int cluster,
                                   int true_clusters);

// Unrotated samples from the shared mixture, e.g. for warm-up.
std::vector<Sample> DrawBaseSamples(const Population& population,
                                    std::size_t count, RngStream& stream);

}  // namespace pina

#endif  // PINA_POPULATION_H_
