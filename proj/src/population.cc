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

#include "pina/population.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pina {
namespace {

Sample DrawSample(const Population& population, int cluster,
                  RngStream& stream) {
  const PopulationConfig& cfg = population.config;
  Sample s;
  s.label = std::min(cfg.num_classes - 1,
                     static_cast<int>(stream.Uniform() * cfg.num_classes));
  std::vector<double> x(cfg.input_dim);
  for (int j = 0; j < cfg.input_dim; ++j) {
    x[j] = population.class_means[s.label * cfg.input_dim + j] +
           stream.Gaussian();
  }
  s.x = RotateFeatures(x, cluster, cfg.true_clusters);
  return s;
}

}  // namespace

void PopulationConfig::Validate() const {
  if (input_dim < 2 || num_classes < 2 || true_clusters < 1 ||
      clients_per_cluster < 1 || samples_per_client < 1 ||
      test_samples_per_cluster < 1 || !(class_separation >= 0.0)) {
    throw std::invalid_argument("PopulationConfig: counts must be >= 1");
  }
}

std::vector<double> RotateFeatures(std::span<const double> x, int cluster,
                                   int true_clusters) {
  std::vector<double> out(x.begin(), x.end());
  if (cluster == 0) return out;
  // Exact values for the quarter turns keep 180-degree copies exact
  // negations.
  double c;
  double s;
  if (4 * cluster % true_clusters == 0) {
    switch ((4 * cluster / true_clusters) % 4) {
      case 1: c = 0.0; s = 1.0; break;
      case 2: c = -1.0; s = 0.0; break;
      case 3: c = 0.0; s = -1.0; break;
      default: c = 1.0; s = 0.0; break;
    }
  } else {
    const double angle = 2.0 * M_PI * cluster / true_clusters;
    c = std::cos(angle);
    s = std::sin(angle);
  }
  for (std::size_t j = 0; j + 1 < out.size(); j += 2) {
    const double a = x[j];
    const double b = x[j + 1];
    out[j] = c * a - s * b;
    out[j + 1] = s * a + c * b;
  }
  return out;
}

Population GeneratePopulation(const PopulationConfig& config,
                              std::uint64_t seed) {
  config.Validate();
  Population population;
  population.config = config;

  RngStream mean_stream(seed, {StreamKind::kPopulation, 0, 0});
  population.class_means.resize(
      static_cast<std::size_t>(config.num_classes) * config.input_dim);
  for (int y = 0; y < config.num_classes; ++y) {
    std::vector<double> mu(config.input_dim);
    for (double& v : mu) v = mean_stream.Gaussian();
    const double norm = L2Norm(mu);
    for (int j = 0; j < config.input_dim; ++j) {
      population.class_means[y * config.input_dim + j] =
          config.class_separation * mu[j] / norm;
    }
  }

  const int n = config.num_clients();
  population.clients.resize(n);
  population.truth.resize(n);
  for (int k = 0; k < n; ++k) {
    const int cluster = k % config.true_clusters;
    RngStream stream(seed, {StreamKind::kPopulation,
                            static_cast<std::uint64_t>(k) + 1, 0});
    ClientDataset& data = population.clients[k];
    data.cluster_truth = cluster;
    data.samples.reserve(config.samples_per_client);
    for (int i = 0; i < config.samples_per_client; ++i) {
      data.samples.push_back(DrawSample(population, cluster, stream));
    }
    population.truth[k] = cluster;
  }

  population.test_sets.resize(config.true_clusters);
  for (int c = 0; c < config.true_clusters; ++c) {
    RngStream stream(seed, {StreamKind::kPopulation,
                            static_cast<std::uint64_t>(c), 1});
    for (int i = 0; i < config.test_samples_per_cluster; ++i) {
      population.test_sets[c].push_back(DrawSample(population, c, stream));
    }
  }
  return population;
}

std::vector<Sample> DrawBaseSamples(const Population& population,
                                    std::size_t count, RngStream& stream) {
  std::vector<Sample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(DrawSample(population, 0, stream));
  }
  return out;
}

}  // namespace pina
