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

#include "pina/sketch_init.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pina {
namespace {

constexpr int kMaxLloydIterations = 100;

double SquaredDistance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

std::size_t PickIndex(RngStream& stream, std::size_t n) {
  const auto i = static_cast<std::size_t>(stream.Uniform() * n);
  return std::min(i, n - 1);
}

// k-means++ seeding: first centre uniform, the rest proportional to the
// squared distance from the nearest chosen centre.
std::vector<std::vector<double>> SeedCentroids(
    const std::vector<std::vector<double>>& points, int k, RngStream& stream) {
  const std::size_t n = points.size();
  std::vector<std::vector<double>> centroids;
  centroids.push_back(points[PickIndex(stream, n)]);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  while (static_cast<int>(centroids.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] =
          std::min(nearest[i], SquaredDistance(points[i], centroids.back()));
      total += nearest[i];
    }
    std::size_t chosen = 0;
    if (total > 0.0) {
      const double target = stream.Uniform() * total;
      double acc = 0.0;
      chosen = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += nearest[i];
        if (acc > target) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = PickIndex(stream, n);
    }
    centroids.push_back(points[chosen]);
  }
  return centroids;
}

}  // namespace

std::vector<double> Sketch::Densify() const {
  std::vector<double> dense(dim, 0.0);
  for (const auto& e : entries) dense.at(e.index) = e.value;
  return dense;
}

Sketch FilterTop2(const ParamVector& update, std::size_t client_id) {
  auto v = update.values();
  std::vector<std::size_t> positive;
  std::vector<std::size_t> negative;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] > 0.0) positive.push_back(i);
    if (v[i] < 0.0) negative.push_back(i);
  }
  auto by_magnitude = [&](std::size_t a, std::size_t b) {
    const double ma = std::abs(v[a]);
    const double mb = std::abs(v[b]);
    return ma != mb ? ma > mb : a < b;
  };
  const std::size_t keep = kSketchNonZeros / 2;
  auto take = [&](std::vector<std::size_t>& idx) {
    const std::size_t m = std::min(keep, idx.size());
    std::partial_sort(idx.begin(), idx.begin() + m, idx.end(), by_magnitude);
    idx.resize(m);
  };
  take(positive);
  take(negative);

  Sketch sketch;
  sketch.dim = v.size();
  sketch.client_id = client_id;
  for (std::size_t i : positive) sketch.entries.push_back({i, v[i]});
  for (std::size_t i : negative) sketch.entries.push_back({i, v[i]});
  std::sort(sketch.entries.begin(), sketch.entries.end(),
            [](const SketchEntry& a, const SketchEntry& b) {
              return a.index < b.index;
            });
  return sketch;
}

double Stage1Threshold(double clip, std::size_t n, std::size_t h) {
  if (n < 1 || n > h) {
    throw std::invalid_argument("Stage1Threshold: requires 1 <= n <= h");
  }
  if (!(clip > 0.0)) throw std::invalid_argument("Stage1Threshold: clip <= 0");
  return std::sqrt(static_cast<double>(n) / static_cast<double>(h)) * clip;
}

Sketch PrivatizeSketch(const Sketch& sketch, double z, double clip_init,
                       RngStream& stream) {
  if (!(z >= 0.0)) throw std::invalid_argument("PrivatizeSketch: z < 0");
  if (!(clip_init > 0.0)) {
    throw std::invalid_argument("PrivatizeSketch: clip_init <= 0");
  }
  std::vector<double> values;
  values.reserve(sketch.entries.size());
  for (const auto& e : sketch.entries) values.push_back(e.value);
  Sketch out = sketch;
  if (values.empty()) return out;
  const ParamVector clipped =
      Clip(ParamVector::FromValues(std::move(values)), clip_init);
  const double sigma = z * clip_init;
  for (std::size_t i = 0; i < out.entries.size(); ++i) {
    const double noise = sigma > 0.0 ? sigma * stream.Gaussian() : 0.0;
    out.entries[i].value = clipped[i] + noise;
  }
  return out;
}

PrototypeSet KMeansCluster(std::span<const Sketch> sketches, int num_clusters,
                           RngStream& stream) {
  if (num_clusters < 1) {
    throw std::invalid_argument("KMeansCluster: need at least one cluster");
  }
  if (sketches.size() < static_cast<std::size_t>(num_clusters)) {
    throw std::invalid_argument("KMeansCluster: fewer sketches than clusters");
  }
  const std::size_t dim = sketches.front().dim;
  std::vector<std::vector<double>> points;
  points.reserve(sketches.size());
  for (const auto& s : sketches) {
    if (s.dim != dim) {
      throw std::invalid_argument("KMeansCluster: sketch dims differ");
    }
    points.push_back(s.Densify());
  }
  const std::size_t n = points.size();
  const auto k = static_cast<std::size_t>(num_clusters);

  PrototypeSet result;
  result.centroids = SeedCentroids(points, num_clusters, stream);
  std::vector<int> labels(n, -1);
  for (int iter = 0; iter < kMaxLloydIterations; ++iter) {
    bool changed = false;
    double objective = 0.0;
    std::vector<double> own_distance(n);
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = SquaredDistance(points[i], result.centroids[0]);
      for (std::size_t c = 1; c < k; ++c) {
        const double d = SquaredDistance(points[i], result.centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      if (labels[i] != best) changed = true;
      labels[i] = best;
      own_distance[i] = best_d;
      objective += best_d;
    }
    result.objective_history.push_back(objective);
    result.iterations = iter + 1;
    if (!changed) break;

    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(labels[i]);
      ++counts[c];
      for (std::size_t j = 0; j < dim; ++j) sums[c][j] += points[i][j];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // Empty cluster: restart it at the worst-served point.
        const auto far = static_cast<std::size_t>(
            std::max_element(own_distance.begin(), own_distance.end()) -
            own_distance.begin());
        result.centroids[c] = points[far];
        own_distance[far] = 0.0;
        continue;
      }
      for (std::size_t j = 0; j < dim; ++j) {
        result.centroids[c][j] = sums[c][j] / static_cast<double>(counts[c]);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    result.assignment[sketches[i].client_id] = labels[i];
  }
  result.labels = std::move(labels);
  return result;
}

std::vector<ParamVector> MaterializeClusterModels(
    const PrototypeSet& prototypes, const ParamVector& base,
    std::span<const std::string> init_segments) {
  auto sub = std::make_shared<const Layout>(base.layout().Select(init_segments));
  std::vector<ParamVector> models;
  models.reserve(prototypes.centroids.size());
  for (const auto& centroid : prototypes.centroids) {
    if (centroid.size() != sub->size()) {
      throw std::invalid_argument(
          "MaterializeClusterModels: centroid dimension mismatch");
    }
    models.push_back(base.AddSegments(ParamVector(sub, centroid)));
  }
  return models;
}

}  // namespace pina
