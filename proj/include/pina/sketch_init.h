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

// Cluster initialization from privatized update sketches.
//
// Each client keeps the two largest positive and the two largest negative
// coordinates of its adapter update, clips the four values and noises them
// locally, and ships (indices, values) to the server. The server densifies
// the sketches and runs k-means; centroids become additive shifts of the
// adapter segment of the shared base model.

#ifndef PINA_SKETCH_INIT_H_
#define PINA_SKETCH_INIT_H_

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pina/numeric.h"

namespace pina {

inline constexpr std::size_t kSketchNonZeros = 4;

struct SketchEntry {
  std::size_t index = 0;
  double value = 0.0;

  bool operator==(const SketchEntry&) const = default;
};

struct Sketch {
  std::size_t dim = 0;
  // Sorted by index, at most kSketchNonZeros entries.
  std::vector<SketchEntry> entries;
  std::size_t client_id = 0;

  std::vector<double> Densify() const;
};

struct PrototypeSet {
  std::vector<std::vector<double>> centroids;
  std::map<std::size_t, int> assignment;
  // Cluster of each input sketch, in input order.
  std::vector<int> labels;
  // k-means objective after each Lloyd assignment step.
  std::vector<double> objective_history;
  int iterations = 0;
};

// Two largest positive and two largest negative coordinates; ties go to the
// lower index.
Sketch FilterTop2(const ParamVector& update, std::size_t client_id = 0);

// sqrt(n / h) * clip. Throws std::invalid_argument unless 1 <= n <= h.
double Stage1Threshold(double clip, std::size_t n, std::size_t h);

// Clips the entry values jointly to clip_init, then adds N(0, (z clip_init)^2)
// to each retained entry. Indices are released unchanged.
Sketch PrivatizeSketch(const Sketch& sketch, double z, double clip_init,
                       RngStream& stream);

// k-means++ seeding followed by Lloyd iterations on densified sketches until
// the assignment is a fixpoint or 100 iterations pass. Throws
// std::invalid_argument when there are fewer sketches than clusters.
PrototypeSet KMeansCluster(std::span<const Sketch> sketches, int num_clusters,
                           RngStream& stream);

// One model per centroid: `base` with the `init_segments` shifted by the
// centroid. Throws std::invalid_argument when centroid length does not match
// the total length of those segments.
std::vector<ParamVector> MaterializeClusterModels(
    const PrototypeSet& prototypes, const ParamVector& base,
    std::span<const std::string> init_segments);

}  // namespace pina

#endif  // PINA_SKETCH_INIT_H_
