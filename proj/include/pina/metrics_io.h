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

// Serialization of run outputs: per-round JSONL, summary and comparison
// CSV, sketch dumps and the run manifest. Nothing here records timing or
// host details except the manifest's duration field, so metric files are a
// pure function of the configuration.

#ifndef PINA_METRICS_IO_H_
#define PINA_METRICS_IO_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pina/simulation.h"

namespace pina {

inline constexpr char kPinaVersion[] = "0.1.0";

// Writes to a sibling temporary file and renames it into place. Throws
// std::runtime_error on I/O failure.
void WriteFileAtomic(const std::string& path, const std::string& content);
std::string ReadFile(const std::string& path);

// One JSON object per line, one line per training round.
std::string MetricsJsonl(const ExperimentConfig& config,
                         const ExperimentResult& result);
// Header plus one row describing the run.
std::string SummaryCsv(const ExperimentConfig& config,
                       const ExperimentResult& result);
// One line per sketch: client id, ground truth, k-means label, indices,
// values.
std::string SketchesJsonl(const Stage1Result& stage1);

// Training rounds needed for clustering accuracy to reach `target`: 0 when
// the starting models already do, -1 when no round does.
int RoundsToAccuracy(const ExperimentResult& result, double target);

struct RunManifest {
  std::string config_yaml;
  std::uint64_t seed = 0;
  std::string version = kPinaVersion;
  // Logical name ("metrics", "summary", ...) to file name.
  std::map<std::string, std::string> outputs;
  double duration_seconds = 0.0;
  int workers = 1;
};

std::string ManifestJson(const RunManifest& manifest);
// Throws std::runtime_error when required keys are missing.
RunManifest ParseManifest(const std::string& json);

struct CompareSeries {
  Algorithm algorithm = Algorithm::kPina;
  // One entry per seed.
  std::vector<ExperimentResult> runs;
};

// Rows: round x algorithm, with mean and sample standard deviation over
// seeds of clustering and test accuracy (std = 0 for a single seed).
std::string CompareCsv(std::span<const CompareSeries> series);

}  // namespace pina

#endif  // PINA_METRICS_IO_H_
