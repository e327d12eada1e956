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

// Runs one configured experiment and lays its outputs out on disk:
//
//   <out>/metrics.jsonl   per-round records
//   <out>/summary.csv     one-row run summary
//   <out>/sketches.jsonl  optional stage-1 sketch dump
//   <out>/manifest.json   resolved config, seed, version, file names
//
// The manifest is written last, so its presence marks a complete run.

#ifndef PINA_RUNNER_H_
#define PINA_RUNNER_H_

#include <string>

#include "pina/metrics_io.h"
#include "pina/simulation.h"

namespace pina {

struct RunArtifacts {
  ExperimentResult result;
  std::string metrics_jsonl;
  std::string summary_csv;
  // Empty unless the run had an initialization stage.
  std::string sketches_jsonl;
};

// Generates the population from config.seed and runs the configured
// algorithm with `workers` client threads.
RunArtifacts RunExperiment(const ExperimentConfig& config, int workers);

struct RunOptions {
  std::string out_dir;
  int workers = 1;
  bool dump_sketches = false;
};

// Runs, writes every output atomically and returns the manifest. The
// in-memory result is stored in `result` when non-null.
RunManifest RunToDirectory(const ExperimentConfig& config,
                           const RunOptions& options,
                           ExperimentResult* result = nullptr);

// Re-runs the experiment described by a manifest file into `options.out_dir`.
RunManifest RerunManifest(const std::string& manifest_path,
                          const RunOptions& options);

}  // namespace pina

#endif  // PINA_RUNNER_H_
