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

#include "pina/runner.h"

#include <chrono>
#include <filesystem>
#include <memory>

#include "pina/config.h"
#include "pina/population.h"

namespace pina {
namespace {

constexpr char kMetricsFile[] = "metrics.jsonl";
constexpr char kSummaryFile[] = "summary.csv";
constexpr char kSketchesFile[] = "sketches.jsonl";
constexpr char kManifestFile[] = "manifest.json";

}  // namespace

RunArtifacts RunExperiment(const ExperimentConfig& config, int workers) {
  auto population = std::make_shared<const Population>(
      GeneratePopulation(config.population, config.seed));
  Simulator sim(config, population, workers);
  RunArtifacts out;
  out.result = sim.Run();
  out.metrics_jsonl = MetricsJsonl(config, out.result);
  out.summary_csv = SummaryCsv(config, out.result);
  if (out.result.stage1) out.sketches_jsonl = SketchesJsonl(*out.result.stage1);
  return out;
}

RunManifest RunToDirectory(const ExperimentConfig& config,
                           const RunOptions& options,
                           ExperimentResult* result) {
  namespace fs = std::filesystem;
  fs::create_directories(options.out_dir);
  const auto start = std::chrono::steady_clock::now();
  const RunArtifacts artifacts = RunExperiment(config, options.workers);
  const std::chrono::duration<double> elapsed =
      std::chrono::steady_clock::now() - start;

  const fs::path dir(options.out_dir);
  RunManifest manifest;
  manifest.config_yaml = EmitConfig(config);
  manifest.seed = config.seed;
  manifest.duration_seconds = elapsed.count();
  manifest.workers = options.workers;
  WriteFileAtomic((dir / kMetricsFile).string(), artifacts.metrics_jsonl);
  manifest.outputs["metrics"] = kMetricsFile;
  WriteFileAtomic((dir / kSummaryFile).string(), artifacts.summary_csv);
  manifest.outputs["summary"] = kSummaryFile;
  if (options.dump_sketches && artifacts.result.stage1) {
    WriteFileAtomic((dir / kSketchesFile).string(), artifacts.sketches_jsonl);
    manifest.outputs["sketches"] = kSketchesFile;
  }
  WriteFileAtomic((dir / kManifestFile).string(), ManifestJson(manifest));
  if (result != nullptr) *result = artifacts.result;
  return manifest;
}

RunManifest RerunManifest(const std::string& manifest_path,
                          const RunOptions& options) {
  const RunManifest manifest = ParseManifest(ReadFile(manifest_path));
  const ExperimentConfig config = ParseConfig(manifest.config_yaml);
  RunOptions opts = options;
  if (manifest.outputs.count("sketches")) opts.dump_sketches = true;
  return RunToDirectory(config, opts);
}

}  // namespace pina
