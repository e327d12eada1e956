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

#include "pina/metrics_io.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace pina {
namespace {

using nlohmann::json;

std::string Num(double v) {
  // nlohmann's shortest round-trip formatting, shared with the JSONL output.
  return json(v).dump();
}

void MeanStd(const std::vector<double>& xs, double& mean, double& std_dev) {
  mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  std_dev = 0.0;
  if (xs.size() < 2) return;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  std_dev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace

void WriteFileAtomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + tmp + "' for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write to '" + tmp + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot rename '" + tmp + "' to '" + path +
                             "': " + ec.message());
  }
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string MetricsJsonl(const ExperimentConfig& config,
                         const ExperimentResult& result) {
  std::string out;
  for (const RoundMetrics& m : result.rounds) {
    json j;
    j["algorithm"] = std::string(AlgorithmName(config.algorithm));
    j["seed"] = config.seed;
    j["round"] = m.round;
    j["global_round"] = m.global_round;
    j["phase"] = m.phase;
    j["cohort_size"] = m.cohort_size;
    j["selections"] = m.selections;
    j["clustering_accuracy"] = m.clustering_accuracy;
    j["cluster_test_accuracy"] = m.cluster_test_accuracy;
    j["mean_test_accuracy"] = m.mean_test_accuracy;
    j["norms_before"] = m.norms_before;
    j["norms_after"] = m.norms_after;
    j["shapiro_w"] = m.shapiro_w;
    j["epsilon"] = m.epsilon;
    out += j.dump();
    out += '\n';
  }
  return out;
}

int RoundsToAccuracy(const ExperimentResult& result, double target) {
  if (result.initial_clustering_accuracy >= target) return 0;
  for (const auto& m : result.rounds) {
    if (m.clustering_accuracy >= target) return m.round;
  }
  return -1;
}

std::string SummaryCsv(const ExperimentConfig& config,
                       const ExperimentResult& result) {
  std::ostringstream out;
  out << "algorithm,seed,clusters,rounds,noise_multiplier,"
         "initial_clustering_accuracy,stage1_ari,final_clustering_accuracy,"
         "final_mean_test_accuracy,final_epsilon,rounds_to_0.9\n";
  const RoundMetrics last =
      result.rounds.empty() ? RoundMetrics{} : result.rounds.back();
  out << AlgorithmName(config.algorithm) << ',' << config.seed << ','
      << config.num_clusters << ',' << result.rounds.size() << ','
      << Num(config.privacy.noise_multiplier) << ','
      << Num(result.initial_clustering_accuracy) << ','
      << (result.stage1 ? Num(result.stage1->adjusted_rand_index) : "") << ','
      << Num(last.clustering_accuracy) << ',' << Num(last.mean_test_accuracy)
      << ',' << Num(last.epsilon) << ','
      << RoundsToAccuracy(result, 0.9) << '\n';
  return out.str();
}

std::string SketchesJsonl(const Stage1Result& stage1) {
  std::string out;
  for (std::size_t i = 0; i < stage1.sketches.size(); ++i) {
    const Sketch& s = stage1.sketches[i];
    json j;
    j["client_id"] = s.client_id;
    j["truth"] = stage1.sketch_truth[i];
    j["label"] = stage1.prototypes.labels[i];
    std::vector<std::size_t> indices;
    std::vector<double> values;
    for (const auto& e : s.entries) {
      indices.push_back(e.index);
      values.push_back(e.value);
    }
    j["indices"] = indices;
    j["values"] = values;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string ManifestJson(const RunManifest& m) {
  json j;
  j["config"] = m.config_yaml;
  j["seed"] = m.seed;
  j["version"] = m.version;
  j["outputs"] = m.outputs;
  j["duration_seconds"] = m.duration_seconds;
  j["workers"] = m.workers;
  return j.dump(2) + "\n";
}

RunManifest ParseManifest(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("manifest is not valid JSON: ") +
                             e.what());
  }
  RunManifest m;
  try {
    m.config_yaml = j.at("config").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.version = j.value("version", std::string());
    m.outputs =
        j.value("outputs", std::map<std::string, std::string>());
    m.duration_seconds = j.value("duration_seconds", 0.0);
    m.workers = j.value("workers", 1);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

std::string CompareCsv(std::span<const CompareSeries> series) {
  std::ostringstream out;
  out << "round,algorithm,seeds,clustering_accuracy_mean,"
         "clustering_accuracy_std,test_accuracy_mean,test_accuracy_std\n";
  std::size_t max_rounds = 0;
  for (const auto& s : series) {
    for (const auto& run : s.runs) {
      max_rounds = std::max(max_rounds, run.rounds.size());
    }
  }
  for (std::size_t r = 0; r < max_rounds; ++r) {
    for (const auto& s : series) {
      std::vector<double> cluster;
      std::vector<double> test;
      for (const auto& run : s.runs) {
        if (r >= run.rounds.size()) continue;
        cluster.push_back(run.rounds[r].clustering_accuracy);
        test.push_back(run.rounds[r].mean_test_accuracy);
      }
      if (cluster.empty()) continue;
      double cm, cs, tm, ts;
      MeanStd(cluster, cm, cs);
      MeanStd(test, tm, ts);
      out << (r + 1) << ',' << AlgorithmName(s.algorithm) << ','
          << cluster.size() << ',' << Num(cm) << ',' << Num(cs) << ','
          << Num(tm) << ',' << Num(ts) << '\n';
    }
  }
  return out.str();
}

}  // namespace pina
