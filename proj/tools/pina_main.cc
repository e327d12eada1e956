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

// Command-line front end.
//
//   pina run --config exp.yaml [--set privacy.epsilon=8]... [--out DIR]
//   pina run --manifest DIR/manifest.json --out DIR2
//   pina accountant --eps 2 --q 0.1 --rounds 30 [--clients 200 | --delta D]
//   pina accountant --z 1.3 --q 0.1 --rounds 30 --delta 1e-5 [--json]
//   pina compare --config exp.yaml --algorithms pina,pina-random-init
//                --seeds 1,2,3 [--out DIR]
//
// Exit status: 0 success, 1 runtime failure, 2 configuration error.
// PINA_OUTPUT_DIR sets the default output directory.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pina/config.h"
#include "pina/metrics_io.h"
#include "pina/privacy.h"
#include "pina/runner.h"
#include "pina/simulation.h"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

std::string DefaultOutputRoot() {
  const char* env = std::getenv("PINA_OUTPUT_DIR");
  return env != nullptr && *env != '\0' ? env : "pina_runs";
}

std::string RunDirName(const pina::ExperimentConfig& cfg) {
  return std::string(pina::AlgorithmName(cfg.algorithm)) + "-seed" +
         std::to_string(cfg.seed);
}

struct RunFlags {
  std::string config;
  std::string manifest;
  std::vector<std::string> overrides;
  std::string out;
  int workers = 1;
  bool dump_sketches = false;
};

int CmdRun(const RunFlags& flags) {
  if (flags.config.empty() == flags.manifest.empty()) {
    std::cerr << "run: give exactly one of --config or --manifest\n";
    return kExitConfig;
  }
  pina::RunOptions opts;
  opts.workers = flags.workers;
  opts.dump_sketches = flags.dump_sketches;
  if (!flags.manifest.empty()) {
    if (flags.out.empty()) {
      std::cerr << "run: --manifest requires --out\n";
      return kExitConfig;
    }
    opts.out_dir = flags.out;
    pina::RerunManifest(flags.manifest, opts);
    std::cout << "reproduced run into " << opts.out_dir << "\n";
    return 0;
  }
  const pina::ExperimentConfig cfg =
      pina::LoadConfigFile(flags.config, flags.overrides);
  opts.out_dir = flags.out.empty()
                     ? (std::filesystem::path(DefaultOutputRoot()) /
                        RunDirName(cfg))
                           .string()
                     : flags.out;
  const pina::RunManifest manifest = pina::RunToDirectory(cfg, opts);
  std::cout << "algorithm " << pina::AlgorithmName(cfg.algorithm) << ", seed "
            << cfg.seed << ", z = " << cfg.privacy.noise_multiplier << "\n";
  std::cout << pina::ReadFile(
      (std::filesystem::path(opts.out_dir) / manifest.outputs.at("summary"))
          .string());
  std::cout << "outputs in " << opts.out_dir << " ("
            << manifest.duration_seconds << " s)\n";
  return 0;
}

struct AccountantFlags {
  std::optional<double> eps;
  std::optional<double> z;
  std::optional<double> delta;
  std::optional<long> clients;
  double q = 0.1;
  int rounds = 1;
  int stage1 = 0;
  bool json = false;
};

int CmdAccountant(const AccountantFlags& f) {
  if (f.eps.has_value() == f.z.has_value()) {
    std::cerr << "accountant: give exactly one of --eps or --z\n";
    return kExitConfig;
  }
  double delta = 0.0;
  if (f.delta) {
    delta = *f.delta;
  } else if (f.clients && *f.clients > 0) {
    delta = pina::PrivacySpec::DefaultDelta(static_cast<std::size_t>(*f.clients));
  } else {
    std::cerr << "accountant: give --delta or --clients\n";
    return kExitConfig;
  }
  pina::CalibrationTarget target;
  target.delta = delta;
  target.q = f.q;
  target.rounds = f.rounds;
  target.stage1_participations = f.stage1;
  nlohmann::json out;
  out["delta"] = delta;
  out["q"] = f.q;
  out["rounds"] = f.rounds;
  out["stage1_participations"] = f.stage1;
  if (f.eps) {
    target.epsilon = *f.eps;
    try {
      const double z = pina::CalibrateNoiseMultiplier(target);
      out["epsilon"] = *f.eps;
      out["noise_multiplier"] = z;
      out["spent_epsilon"] = pina::SpentEpsilon(target, z);
    } catch (const std::runtime_error& e) {
      std::cerr << "accountant: calibration infeasible: " << e.what() << "\n";
      return kExitRuntime;
    }
  } else {
    target.epsilon = 1.0;
    out["noise_multiplier"] = *f.z;
    out["spent_epsilon"] = pina::SpentEpsilon(target, *f.z);
  }
  if (f.json) {
    std::cout << out.dump() << "\n";
  } else if (f.eps) {
    std::cout << "noise multiplier z = " << out["noise_multiplier"].dump()
              << " (spends epsilon = " << out["spent_epsilon"].dump()
              << " at delta = " << out["delta"].dump() << ")\n";
  } else {
    std::cout << "epsilon = " << out["spent_epsilon"].dump()
              << " at delta = " << out["delta"].dump() << "\n";
  }
  return 0;
}

struct CompareFlags {
  std::string config;
  std::vector<std::string> overrides;
  std::vector<std::string> algorithms;
  std::vector<std::uint64_t> seeds;
  std::string out;
  int workers = 1;
};

int CmdCompare(const CompareFlags& f) {
  if (f.algorithms.empty() || f.seeds.empty()) {
    std::cerr << "compare: need at least one algorithm and one seed\n";
    return kExitConfig;
  }
  std::vector<pina::Algorithm> algorithms;
  for (const auto& name : f.algorithms) {
    try {
      algorithms.push_back(pina::ParseAlgorithm(name));
    } catch (const std::invalid_argument& e) {
      std::cerr << "compare: " << e.what() << "\n";
      return kExitConfig;
    }
  }
  const std::string out_dir =
      f.out.empty()
          ? (std::filesystem::path(DefaultOutputRoot()) / "compare").string()
          : f.out;
  std::vector<pina::CompareSeries> series;
  bool failed = false;
  for (pina::Algorithm algorithm : algorithms) {
    pina::CompareSeries s;
    s.algorithm = algorithm;
    for (std::uint64_t seed : f.seeds) {
      std::vector<std::string> overrides = f.overrides;
      overrides.push_back("algorithm=" +
                          std::string(pina::AlgorithmName(algorithm)));
      overrides.push_back("seed=" + std::to_string(seed));
      const pina::ExperimentConfig cfg =
          pina::LoadConfigFile(f.config, overrides);
      pina::RunOptions opts;
      opts.workers = f.workers;
      opts.out_dir =
          (std::filesystem::path(out_dir) / RunDirName(cfg)).string();
      try {
        pina::ExperimentResult result;
        pina::RunToDirectory(cfg, opts, &result);
        s.runs.push_back(std::move(result));
      } catch (const std::exception& e) {
        std::cerr << "compare: " << RunDirName(cfg) << " failed: " << e.what()
                  << "\n";
        failed = true;
      }
      std::cerr << "finished " << RunDirName(cfg) << "\n";
    }
    series.push_back(std::move(s));
  }
  const std::string csv_path =
      (std::filesystem::path(out_dir) / "compare.csv").string();
  pina::WriteFileAtomic(csv_path, pina::CompareCsv(series));
  std::cout << "wrote " << csv_path << "\n";
  return failed ? kExitRuntime : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clustered federated learning simulator with differential "
               "privacy"};
  app.require_subcommand(1);

  RunFlags run;
  CLI::App* run_cmd = app.add_subcommand("run", "Run one experiment");
  run_cmd->add_option("--config", run.config, "YAML experiment config");
  run_cmd->add_option("--manifest", run.manifest,
                      "Reproduce the run described by a manifest.json");
  run_cmd->add_option("--set", run.overrides,
                      "Override a config field, e.g. privacy.epsilon=8");
  run_cmd->add_option("--out", run.out, "Output directory");
  run_cmd->add_option("--workers", run.workers, "Client training threads")
      ->check(CLI::PositiveNumber);
  run_cmd->add_flag("--dump-sketches", run.dump_sketches,
                    "Write the initialization sketches as JSONL");

  AccountantFlags acct;
  CLI::App* acct_cmd =
      app.add_subcommand("accountant", "Calibrate z or report spent epsilon");
  acct_cmd->add_option("--eps", acct.eps, "Target epsilon (prints z)");
  acct_cmd->add_option("--z", acct.z, "Noise multiplier (prints epsilon)");
  acct_cmd->add_option("--delta", acct.delta, "Target delta");
  acct_cmd->add_option("--clients", acct.clients,
                       "Population size; delta defaults to 1/K^1.1");
  acct_cmd->add_option("--q", acct.q, "Sampling rate")->check(
      CLI::Range(0.0, 1.0));
  acct_cmd->add_option("--rounds", acct.rounds, "Subsampled rounds")
      ->check(CLI::NonNegativeNumber);
  acct_cmd->add_option("--stage1", acct.stage1,
                       "Unsubsampled sketch releases per client")
      ->check(CLI::NonNegativeNumber);
  acct_cmd->add_flag("--json", acct.json, "Print JSON");

  CompareFlags cmp;
  CLI::App* cmp_cmd = app.add_subcommand(
      "compare", "Run algorithms over seeds and merge accuracy curves");
  cmp_cmd->add_option("--config", cmp.config, "YAML experiment config")
      ->required();
  cmp_cmd->add_option("--set", cmp.overrides, "Override a config field");
  cmp_cmd->add_option("--algorithms", cmp.algorithms, "Comma separated")
      ->delimiter(',')
      ->required();
  cmp_cmd->add_option("--seeds", cmp.seeds, "Comma separated")
      ->delimiter(',')
      ->required();
  cmp_cmd->add_option("--out", cmp.out, "Output directory");
  cmp_cmd->add_option("--workers", cmp.workers, "Client training threads")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run_cmd) return CmdRun(run);
    if (*acct_cmd) return CmdAccountant(acct);
    if (*cmp_cmd) return CmdCompare(cmp);
  } catch (const pina::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
