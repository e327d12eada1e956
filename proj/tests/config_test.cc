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

#include "pina/config.h"

#include <cmath>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "pina/privacy.h"
#include "pina/sketch_init.h"

namespace pina {
namespace {

constexpr char kMinimal[] =
    "algorithm: pina\n"
    "seed: 7\n"
    "clusters: 2\n"
    "rounds:\n"
    "  init: 10\n"
    "  train: 30\n";

ConfigError ExpectConfigError(const std::string& yaml,
                              std::vector<std::string> overrides = {}) {
  try {
    ParseConfig(yaml, overrides);
  } catch (const ConfigError& e) {
    return e;
  }
  ADD_FAILURE() << "expected ConfigError for:\n" << yaml;
  return ConfigError("", 0, "");
}

TEST(ConfigTest, MinimalConfigResolvesAutoValues) {
  const ExperimentConfig c = ParseConfig(kMinimal);
  EXPECT_EQ(c.algorithm, Algorithm::kPina);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.num_clusters, 2);
  EXPECT_EQ(c.privacy.t_in, 10);
  EXPECT_EQ(c.privacy.t_tr, 30);
  EXPECT_DOUBLE_EQ(c.privacy.delta, 1.0 / std::pow(200.0, 1.1));
  EXPECT_DOUBLE_EQ(c.privacy.clip_init,
                   Stage1Threshold(c.privacy.clip, kSketchNonZeros, 64));
  CalibrationTarget target;
  target.epsilon = c.privacy.epsilon;
  target.delta = c.privacy.delta;
  target.q = c.privacy.q;
  target.rounds = c.privacy.t_tr;
  target.stage1_participations = 1;
  EXPECT_EQ(c.privacy.noise_multiplier, CalibrateNoiseMultiplier(target));
  EXPECT_LE(SpentEpsilon(target, c.privacy.noise_multiplier), 2.0);
}

TEST(ConfigTest, MissingRequiredFieldNamesIt) {
  for (const std::string field : {"algorithm", "seed", "clusters"}) {
    std::string yaml;
    for (const std::string line :
         {"algorithm: pina\n", "seed: 1\n", "clusters: 2\n"}) {
      if (line.rfind(field, 0) != 0) yaml += line;
    }
    yaml += "rounds: {init: 2, train: 3}\n";
    const ConfigError e = ExpectConfigError(yaml);
    EXPECT_EQ(e.field(), field);
    EXPECT_NE(std::string(e.what()).find(field), std::string::npos);
  }
  const ConfigError e = ExpectConfigError(
      "algorithm: pina\nseed: 1\nclusters: 2\nrounds:\n  init: 3\n");
  EXPECT_EQ(e.field(), "rounds.train");
  EXPECT_EQ(e.line(), 5);
  EXPECT_NE(std::string(e.what()).find("line 5"), std::string::npos);
}

TEST(ConfigTest, UnknownAndMistypedFieldsAreRejected) {
  const ConfigError unknown =
      ExpectConfigError(std::string(kMinimal) + "privacy:\n  epsilonn: 3\n");
  EXPECT_EQ(unknown.field(), "privacy.epsilonn");
  EXPECT_EQ(unknown.line(), 8);
  const ConfigError typed =
      ExpectConfigError(std::string(kMinimal) + "train: {epochs: many}\n");
  EXPECT_EQ(typed.field(), "train.epochs");
  const ConfigError alg = ExpectConfigError(
      "algorithm: kmeans\nseed: 1\nclusters: 2\nrounds: {init: 1, train: 1}\n");
  EXPECT_EQ(alg.field(), "algorithm");
  EXPECT_EQ(alg.line(), 1);
  ExpectConfigError("[1, 2]\n");
  ExpectConfigError("algorithm: pina\n  seed: : 1\n");
}

TEST(ConfigTest, InvalidCombinationsAreRejected) {
  ExpectConfigError(std::string(kMinimal) + "privacy: {sampling_rate: 0.001}\n");
  ExpectConfigError(std::string(kMinimal) + "privacy: {epsilon: -1}\n");
  const ConfigError e = ExpectConfigError(
      "algorithm: pina\nseed: 1\nclusters: 2\nrounds: {init: 0, train: 3}\n");
  EXPECT_NE(std::string(e.what()).find("init"), std::string::npos);
}

TEST(ConfigTest, OverridesApplyBeforeValidation) {
  const std::vector<std::string> overrides = {
      "privacy.noise_multiplier=1.25", "seed=11", "algorithm=ifca-ldp",
      "population.clients_per_cluster=30", "train.learning_rate=0.05"};
  const ExperimentConfig c = ParseConfig(kMinimal, overrides);
  EXPECT_EQ(c.privacy.noise_multiplier, 1.25);
  EXPECT_EQ(c.seed, 11u);
  EXPECT_EQ(c.algorithm, Algorithm::kIfcaLdp);
  EXPECT_EQ(c.population.clients_per_cluster, 30);
  EXPECT_EQ(c.train.learning_rate, 0.05);
  EXPECT_DOUBLE_EQ(c.privacy.delta, 1.0 / std::pow(60.0, 1.1));
  const ConfigError bad = ExpectConfigError(kMinimal, {"seed"});
  EXPECT_EQ(bad.line(), 0);
  ExpectConfigError(kMinimal, {"seed.x=1"});
  ExpectConfigError(kMinimal, {"privacy.bogus=1"});
}

TEST(ConfigTest, EmitParsesBackToTheSameConfig) {
  for (const char* alg : {"pina", "pina-random-init", "ifca-ldp", "fedavg"}) {
    const ExperimentConfig c = ParseConfig(
        kMinimal,
        std::vector<std::string>{std::string("algorithm=") + alg,
                                 "privacy.epsilon=3.3",
                                 "privacy.sampling_rate=0.123456789012345",
                                 "population.class_separation=2.5"});
    const std::string yaml = EmitConfig(c);
    const ExperimentConfig back = ParseConfig(yaml);
    EXPECT_TRUE(SameConfig(c, back)) << yaml;
    EXPECT_EQ(back.privacy.noise_multiplier, c.privacy.noise_multiplier);
    EXPECT_EQ(back.privacy.q, c.privacy.q);
    EXPECT_EQ(EmitConfig(back), yaml);
  }
  ExperimentConfig other = ParseConfig(kMinimal);
  ExperimentConfig changed = other;
  changed.privacy.clip = 2.0;
  EXPECT_FALSE(SameConfig(other, changed));
}

TEST(ConfigTest, LoadConfigFileReportsThePath) {
  try {
    LoadConfigFile("/nonexistent/dir/config.yaml");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/config.yaml"),
              std::string::npos);
  }
}

}  // namespace
}  // namespace pina
