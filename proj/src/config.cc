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

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <vector>

#include "pina/model.h"
#include "pina/privacy.h"
#include "pina/sketch_init.h"

namespace pina {
namespace {

int LineOf(const YAML::Node& node) {
  const YAML::Mark mark = node.Mark();
  return mark.line >= 0 ? mark.line + 1 : 0;
}

std::string FormatDouble(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, res.ptr);
  // Keep floats recognizable as such in the emitted YAML.
  if (s.find_first_of(".en") == std::string::npos) s += ".0";
  return s;
}

// Walks one YAML mapping, remembering which keys were read so leftovers can
// be reported as unknown.
class Section {
 public:
  Section(YAML::Node node, std::string path, int fallback_line)
      : node_(std::move(node)), path_(std::move(path)) {
    line_ = node_ ? LineOf(node_) : fallback_line;
    if (node_ && !node_.IsMap()) {
      throw ConfigError(path_, line_, "'" + path_ + "' must be a mapping");
    }
  }

  std::string FieldName(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  YAML::Node Child(const std::string& key) {
    seen_.insert(key);
    if (!node_) return YAML::Node();
    return node_[key];
  }

  Section Sub(const std::string& key) {
    return Section(Child(key), FieldName(key), line_);
  }

  template <typename T>
  std::optional<T> Read(const std::string& key, bool required,
                        const char* type_name) {
    YAML::Node child = Child(key);
    if (!child || child.IsNull()) {
      if (required) {
        throw ConfigError(FieldName(key), line_,
                          "missing required field '" + FieldName(key) + "'");
      }
      return std::nullopt;
    }
    if (!child.IsScalar()) {
      throw ConfigError(FieldName(key), LineOf(child),
                        "'" + FieldName(key) + "' must be " + type_name);
    }
    try {
      return child.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(FieldName(key), LineOf(child),
                        "'" + FieldName(key) + "' must be " + type_name +
                            ", got '" + child.Scalar() + "'");
    }
  }

  int Int(const std::string& key, int fallback, bool required = false) {
    return Read<int>(key, required, "an integer").value_or(fallback);
  }
  double Real(const std::string& key, double fallback) {
    return Read<double>(key, false, "a number").value_or(fallback);
  }
  // nullopt for "auto" or an absent key.
  std::optional<double> RealOrAuto(const std::string& key) {
    YAML::Node child = Child(key);
    if (child && child.IsScalar() && child.Scalar() == "auto") {
      return std::nullopt;
    }
    seen_.erase(key);
    return Read<double>(key, false, "a number or 'auto'");
  }

  void RejectUnknown() const {
    if (!node_) return;
    for (const auto& kv : node_) {
      const std::string key = kv.first.Scalar();
      if (!seen_.count(key)) {
        throw ConfigError(FieldName(key), LineOf(kv.first),
                          "unknown field '" + FieldName(key) + "'");
      }
    }
  }

  int line() const { return line_; }

 private:
  YAML::Node node_;
  std::string path_;
  int line_ = 0;
  std::set<std::string> seen_;
};

void ApplyOverride(YAML::Node& root, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError(spec, 0, "override '" + spec + "' must be path=value");
  }
  const std::string path = spec.substr(0, eq);
  const std::string value = spec.substr(eq + 1);
  std::vector<std::string> parts;
  std::stringstream ss(path);
  for (std::string part; std::getline(ss, part, '.');) {
    if (part.empty()) {
      throw ConfigError(path, 0, "override path '" + path + "' is malformed");
    }
    parts.push_back(part);
  }
  YAML::Node parsed;
  try {
    parsed = YAML::Load(value);
  } catch (const YAML::Exception& e) {
    throw ConfigError(path, 0, "override value for '" + path +
                                   "' does not parse: " + e.what());
  }
  YAML::Node cur;
  cur.reset(root);
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    YAML::Node next = cur[parts[i]];
    if (next && !next.IsMap() && !next.IsNull()) {
      throw ConfigError(path, 0, "'" + parts[i] + "' is not a section");
    }
    if (!next || next.IsNull()) cur[parts[i]] = YAML::Node(YAML::NodeType::Map);
    YAML::Node child = cur[parts[i]];
    cur.reset(child);
  }
  cur[parts.back()] = parsed;
}

ExperimentConfig FromYaml(YAML::Node root) {
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  Section top(root, "", 1);
  ExperimentConfig cfg;

  {
    YAML::Node alg = top.Child("algorithm");
    top.Read<std::string>("algorithm", true, "a string");
    try {
      cfg.algorithm = ParseAlgorithm(alg.Scalar());
    } catch (const std::invalid_argument& e) {
      throw ConfigError("algorithm", LineOf(alg), e.what());
    }
  }
  cfg.seed = *top.Read<std::uint64_t>("seed", true, "a non-negative integer");
  cfg.num_clusters = top.Int("clusters", 0, /*required=*/true);

  Section rounds = top.Sub("rounds");
  if (!top.Child("rounds")) {
    throw ConfigError("rounds", top.line(), "missing required field 'rounds'");
  }
  cfg.privacy.t_in = rounds.Int("init", 0, true);
  cfg.privacy.t_tr = rounds.Int("train", 0, true);
  cfg.t_no = rounds.Int("normalize", cfg.t_no);
  rounds.RejectUnknown();

  Section train = top.Sub("train");
  cfg.train.epochs = train.Int("epochs", cfg.train.epochs);
  cfg.train.batch_size = train.Int("batch_size", cfg.train.batch_size);
  cfg.train.learning_rate = train.Real("learning_rate",
                                       cfg.train.learning_rate);
  train.RejectUnknown();

  Section model = top.Sub("model");
  cfg.model.input_dim = model.Int("input_dim", cfg.model.input_dim);
  cfg.model.hidden_dim = model.Int("hidden_dim", cfg.model.hidden_dim);
  cfg.model.num_classes = model.Int("num_classes", cfg.model.num_classes);
  cfg.model.init_rank = model.Int("init_rank", cfg.model.init_rank);
  cfg.model.adapter_rank = model.Int("adapter_rank", cfg.model.adapter_rank);
  cfg.warmup_epochs = model.Int("warmup_epochs", cfg.warmup_epochs);
  cfg.warmup_samples = model.Int("warmup_samples", cfg.warmup_samples);
  model.RejectUnknown();

  Section pop = top.Sub("population");
  cfg.population.input_dim = cfg.model.input_dim;
  cfg.population.num_classes = cfg.model.num_classes;
  cfg.population.true_clusters =
      pop.Int("true_clusters", cfg.population.true_clusters);
  cfg.population.clients_per_cluster =
      pop.Int("clients_per_cluster", cfg.population.clients_per_cluster);
  cfg.population.samples_per_client =
      pop.Int("samples_per_client", cfg.population.samples_per_client);
  cfg.population.test_samples_per_cluster = pop.Int(
      "test_samples_per_cluster", cfg.population.test_samples_per_cluster);
  cfg.population.class_separation =
      pop.Real("class_separation", cfg.population.class_separation);
  pop.RejectUnknown();

  cfg.random_init_scale = top.Real("random_init_scale", cfg.random_init_scale);
  cfg.shapiro_cap = static_cast<std::size_t>(
      top.Int("shapiro_cap", static_cast<int>(cfg.shapiro_cap)));

  Section privacy = top.Sub("privacy");
  PrivacySpec& p = cfg.privacy;
  p.epsilon = privacy.Real("epsilon", p.epsilon);
  p.q = privacy.Real("sampling_rate", p.q);
  p.clip = privacy.Real("clip", p.clip);
  cfg.virtual_cohort = privacy.Real("virtual_cohort", cfg.virtual_cohort);
  const std::optional<double> delta = privacy.RealOrAuto("delta");
  const std::optional<double> clip_init = privacy.RealOrAuto("clip_init");
  const std::optional<double> z = privacy.RealOrAuto("noise_multiplier");
  privacy.RejectUnknown();
  top.RejectUnknown();

  const int line = privacy.line();
  const int clients = cfg.population.num_clients();
  if (clients < 1) {
    throw ConfigError("population", pop.line(),
                      "population must contain at least one client");
  }
  p.delta = delta ? *delta
                  : PrivacySpec::DefaultDelta(static_cast<std::size_t>(clients));
  if (clip_init) {
    p.clip_init = *clip_init;
  } else {
    const auto dim = static_cast<std::size_t>(2 * cfg.model.hidden_dim *
                                              cfg.model.init_rank);
    try {
      p.clip_init = Stage1Threshold(p.clip, kSketchNonZeros, dim);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("privacy.clip_init", line, e.what());
    }
  }
  if (z) {
    p.noise_multiplier = *z;
  } else {
    CalibrationTarget target;
    target.epsilon = p.epsilon;
    target.delta = p.delta;
    target.q = p.q;
    target.rounds = p.t_tr;
    target.stage1_participations = p.t_in > 0 ? 1 : 0;
    try {
      p.noise_multiplier = CalibrateNoiseMultiplier(target);
    } catch (const std::exception& e) {
      throw ConfigError("privacy.noise_multiplier", line,
                        std::string("cannot calibrate: ") + e.what());
    }
  }

  try {
    cfg.Validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("", 1, std::string("invalid configuration: ") + e.what());
  }
  return cfg;
}

}  // namespace

ConfigError::ConfigError(std::string field, int line,
                         const std::string& message)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " +
                                        message
                                  : message),
      field_(std::move(field)),
      line_(line) {}

ExperimentConfig ParseConfig(std::string_view yaml,
                             std::span<const std::string> overrides) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml));
  } catch (const YAML::ParserException& e) {
    throw ConfigError("", e.mark.line + 1, e.msg);
  }
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  if (!root.IsMap()) throw ConfigError("", 1, "config must be a mapping");
  for (const auto& o : overrides) ApplyOverride(root, o);
  return FromYaml(root);
}

ExperimentConfig LoadConfigFile(const std::string& path,
                                std::span<const std::string> overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", 0, "cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return ParseConfig(buffer.str(), overrides);
  } catch (const ConfigError& e) {
    throw ConfigError(e.field(), e.line(), path + ": " + e.what());
  }
}

std::string EmitConfig(const ExperimentConfig& c) {
  const PrivacySpec& p = c.privacy;
  std::ostringstream out;
  out << "algorithm: " << AlgorithmName(c.algorithm) << "\n"
      << "seed: " << c.seed << "\n"
      << "clusters: " << c.num_clusters << "\n"
      << "rounds:\n"
      << "  init: " << p.t_in << "\n"
      << "  train: " << p.t_tr << "\n"
      << "  normalize: " << c.t_no << "\n"
      << "privacy:\n"
      << "  epsilon: " << FormatDouble(p.epsilon) << "\n"
      << "  delta: " << FormatDouble(p.delta) << "\n"
      << "  sampling_rate: " << FormatDouble(p.q) << "\n"
      << "  clip: " << FormatDouble(p.clip) << "\n"
      << "  clip_init: " << FormatDouble(p.clip_init) << "\n"
      << "  noise_multiplier: " << FormatDouble(p.noise_multiplier) << "\n"
      << "  virtual_cohort: " << FormatDouble(c.virtual_cohort) << "\n"
      << "train:\n"
      << "  epochs: " << c.train.epochs << "\n"
      << "  batch_size: " << c.train.batch_size << "\n"
      << "  learning_rate: " << FormatDouble(c.train.learning_rate) << "\n"
      << "model:\n"
      << "  input_dim: " << c.model.input_dim << "\n"
      << "  hidden_dim: " << c.model.hidden_dim << "\n"
      << "  num_classes: " << c.model.num_classes << "\n"
      << "  init_rank: " << c.model.init_rank << "\n"
      << "  adapter_rank: " << c.model.adapter_rank << "\n"
      << "  warmup_epochs: " << c.warmup_epochs << "\n"
      << "  warmup_samples: " << c.warmup_samples << "\n"
      << "population:\n"
      << "  true_clusters: " << c.population.true_clusters << "\n"
      << "  clients_per_cluster: " << c.population.clients_per_cluster << "\n"
      << "  samples_per_client: " << c.population.samples_per_client << "\n"
      << "  test_samples_per_cluster: "
      << c.population.test_samples_per_cluster << "\n"
      << "  class_separation: " << FormatDouble(c.population.class_separation)
      << "\n"
      << "random_init_scale: " << FormatDouble(c.random_init_scale) << "\n"
      << "shapiro_cap: " << c.shapiro_cap << "\n";
  return out.str();
}

bool SameConfig(const ExperimentConfig& a, const ExperimentConfig& b) {
  return EmitConfig(a) == EmitConfig(b) &&
         a.single_stage1_participation == b.single_stage1_participation;
}

}  // namespace pina
