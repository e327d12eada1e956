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

// Desk-scale client model:
//
//   x -> tanh(W0 x) -> tanh((Wv + B1 A1 + B A) h1) -> head -> softmax
//
// W0 and Wv are frozen and shared by every client. (B1, A1) is the rank-1
// adapter trained during cluster initialization; (B, A) is the rank-r
// adapter trained alongside the linear head afterwards.

#ifndef PINA_MODEL_H_
#define PINA_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pina/numeric.h"

namespace pina {

inline constexpr char kHeadWeight[] = "head.weight";
inline constexpr char kHeadBias[] = "head.bias";
inline constexpr char kInitAdapterB[] = "init_adapter.B";
inline constexpr char kInitAdapterA[] = "init_adapter.A";
inline constexpr char kAdapterB[] = "adapter.B";
inline constexpr char kAdapterA[] = "adapter.A";

struct ModelShape {
  int input_dim = 16;
  int hidden_dim = 32;
  int num_classes = 4;
  int init_rank = 1;
  int adapter_rank = 4;

  void Validate() const;
};

class FrozenBackbone {
 public:
  // Entries of W0 and Wv are N(0, 1/fan_in), drawn from `stream`.
  static FrozenBackbone Create(const ModelShape& shape, RngStream& stream);

  const ModelShape& shape() const { return shape_; }
  // Row-major hidden x input.
  std::span<const double> input_weights() const { return w0_; }
  // Row-major hidden x hidden.
  std::span<const double> value_weights() const { return wv_; }
  static constexpr const char* activation() { return "tanh"; }

 private:
  FrozenBackbone(ModelShape shape, std::vector<double> w0,
                 std::vector<double> wv);

  ModelShape shape_;
  std::vector<double> w0_;
  std::vector<double> wv_;
};

struct Sample {
  std::vector<double> x;
  int label = 0;
};

struct ClientDataset {
  std::vector<Sample> samples;
  // Simulation metadata only; never read by the protocol.
  int cluster_truth = 0;
};

struct TrainConfig {
  int epochs = 10;
  int batch_size = 50;
  double learning_rate = 0.01;

  void Validate() const;
};

// Full parameter layout of the trainable/adapter state.
std::shared_ptr<const Layout> ModelLayout(const ModelShape& shape);

// Segments trained while building cluster sketches: the rank-1 adapter.
std::vector<std::string> InitStageSegments();
// Segments trained during clustered training: head plus rank-r adapter.
std::vector<std::string> TrainStageSegments();

// Fresh parameters: small Gaussian head, zero bias, B = 0 and Gaussian A for
// both adapters (so the adapters start as the zero map).
ParamVector InitialParams(const FrozenBackbone& backbone, RngStream& stream);

std::vector<double> Logits(const FrozenBackbone& backbone,
                           const ParamVector& params, const Sample& sample);

// Softmax cross-entropy of a single sample.
double ForwardLoss(const FrozenBackbone& backbone, const ParamVector& params,
                   const Sample& sample);

// Mean loss over the dataset. Throws std::invalid_argument when empty.
double EmpiricalLoss(const FrozenBackbone& backbone, const ParamVector& params,
                     std::span<const Sample> samples);
double EmpiricalLoss(const FrozenBackbone& backbone, const ParamVector& params,
                     const ClientDataset& data);

// Gradient of the mean loss over `batch` w.r.t. every parameter in the
// model layout.
ParamVector LossGradient(const FrozenBackbone& backbone,
                         const ParamVector& params,
                         std::span<const Sample> batch);

// Mini-batch SGD restricted to the segments in `trainable`. Batches are a
// fresh permutation per epoch drawn from `stream`; the last batch may be
// short. Coordinates outside `trainable` are returned bit-identical.
ParamVector LocalTrain(const FrozenBackbone& backbone,
                       const ParamVector& params,
                       std::span<const std::string> trainable,
                       const ClientDataset& data, const TrainConfig& cfg,
                       RngStream& stream);

// after - before; throws std::invalid_argument on layout mismatch.
ParamVector ModelDelta(const ParamVector& before, const ParamVector& after);

// Fraction of correctly classified samples.
double Accuracy(const FrozenBackbone& backbone, const ParamVector& params,
                std::span<const Sample> samples);

}  // namespace pina

#endif  // PINA_MODEL_H_
