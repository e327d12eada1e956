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

#include "pina/model.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pina {
namespace {

// Forward-pass view of (backbone, params) with the adapters folded into the
// value weights.
class Network {
 public:
  Network(const FrozenBackbone& backbone, const ParamVector& params)
      : backbone_(backbone),
        h_(backbone.shape().hidden_dim),
        d_(backbone.shape().input_dim),
        l_(backbone.shape().num_classes) {
    if (params.size() != ModelLayout(backbone.shape())->size()) {
      throw std::invalid_argument("params do not match the model layout");
    }
    head_w_ = params.segment(kHeadWeight);
    head_b_ = params.segment(kHeadBias);
    effective_wv_.assign(backbone.value_weights().begin(),
                         backbone.value_weights().end());
    FoldAdapter(params.segment(kInitAdapterB), params.segment(kInitAdapterA),
                backbone.shape().init_rank);
    FoldAdapter(params.segment(kAdapterB), params.segment(kAdapterA),
                backbone.shape().adapter_rank);
  }

  struct Activations {
    std::vector<double> h1;
    std::vector<double> h2;
    std::vector<double> logits;
  };

  void Forward(const Sample& sample, Activations& act) const {
    if (static_cast<int>(sample.x.size()) != d_) {
      throw std::invalid_argument("sample dimension mismatch");
    }
    if (sample.label < 0 || sample.label >= l_) {
      throw std::invalid_argument("sample label out of range");
    }
    auto w0 = backbone_.input_weights();
    act.h1.resize(h_);
    for (int i = 0; i < h_; ++i) {
      double a = 0.0;
      for (int j = 0; j < d_; ++j) a += w0[i * d_ + j] * sample.x[j];
      act.h1[i] = std::tanh(a);
    }
    act.h2.resize(h_);
    for (int i = 0; i < h_; ++i) {
      double a = 0.0;
      for (int j = 0; j < h_; ++j) a += effective_wv_[i * h_ + j] * act.h1[j];
      act.h2[i] = std::tanh(a);
    }
    act.logits.resize(l_);
    for (int k = 0; k < l_; ++k) {
      double a = head_b_[k];
      for (int i = 0; i < h_; ++i) a += head_w_[k * h_ + i] * act.h2[i];
      act.logits[k] = a;
    }
  }

 private:
  void FoldAdapter(std::span<const double> b, std::span<const double> a,
                   int rank) {
    for (int i = 0; i < h_; ++i) {
      for (int k = 0; k < rank; ++k) {
        const double bik = b[i * rank + k];
        if (bik == 0.0) continue;
        for (int j = 0; j < h_; ++j) {
          effective_wv_[i * h_ + j] += bik * a[k * h_ + j];
        }
      }
    }
  }

  const FrozenBackbone& backbone_;
  int h_;
  int d_;
  int l_;
  std::span<const double> head_w_;
  std::span<const double> head_b_;
  std::vector<double> effective_wv_;
};

double LogSumExp(std::span<const double> v) {
  const double m = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

void AdapterGradient(std::span<const double> g, std::span<const double> b,
                     std::span<const double> a, int h, int rank,
                     std::span<double> grad_b, std::span<double> grad_a) {
  // dB = G A^T, dA = B^T G.
  for (int i = 0; i < h; ++i) {
    for (int k = 0; k < rank; ++k) {
      double s = 0.0;
      for (int j = 0; j < h; ++j) s += g[i * h + j] * a[k * h + j];
      grad_b[i * rank + k] = s;
    }
  }
  for (int k = 0; k < rank; ++k) {
    for (int j = 0; j < h; ++j) {
      double s = 0.0;
      for (int i = 0; i < h; ++i) s += b[i * rank + k] * g[i * h + j];
      grad_a[k * h + j] = s;
    }
  }
}

}  // namespace

void ModelShape::Validate() const {
  if (input_dim < 1 || hidden_dim < 1 || num_classes < 2 || init_rank < 1 ||
      adapter_rank < 1) {
    throw std::invalid_argument("ModelShape: invalid dimensions");
  }
}

void TrainConfig::Validate() const {
  if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs < 1");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch < 1");
  if (!(learning_rate >= 0.0)) {
    throw std::invalid_argument("TrainConfig: learning rate < 0");
  }
}

FrozenBackbone::FrozenBackbone(ModelShape shape, std::vector<double> w0,
                               std::vector<double> wv)
    : shape_(shape), w0_(std::move(w0)), wv_(std::move(wv)) {}

FrozenBackbone FrozenBackbone::Create(const ModelShape& shape,
                                      RngStream& stream) {
  shape.Validate();
  const int h = shape.hidden_dim;
  const int d = shape.input_dim;
  std::vector<double> w0(static_cast<std::size_t>(h) * d);
  const double s0 = 1.0 / std::sqrt(static_cast<double>(d));
  for (double& w : w0) w = s0 * stream.Gaussian();
  std::vector<double> wv(static_cast<std::size_t>(h) * h);
  const double sv = 1.0 / std::sqrt(static_cast<double>(h));
  for (double& w : wv) w = sv * stream.Gaussian();
  return FrozenBackbone(shape, std::move(w0), std::move(wv));
}

std::shared_ptr<const Layout> ModelLayout(const ModelShape& shape) {
  const std::size_t h = shape.hidden_dim;
  const std::size_t l = shape.num_classes;
  const std::size_t r1 = shape.init_rank;
  const std::size_t r = shape.adapter_rank;
  return std::make_shared<const Layout>(
      std::vector<std::pair<std::string, std::size_t>>{
          {kHeadWeight, l * h},
          {kHeadBias, l},
          {kInitAdapterB, h * r1},
          {kInitAdapterA, r1 * h},
          {kAdapterB, h * r},
          {kAdapterA, r * h},
      });
}

std::vector<std::string> InitStageSegments() {
  return {kInitAdapterB, kInitAdapterA};
}

std::vector<std::string> TrainStageSegments() {
  return {kHeadWeight, kHeadBias, kAdapterB, kAdapterA};
}

ParamVector InitialParams(const FrozenBackbone& backbone, RngStream& stream) {
  const ModelShape& shape = backbone.shape();
  auto layout = ModelLayout(shape);
  std::vector<double> values(layout->size(), 0.0);
  const double scale = 1.0 / std::sqrt(static_cast<double>(shape.hidden_dim));
  auto fill = [&](const char* name) {
    const Segment& s = layout->segment(name);
    for (std::size_t i = 0; i < s.length; ++i) {
      values[s.offset + i] = scale * stream.Gaussian();
    }
  };
  fill(kHeadWeight);
  fill(kInitAdapterA);
  fill(kAdapterA);
  return ParamVector(std::move(layout), std::move(values));
}

std::vector<double> Logits(const FrozenBackbone& backbone,
                           const ParamVector& params, const Sample& sample) {
  Network net(backbone, params);
  Network::Activations act;
  net.Forward(sample, act);
  return act.logits;
}

double ForwardLoss(const FrozenBackbone& backbone, const ParamVector& params,
                   const Sample& sample) {
  const std::vector<double> logits = Logits(backbone, params, sample);
  return std::max(0.0, LogSumExp(logits) - logits[sample.label]);
}

double EmpiricalLoss(const FrozenBackbone& backbone, const ParamVector& params,
                     std::span<const Sample> samples) {
  if (samples.empty()) {
    throw std::invalid_argument("EmpiricalLoss: empty dataset");
  }
  Network net(backbone, params);
  Network::Activations act;
  double total = 0.0;
  for (const Sample& s : samples) {
    net.Forward(s, act);
    total += std::max(0.0, LogSumExp(act.logits) - act.logits[s.label]);
  }
  return total / static_cast<double>(samples.size());
}

double EmpiricalLoss(const FrozenBackbone& backbone, const ParamVector& params,
                     const ClientDataset& data) {
  return EmpiricalLoss(backbone, params, std::span<const Sample>(data.samples));
}

ParamVector LossGradient(const FrozenBackbone& backbone,
                         const ParamVector& params,
                         std::span<const Sample> batch) {
  if (batch.empty()) throw std::invalid_argument("LossGradient: empty batch");
  const ModelShape& shape = backbone.shape();
  const int h = shape.hidden_dim;
  const int l = shape.num_classes;
  const Layout& layout = params.layout();

  Network net(backbone, params);
  Network::Activations act;
  auto head_w = params.segment(kHeadWeight);

  std::vector<double> grad(params.size(), 0.0);
  const Segment& gw = layout.segment(kHeadWeight);
  const Segment& gb = layout.segment(kHeadBias);
  // Gradient w.r.t. the effective value weights, summed over the batch.
  std::vector<double> g_wv(static_cast<std::size_t>(h) * h, 0.0);
  std::vector<double> dlogits(l);
  std::vector<double> da2(h);

  for (const Sample& s : batch) {
    net.Forward(s, act);
    const double lse = LogSumExp(act.logits);
    for (int k = 0; k < l; ++k) {
      dlogits[k] = std::exp(act.logits[k] - lse) - (k == s.label ? 1.0 : 0.0);
    }
    for (int k = 0; k < l; ++k) {
      grad[gb.offset + k] += dlogits[k];
      for (int i = 0; i < h; ++i) {
        grad[gw.offset + k * h + i] += dlogits[k] * act.h2[i];
      }
    }
    for (int i = 0; i < h; ++i) {
      double dh2 = 0.0;
      for (int k = 0; k < l; ++k) dh2 += head_w[k * h + i] * dlogits[k];
      da2[i] = dh2 * (1.0 - act.h2[i] * act.h2[i]);
    }
    for (int i = 0; i < h; ++i) {
      if (da2[i] == 0.0) continue;
      for (int j = 0; j < h; ++j) g_wv[i * h + j] += da2[i] * act.h1[j];
    }
  }

  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (std::size_t i = gw.offset; i < gw.offset + gw.length; ++i) {
    grad[i] *= inv_n;
  }
  for (std::size_t i = gb.offset; i < gb.offset + gb.length; ++i) {
    grad[i] *= inv_n;
  }
  for (double& g : g_wv) g *= inv_n;

  auto adapter = [&](const char* b_name, const char* a_name, int rank) {
    const Segment& sb = layout.segment(b_name);
    const Segment& sa = layout.segment(a_name);
    AdapterGradient(g_wv, params.segment(b_name), params.segment(a_name), h,
                    rank, std::span<double>(grad).subspan(sb.offset, sb.length),
                    std::span<double>(grad).subspan(sa.offset, sa.length));
  };
  adapter(kInitAdapterB, kInitAdapterA, shape.init_rank);
  adapter(kAdapterB, kAdapterA, shape.adapter_rank);

  return ParamVector(params.shared_layout(), std::move(grad));
}

ParamVector LocalTrain(const FrozenBackbone& backbone,
                       const ParamVector& params,
                       std::span<const std::string> trainable,
                       const ClientDataset& data, const TrainConfig& cfg,
                       RngStream& stream) {
  cfg.Validate();
  if (trainable.empty()) {
    throw std::invalid_argument("LocalTrain: empty trainable set");
  }
  if (data.samples.empty()) {
    throw std::invalid_argument("LocalTrain: empty dataset");
  }
  std::vector<const Segment*> segments;
  for (const auto& name : trainable) {
    segments.push_back(&params.layout().segment(name));
  }

  ParamVector current = params;
  std::vector<std::size_t> order(data.samples.size());
  std::vector<Sample> batch;
  const std::size_t batch_size = static_cast<std::size_t>(cfg.batch_size);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), stream.engine());
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t end = std::min(order.size(), start + batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(data.samples[order[i]]);
      }
      const ParamVector grad = LossGradient(backbone, current, batch);
      std::vector<double> next(current.values().begin(),
                               current.values().end());
      for (const Segment* s : segments) {
        for (std::size_t i = s->offset; i < s->offset + s->length; ++i) {
          next[i] -= cfg.learning_rate * grad[i];
        }
      }
      current = ParamVector(current.shared_layout(), std::move(next));
    }
  }
  return current;
}

ParamVector ModelDelta(const ParamVector& before, const ParamVector& after) {
  return Subtract(after, before);
}

double Accuracy(const FrozenBackbone& backbone, const ParamVector& params,
                std::span<const Sample> samples) {
  if (samples.empty()) return 0.0;
  Network net(backbone, params);
  Network::Activations act;
  std::size_t correct = 0;
  for (const Sample& s : samples) {
    net.Forward(s, act);
    const auto best = std::max_element(act.logits.begin(), act.logits.end());
    if (best - act.logits.begin() == s.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

}  // namespace pina
