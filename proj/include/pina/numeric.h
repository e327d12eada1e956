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

#ifndef PINA_NUMERIC_H_
#define PINA_NUMERIC_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pina {

// A named, contiguous slice of a flat parameter vector.
struct Segment {
  std::string name;
  std::size_t offset = 0;
  std::size_t length = 0;

  bool operator==(const Segment&) const = default;
};

// Ordered, contiguous, non-overlapping segments. Offsets are assigned from
// the declaration order, so two layouts built from the same (name, length)
// list compare equal.
class Layout {
 public:
  Layout() = default;
  explicit Layout(
      const std::vector<std::pair<std::string, std::size_t>>& segments);

  // A single segment named "values".
  static Layout Flat(std::size_t length);

  std::size_t size() const { return size_; }
  const std::vector<Segment>& segments() const { return segments_; }
  bool Contains(std::string_view name) const;
  // Throws std::out_of_range for unknown names.
  const Segment& segment(std::string_view name) const;

  // Sub-layout over the named segments, in the order given.
  Layout Select(std::span<const std::string> names) const;

  // Copy of this layout with every segment name prefixed.
  Layout Prefixed(std::string_view prefix) const;

  bool operator==(const Layout& other) const {
    return segments_ == other.segments_;
  }

 private:
  std::vector<Segment> segments_;
  std::size_t size_ = 0;
};

// Flat real-valued parameter/update vector tagged with a layout. Values are
// immutable once constructed and are always finite; every constructor and
// operation throws std::domain_error on NaN or Inf.
class ParamVector {
 public:
  ParamVector();
  ParamVector(Layout layout, std::vector<double> values);
  ParamVector(std::shared_ptr<const Layout> layout,
              std::vector<double> values);

  static ParamVector Zeros(Layout layout);
  static ParamVector Zeros(std::shared_ptr<const Layout> layout);
  // Convenience for single-segment vectors.
  static ParamVector FromValues(std::vector<double> values);

  const Layout& layout() const { return *layout_; }
  const std::shared_ptr<const Layout>& shared_layout() const {
    return layout_;
  }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> segment(std::string_view name) const;

  // Values of the segments named in `sub`, laid out per `sub`.
  ParamVector Extract(const Layout& sub) const;
  ParamVector Extract(std::shared_ptr<const Layout> sub) const;
  // Copy of this vector with every segment of `sub` added in by name.
  ParamVector AddSegments(const ParamVector& sub) const;

  bool operator==(const ParamVector& other) const;

 private:
  std::shared_ptr<const Layout> layout_;
  std::vector<double> values_;
};

// Element-wise arithmetic. Binary operations require identical layouts
// and throw std::invalid_argument otherwise.
ParamVector Add(const ParamVector& a, const ParamVector& b);
ParamVector Subtract(const ParamVector& a, const ParamVector& b);
ParamVector Scale(const ParamVector& v, double factor);

double L2Norm(std::span<const double> v);
double L2Norm(const ParamVector& v);

// v * min(1, threshold / ||v||_2). Throws std::invalid_argument unless
// threshold > 0.
ParamVector Clip(const ParamVector& v, double threshold);

// Identifies a deterministic random stream: one per (entity kind, entity
// index, round).
enum class StreamKind : std::uint32_t {
  kPopulation = 1,
  kBackbone,
  kInitParams,
  kWarmup,
  kSampling,
  kClientTrain,
  kClientNoise,
  kSketchNoise,
  kKMeans,
  kRandomInit,
  kSubsample,
  kTest,
};

struct StreamId {
  StreamKind kind = StreamKind::kTest;
  std::uint64_t index = 0;
  std::uint64_t round = 0;
};

// A random stream whose state is a pure function of (seed, id); samples do
// not depend on which thread or in which order other streams are used.
class RngStream {
 public:
  using Engine = std::mt19937_64;

  RngStream(std::uint64_t seed, StreamId id);

  double Gaussian() { return normal_(engine_); }
  double Uniform() { return uniform_(engine_); }
  Engine& engine() { return engine_; }

  // The 64-bit key the engine is seeded with.
  static std::uint64_t DeriveKey(std::uint64_t seed, StreamId id);

 private:
  Engine engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

// i.i.d. N(0, sigma^2) per coordinate. sigma == 0 yields exact zeros.
ParamVector GaussianNoise(RngStream& stream, Layout layout, double sigma);
ParamVector GaussianNoise(RngStream& stream,
                          std::shared_ptr<const Layout> layout, double sigma);
ParamVector GaussianNoise(RngStream& stream, std::size_t dim, double sigma);

}  // namespace pina

#endif  // PINA_NUMERIC_H_
