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

#include "pina/numeric.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pina {
namespace {

// Norms within this relative distance of the threshold count as already
// clipped, which makes Clip exactly idempotent.
constexpr double kClipSlack = 1e-12;

void CheckFinite(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw std::domain_error("ParamVector: non-finite entry");
    }
  }
}

void CheckSameLayout(const ParamVector& a, const ParamVector& b) {
  if (a.shared_layout() != b.shared_layout() && !(a.layout() == b.layout())) {
    throw std::invalid_argument("ParamVector: layout mismatch");
  }
}

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Layout::Layout(
    const std::vector<std::pair<std::string, std::size_t>>& segments) {
  segments_.reserve(segments.size());
  for (const auto& [name, length] : segments) {
    if (Contains(name)) {
      throw std::invalid_argument("Layout: duplicate segment " + name);
    }
    segments_.push_back(Segment{name, size_, length});
    size_ += length;
  }
}

Layout Layout::Flat(std::size_t length) { return Layout({{"values", length}}); }

bool Layout::Contains(std::string_view name) const {
  return std::any_of(segments_.begin(), segments_.end(),
                     [&](const Segment& s) { return s.name == name; });
}

const Segment& Layout::segment(std::string_view name) const {
  for (const auto& s : segments_) {
    if (s.name == name) return s;
  }
  throw std::out_of_range("Layout: no segment named " + std::string(name));
}

Layout Layout::Select(std::span<const std::string> names) const {
  std::vector<std::pair<std::string, std::size_t>> picked;
  picked.reserve(names.size());
  for (const auto& name : names) {
    picked.emplace_back(name, segment(name).length);
  }
  return Layout(picked);
}

Layout Layout::Prefixed(std::string_view prefix) const {
  std::vector<std::pair<std::string, std::size_t>> renamed;
  renamed.reserve(segments_.size());
  for (const auto& s : segments_) {
    renamed.emplace_back(std::string(prefix) + s.name, s.length);
  }
  return Layout(renamed);
}

ParamVector::ParamVector() : layout_(std::make_shared<const Layout>()) {}

ParamVector::ParamVector(Layout layout, std::vector<double> values)
    : ParamVector(std::make_shared<const Layout>(std::move(layout)),
                  std::move(values)) {}

ParamVector::ParamVector(std::shared_ptr<const Layout> layout,
                         std::vector<double> values)
    : layout_(std::move(layout)), values_(std::move(values)) {
  if (layout_ == nullptr || layout_->size() != values_.size()) {
    throw std::invalid_argument("ParamVector: size does not match layout");
  }
  CheckFinite(values_);
}

ParamVector ParamVector::Zeros(Layout layout) {
  return Zeros(std::make_shared<const Layout>(std::move(layout)));
}

ParamVector ParamVector::Zeros(std::shared_ptr<const Layout> layout) {
  std::vector<double> zeros(layout->size(), 0.0);
  return ParamVector(std::move(layout), std::move(zeros));
}

ParamVector ParamVector::FromValues(std::vector<double> values) {
  Layout layout = Layout::Flat(values.size());
  return ParamVector(std::move(layout), std::move(values));
}

std::span<const double> ParamVector::segment(std::string_view name) const {
  const Segment& s = layout_->segment(name);
  return std::span<const double>(values_).subspan(s.offset, s.length);
}

ParamVector ParamVector::Extract(const Layout& sub) const {
  return Extract(std::make_shared<const Layout>(sub));
}

ParamVector ParamVector::Extract(std::shared_ptr<const Layout> sub) const {
  std::vector<double> out;
  out.reserve(sub->size());
  for (const auto& s : sub->segments()) {
    auto src = segment(s.name);
    if (src.size() != s.length) {
      throw std::invalid_argument("ParamVector: segment length mismatch for " +
                                  s.name);
    }
    out.insert(out.end(), src.begin(), src.end());
  }
  return ParamVector(std::move(sub), std::move(out));
}

ParamVector ParamVector::AddSegments(const ParamVector& sub) const {
  std::vector<double> out = values_;
  for (const auto& s : sub.layout().segments()) {
    const Segment& dst = layout_->segment(s.name);
    if (dst.length != s.length) {
      throw std::invalid_argument("ParamVector: segment length mismatch for " +
                                  s.name);
    }
    for (std::size_t i = 0; i < s.length; ++i) {
      out[dst.offset + i] += sub.values_[s.offset + i];
    }
  }
  return ParamVector(layout_, std::move(out));
}

bool ParamVector::operator==(const ParamVector& other) const {
  return layout() == other.layout() && values_ == other.values_;
}

ParamVector Add(const ParamVector& a, const ParamVector& b) {
  CheckSameLayout(a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  return ParamVector(a.shared_layout(), std::move(out));
}

ParamVector Subtract(const ParamVector& a, const ParamVector& b) {
  CheckSameLayout(a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  return ParamVector(a.shared_layout(), std::move(out));
}

ParamVector Scale(const ParamVector& v, double factor) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = v[i] * factor;
  return ParamVector(v.shared_layout(), std::move(out));
}

double L2Norm(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

double L2Norm(const ParamVector& v) { return L2Norm(v.values()); }

ParamVector Clip(const ParamVector& v, double threshold) {
  if (!(threshold > 0.0) || !std::isfinite(threshold)) {
    throw std::invalid_argument("Clip: threshold must be positive");
  }
  const double norm = L2Norm(v);
  if (norm <= threshold * (1.0 + kClipSlack)) return v;
  return Scale(v, threshold / norm);
}

std::uint64_t RngStream::DeriveKey(std::uint64_t seed, StreamId id) {
  std::uint64_t key = SplitMix64(seed);
  key = SplitMix64(key ^ static_cast<std::uint64_t>(id.kind));
  key = SplitMix64(key ^ id.index);
  key = SplitMix64(key ^ id.round);
  return key;
}

RngStream::RngStream(std::uint64_t seed, StreamId id)
    : engine_(DeriveKey(seed, id)) {}

ParamVector GaussianNoise(RngStream& stream, Layout layout, double sigma) {
  return GaussianNoise(stream, std::make_shared<const Layout>(std::move(layout)),
                       sigma);
}

ParamVector GaussianNoise(RngStream& stream,
                          std::shared_ptr<const Layout> layout, double sigma) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("GaussianNoise: sigma must be >= 0");
  }
  std::vector<double> out(layout->size(), 0.0);
  if (sigma > 0.0) {
    for (double& x : out) x = sigma * stream.Gaussian();
  }
  return ParamVector(std::move(layout), std::move(out));
}

ParamVector GaussianNoise(RngStream& stream, std::size_t dim, double sigma) {
  return GaussianNoise(stream, Layout::Flat(dim), sigma);
}

}  // namespace pina
