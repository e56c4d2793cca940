// Copyright 2026 The LWC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lwc/scaling.hpp"

#include <cmath>

#include "lwc/errors.hpp"

namespace lwc {

namespace {

// Perturbation added to identity-initialized GDN stacks in training mode.
constexpr double kTrainingJitter = 1e-3;
// GDN gamma starts tiny but nonzero: a zero raw value would never move.
constexpr double kTrainingGamma = 1e-8;

template <typename T>
void set_delta(Conv2d<T>& conv, int channels) {
  conv.zero();
  const Shape s = conv.weight.shape();
  auto w = conv.weight.mutable_data();
  for (int c = 0; c < channels; ++c) w[s.index(c, c, s.h / 2, s.w / 2)] = T(1);
}

template <typename T>
void jitter(Conv2d<T>& conv, Initializer& init) {
  for (auto& v : conv.weight.mutable_data()) v = static_cast<T>(v + init.uniform(-kTrainingJitter, kTrainingJitter));
}

}  // namespace

template <typename T>
PointwiseScaler<T>::PointwiseScaler(double initial_gain, Initializer& init)
    : gain(Shape{1, 1, 1, 1}, static_cast<T>(initial_gain)),
      l1(1, kHidden, 1, 1, init),
      l2(kHidden, kHidden, 1, 1, init),
      l3(kHidden, 1, 1, 1, init) {
  l3.zero();
}

template <typename T>
Tensor<T> PointwiseScaler<T>::operator()(const Tensor<T>& x) const {
  Tensor<T> linear = mul_channel(x, gain);
  return add(linear, l3(tanh(l2(tanh(l1(x))))));
}

template <typename T>
void PointwiseScaler<T>::collect(const std::string& prefix, ParamList<T>& out) const {
  out.emplace_back(prefix + ".gain", gain);
  l1.collect(prefix + ".l1", out);
  l2.collect(prefix + ".l2", out);
  l3.collect(prefix + ".l3", out);
}

template <typename T>
GdnScaler<T>::GdnScaler(int channels, int hidden, bool inverse, ScalingInit mode, Initializer& init)
    : c1(channels, hidden, 3, 3, init),
      c2(hidden, hidden, 3, 3, init),
      c3(hidden, channels, 1, 1, init),
      g1(hidden, inverse, mode == ScalingInit::kTraining ? kTrainingGamma : 0.0),
      g2(hidden, inverse, mode == ScalingInit::kTraining ? kTrainingGamma : 0.0) {
  set_delta(c1, channels);
  set_delta(c2, hidden);
  set_delta(c3, channels);
  if (mode == ScalingInit::kTraining) {
    jitter(c1, init);
    jitter(c2, init);
    jitter(c3, init);
  }
}

template <typename T>
Tensor<T> GdnScaler<T>::operator()(const Tensor<T>& x) const {
  return c3(g2(c2(g1(c1(x)))));
}

template <typename T>
void GdnScaler<T>::collect(const std::string& prefix, ParamList<T>& out) const {
  c1.collect(prefix + ".c1", out);
  g1.collect(prefix + ".g1", out);
  c2.collect(prefix + ".c2", out);
  g2.collect(prefix + ".g2", out);
  c3.collect(prefix + ".c3", out);
}

template <typename T>
SubbandPyramid<T> ScalingNetwork<T>::apply(const SubbandPyramid<T>& p) const {
  if (p.levels != levels || static_cast<int>(p.bands.size()) != band_count(levels)) {
    throw ConfigError("scaling network built for " + std::to_string(levels) + " levels got a " +
                      std::to_string(p.levels) + "-level pyramid");
  }
  SubbandPyramid<T> out = p;
  if (variant == ScalingVariant::kSimple) {
    for (std::size_t b = 0; b < p.bands.size(); ++b) {
      if (p.bands[b].shape().c != 1) throw ConfigError("scaling expects single-channel subbands");
      out.bands[b] = per_band[b](p.bands[b]);
    }
    return out;
  }
  out.bands[0] = ll(p.bands[0]);
  for (int level = 1; level <= levels; ++level) {
    const int lh = band_index(levels, level, Orientation::kLH);
    const Tensor<T> stacked = detail(concat_channels<T>({p.bands[lh], p.bands[lh + 1], p.bands[lh + 2]}));
    for (int o = 0; o < 3; ++o) out.bands[lh + o] = slice_channels(stacked, o, 1);
  }
  return out;
}

template <typename T>
void ScalingNetwork<T>::collect(const std::string& prefix, ParamList<T>& out) const {
  if (variant == ScalingVariant::kSimple) {
    for (std::size_t b = 0; b < per_band.size(); ++b) {
      per_band[b].collect(prefix + "." + band_name(levels, static_cast<int>(b)), out);
    }
    return;
  }
  ll.collect(prefix + ".ll", out);
  detail.collect(prefix + ".detail", out);
}

template <typename T>
ScalingNetwork<T> make_scaling_network(ScalingVariant variant, int levels, bool decoder, ScalingInit mode,
                                       std::uint64_t seed) {
  if (levels < 1 || levels > kMaxLevels) throw ConfigError("scaling network levels must be in 1..6");
  Initializer init(seed);
  ScalingNetwork<T> net;
  net.variant = variant;
  net.levels = levels;
  if (variant == ScalingVariant::kSimple) {
    for (int b = 0; b < band_count(levels); ++b) net.per_band.emplace_back(1.0, init);
  } else {
    net.ll = GdnScaler<T>(1, ScalingNetwork<T>::kLlHidden, decoder, mode, init);
    net.detail = GdnScaler<T>(3, ScalingNetwork<T>::kDetailHidden, decoder, mode, init);
  }
  return net;
}

template <typename T>
SubbandPyramid<T> scale_forward(const SubbandPyramid<T>& p, const ScalingNetwork<T>& encoder) {
  return encoder.apply(p);
}

template <typename T>
SubbandPyramid<T> scale_inverse(const SubbandPyramid<T>& p, const ScalingNetwork<T>& decoder) {
  return decoder.apply(p);
}

template <typename T>
Tensor<T> quantize(const Tensor<T>& y, QuantizerMode mode, std::mt19937_64* rng) {
  if (mode == QuantizerMode::kRound) return round_values(y);
  if (rng == nullptr) throw UsageError("noise quantization needs a random stream");
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::vector<T> noise(y.numel());
  for (auto& v : noise) v = static_cast<T>(u(*rng));
  return add(y, Tensor<T>(y.shape(), std::move(noise)));
}

template <typename T>
SubbandPyramid<T> quantize(const SubbandPyramid<T>& p, QuantizerMode mode, std::mt19937_64* rng) {
  SubbandPyramid<T> out = p;
  for (auto& b : out.bands) b = quantize(b, mode, rng);
  return out;
}

#define LWC_INSTANTIATE(T)                                                                         \
  template struct PointwiseScaler<T>;                                                              \
  template struct GdnScaler<T>;                                                                    \
  template struct ScalingNetwork<T>;                                                               \
  template ScalingNetwork<T> make_scaling_network<T>(ScalingVariant, int, bool, ScalingInit,        \
                                                     std::uint64_t);                               \
  template SubbandPyramid<T> scale_forward(const SubbandPyramid<T>&, const ScalingNetwork<T>&);    \
  template SubbandPyramid<T> scale_inverse(const SubbandPyramid<T>&, const ScalingNetwork<T>&);    \
  template Tensor<T> quantize(const Tensor<T>&, QuantizerMode, std::mt19937_64*);                   \
  template SubbandPyramid<T> quantize(const SubbandPyramid<T>&, QuantizerMode, std::mt19937_64*);

LWC_INSTANTIATE(float)
LWC_INSTANTIATE(double)

#undef LWC_INSTANTIATE

}  // namespace lwc
