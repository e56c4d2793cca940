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

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "lwc/lifting.hpp"
#include "lwc/nn.hpp"
#include "lwc/tensor.hpp"

namespace lwc {

enum class ScalingVariant { kLlb, kSimple };

/// kIdentity builds exact identity maps; kTraining adds a small random
/// perturbation so every weight receives gradient.
enum class ScalingInit { kIdentity, kTraining };

/// Per-subband scalar map: y = gain * x + L3(tanh(L2(tanh(L1(x))))) with 1x1
/// convolutions 1 -> 32 -> 32 -> 1. L3 starts at zero, so a fresh map is a
/// pure gain.
template <typename T>
struct PointwiseScaler {
  static constexpr int kHidden = 32;

  Tensor<T> gain;  // (1, 1, 1, 1)
  Conv2d<T> l1, l2, l3;

  PointwiseScaler() = default;
  PointwiseScaler(double initial_gain, Initializer& init);

  Tensor<T> operator()(const Tensor<T>& x) const;
  void collect(const std::string& prefix, ParamList<T>& out) const;
};

/// Conv(3x3) -> GDN -> Conv(3x3) -> GDN -> Conv(1x1), with iGDN on the decoder
/// side. `channels` is 1 for LL and 3 for the stacked {LH, HL, HH} of a level.
template <typename T>
struct GdnScaler {
  Conv2d<T> c1, c2, c3;
  Gdn<T> g1, g2;

  GdnScaler() = default;
  GdnScaler(int channels, int hidden, bool inverse, ScalingInit mode, Initializer& init);

  Tensor<T> operator()(const Tensor<T>& x) const;
  void collect(const std::string& prefix, ParamList<T>& out) const;
};

/// One side (encoder or decoder) of the scaling stage for one color channel.
template <typename T>
struct ScalingNetwork {
  static constexpr int kLlHidden = 32;
  static constexpr int kDetailHidden = 96;

  ScalingVariant variant = ScalingVariant::kSimple;
  int levels = 0;
  std::vector<PointwiseScaler<T>> per_band;  // simple: one per band, coding order
  GdnScaler<T> ll, detail;                   // llb: shared across levels

  SubbandPyramid<T> apply(const SubbandPyramid<T>& p) const;
  void collect(const std::string& prefix, ParamList<T>& out) const;
};

template <typename T>
ScalingNetwork<T> make_scaling_network(ScalingVariant variant, int levels, bool decoder, ScalingInit mode,
                                       std::uint64_t seed);

template <typename T>
SubbandPyramid<T> scale_forward(const SubbandPyramid<T>& p, const ScalingNetwork<T>& encoder);
template <typename T>
SubbandPyramid<T> scale_inverse(const SubbandPyramid<T>& p, const ScalingNetwork<T>& decoder);

enum class QuantizerMode { kRound, kNoise };

/// Round: nearest integer, ties away from zero, no gradient. Noise: adds
/// U(-1/2, 1/2) drawn from `rng`, gradient passes through unchanged.
template <typename T>
Tensor<T> quantize(const Tensor<T>& y, QuantizerMode mode, std::mt19937_64* rng = nullptr);

template <typename T>
SubbandPyramid<T> quantize(const SubbandPyramid<T>& p, QuantizerMode mode, std::mt19937_64* rng = nullptr);

}  // namespace lwc
