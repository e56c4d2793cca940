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

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lwc/nn.hpp"
#include "lwc/tensor.hpp"

namespace lwc {

/// Lifting constants of the CDF 9/7 factorization.
///
///   d1 = x_o + alpha (x_e[n] + x_e[n+1])     s1 = x_e + beta  (d1[n-1] + d1[n])
///   d2 = d1  + gamma (s1[n]  + s1[n+1])      s2 = s1  + delta (d2[n-1] + d2[n])
///
/// Gains (zeta, 1/zeta) on (s2, d2) give a low band with DC gain sqrt(2) and
/// a high band with Nyquist gain sqrt(2), i.e. the near-orthonormal scaling.
struct Cdf97 {
  static constexpr double kAlpha = -1.586134342059924;
  static constexpr double kBeta = -0.052980118572961;
  static constexpr double kGamma = 0.882911075530934;
  static constexpr double kDelta = 0.443506852043971;
  static constexpr double kZeta = 1.149604398860241;
};

enum class Parity { kEven, kOdd };

/// Whole-sample symmetric reflection of index i into [0, n).
int reflect_index(int i, int n);
/// Index into a polyphase component of length m (full signal length 2m) after
/// whole-sample symmetric extension of the full signal.
int component_index(int i, int m, Parity parity);

/// A predict or update block. Linear operators apply three taps at offsets
/// (-1, 0, +1) along the lifting axis; CNN operators add a residual network
/// on top of such a first layer:
///
///   c1 = Conv1(x)                       1x3 (or 3x1) along the lifting axis
///   r  = L5(tanh(L4(tanh(L3(tanh(L2(c1)))))))   3x3 kernels, 16 channels
///   P(x) = c1 + r
///
/// Inputs are symmetrically pre-extended by the receptive field radius so the
/// zero padding of the inner layers never reaches the cropped output.
template <typename T>
class LiftingOperator {
 public:
  enum class Kind { kLinear, kCnn };
  static constexpr int kHidden = 16;

  LiftingOperator() = default;
  static LiftingOperator linear(std::array<double, 3> taps);
  /// Conv1 holds `taps`; L5 starts at zero, so the operator starts out linear.
  static LiftingOperator cnn(std::array<double, 3> taps, Axis axis, Initializer& init);

  Kind kind() const { return kind_; }
  /// Same spatial shape out as in.
  Tensor<T> operator()(const Tensor<T>& x, Axis axis, Parity parity) const;

  /// Zeroes every CNN layer except Conv1.
  void zero_residual();
  void collect(const std::string& prefix, ParamList<T>& out) const;

 private:
  Tensor<T> apply_linear(const Tensor<T>& x, Axis axis, Parity parity) const;
  Tensor<T> apply_cnn(const Tensor<T>& x, Axis axis, Parity parity) const;

  Kind kind_ = Kind::kLinear;
  std::array<T, 3> taps_{};
  Axis axis_ = Axis::kRows;
  Conv2d<T> conv1_, l2_, l3_, l4_, l5_;
};

/// One 1-D wavelet: predict, update, predict, update, then gains on (s2, d2).
template <typename T>
struct WaveletStage {
  std::array<LiftingOperator<T>, 4> steps;
  T gain_low = T(1);
  T gain_high = T(1);

  void collect(const std::string& prefix, ParamList<T>& out) const;
};

template <typename T>
WaveletStage<T> cdf97_stage();
/// CDF 9/7 initialized CNN stage with unit gains.
template <typename T>
WaveletStage<T> learned_stage(Axis axis, std::uint64_t seed);

template <typename T>
std::pair<Tensor<T>, Tensor<T>> split_even_odd(const Tensor<T>& x, Axis axis);
template <typename T>
Tensor<T> merge_even_odd(const Tensor<T>& even, const Tensor<T>& odd, Axis axis);

/// Returns (low, high).
template <typename T>
std::pair<Tensor<T>, Tensor<T>> lift_forward_1d(const Tensor<T>& x, const WaveletStage<T>& stage, Axis axis);
template <typename T>
Tensor<T> lift_inverse_1d(const Tensor<T>& low, const Tensor<T>& high, const WaveletStage<T>& stage,
                          Axis axis);

/// Vertical then horizontal stage of a 2-D transform.
template <typename T>
struct Wavelet2d {
  WaveletStage<T> vertical;
  WaveletStage<T> horizontal;

  void collect(const std::string& prefix, ParamList<T>& out) const;
};

template <typename T>
Wavelet2d<T> cdf97_wavelet2d();
template <typename T>
Wavelet2d<T> learned_wavelet2d(std::uint64_t seed);

/// The first letter names the vertical filter, the second the horizontal one:
/// LH is vertically low-pass and horizontally high-pass.
template <typename T>
struct Quad {
  Tensor<T> ll, lh, hl, hh;
};

template <typename T>
Quad<T> wt2d_forward(const Tensor<T>& x, const Wavelet2d<T>& w);
template <typename T>
Tensor<T> wt2d_inverse(const Quad<T>& q, const Wavelet2d<T>& w);

enum class Orientation { kLH = 0, kHL = 1, kHH = 2 };

/// Bands in coding order: LL_L, LH_L, HL_L, HH_L, LH_{L-1}, ..., HH_1, where
/// level 1 is the finest.
template <typename T>
struct SubbandPyramid {
  int levels = 0;
  int height = 0;  // transformed image size
  int width = 0;
  std::vector<Tensor<T>> bands;
};

int band_count(int levels);
int band_index(int levels, int level, Orientation o);
/// Level of band `index` (the LL band reports `levels`).
int band_level(int levels, int index);
bool is_ll_band(int index);
Orientation band_orientation(int levels, int index);
std::string band_name(int levels, int index);

inline constexpr int kMaxLevels = 6;

/// Same stage parameters at every level. Dimensions must be divisible by 2^levels.
template <typename T>
SubbandPyramid<T> dwt_forward(const Tensor<T>& x, const Wavelet2d<T>& w, int levels);
template <typename T>
Tensor<T> dwt_inverse(const SubbandPyramid<T>& pyramid, const Wavelet2d<T>& w);

}  // namespace lwc
