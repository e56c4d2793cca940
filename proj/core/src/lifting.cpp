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

#include "lwc/lifting.hpp"

#include <numeric>

#include "lwc/errors.hpp"

namespace lwc {

int reflect_index(int i, int n) {
  if (n <= 1) return 0;
  const int period = 2 * n - 2;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

int component_index(int i, int m, Parity parity) {
  const int full = 2 * i + (parity == Parity::kOdd ? 1 : 0);
  return reflect_index(full, 2 * m) / 2;
}

namespace {

// Receptive field of the CNN operator: Conv1 plus four 3x3 layers.
constexpr int kCnnRadiusAlong = 5;
constexpr int kCnnRadiusAcross = 4;

int axis_length(const Shape& s, Axis axis) { return axis == Axis::kRows ? s.h : s.w; }

// Symmetric pre-extension: `along` samples on both ends of the lifting axis
// (polyphase-aware), `across` on both ends of the other axis.
template <typename T>
Tensor<T> extend(const Tensor<T>& x, Axis axis, Parity parity, int along, int across) {
  const Shape s = x.shape();
  const int m = axis_length(s, axis);
  const int other = axis == Axis::kRows ? s.w : s.h;
  std::vector<int> a(static_cast<std::size_t>(m + 2 * along));
  for (int i = 0; i < static_cast<int>(a.size()); ++i) a[i] = component_index(i - along, m, parity);
  std::vector<int> b(static_cast<std::size_t>(other + 2 * across));
  for (int j = 0; j < static_cast<int>(b.size()); ++j) b[j] = reflect_index(j - across, other);
  return axis == Axis::kRows ? gather2d(x, std::span<const int>(a), std::span<const int>(b))
                             : gather2d(x, std::span<const int>(b), std::span<const int>(a));
}

template <typename T>
Tensor<T> crop(const Tensor<T>& x, int top, int left, int h, int w) {
  std::vector<int> rows(static_cast<std::size_t>(h)), cols(static_cast<std::size_t>(w));
  std::iota(rows.begin(), rows.end(), top);
  std::iota(cols.begin(), cols.end(), left);
  return gather2d(x, std::span<const int>(rows), std::span<const int>(cols));
}

template <typename T>
Tensor<T> tap_kernel(const std::array<T, 3>& taps, Axis axis) {
  const Shape s = axis == Axis::kRows ? Shape{1, 1, 3, 1} : Shape{1, 1, 1, 3};
  return Tensor<T>(s, std::vector<T>(taps.begin(), taps.end()));
}

}  // namespace

template <typename T>
LiftingOperator<T> LiftingOperator<T>::linear(std::array<double, 3> taps) {
  LiftingOperator op;
  op.kind_ = Kind::kLinear;
  for (int i = 0; i < 3; ++i) op.taps_[i] = static_cast<T>(taps[i]);
  return op;
}

template <typename T>
LiftingOperator<T> LiftingOperator<T>::cnn(std::array<double, 3> taps, Axis axis, Initializer& init) {
  LiftingOperator op;
  op.kind_ = Kind::kCnn;
  op.axis_ = axis;
  for (int i = 0; i < 3; ++i) op.taps_[i] = static_cast<T>(taps[i]);
  op.conv1_.weight = tap_kernel(op.taps_, axis);
  op.conv1_.bias = Tensor<T>(Shape{1, 1, 1, 1});
  op.l2_ = Conv2d<T>(1, kHidden, 3, 3, init);
  op.l3_ = Conv2d<T>(kHidden, kHidden, 3, 3, init);
  op.l4_ = Conv2d<T>(kHidden, kHidden, 3, 3, init);
  op.l5_ = Conv2d<T>(kHidden, 1, 3, 3, init);
  op.l5_.zero();
  return op;
}

template <typename T>
Tensor<T> LiftingOperator<T>::operator()(const Tensor<T>& x, Axis axis, Parity parity) const {
  return kind_ == Kind::kLinear ? apply_linear(x, axis, parity) : apply_cnn(x, axis, parity);
}

template <typename T>
Tensor<T> LiftingOperator<T>::apply_linear(const Tensor<T>& x, Axis axis, Parity parity) const {
  const Tensor<T> ext = extend(x, axis, parity, 1, 0);
  return conv2d(ext, tap_kernel(taps_, axis), Tensor<T>(), Conv2dGeometry{});
}

template <typename T>
Tensor<T> LiftingOperator<T>::apply_cnn(const Tensor<T>& x, Axis axis, Parity parity) const {
  if (axis != axis_) throw ConfigError("CNN lifting operator applied along the wrong axis");
  const Shape s = x.shape();
  const Tensor<T> ext = extend(x, axis, parity, kCnnRadiusAlong, kCnnRadiusAcross);
  const Conv2dGeometry along = axis == Axis::kRows ? Conv2dGeometry{1, 1, 1, 0} : Conv2dGeometry{1, 1, 0, 1};
  const Tensor<T> c1 = conv2d(ext, conv1_.weight, conv1_.bias, along);
  Tensor<T> h = tanh(l2_(c1));
  h = tanh(l3_(h));
  h = tanh(l4_(h));
  const Tensor<T> out = add(c1, l5_(h));
  return axis == Axis::kRows ? crop(out, kCnnRadiusAlong, kCnnRadiusAcross, s.h, s.w)
                             : crop(out, kCnnRadiusAcross, kCnnRadiusAlong, s.h, s.w);
}

template <typename T>
void LiftingOperator<T>::zero_residual() {
  if (kind_ != Kind::kCnn) return;
  l2_.zero();
  l3_.zero();
  l4_.zero();
  l5_.zero();
}

template <typename T>
void LiftingOperator<T>::collect(const std::string& prefix, ParamList<T>& out) const {
  if (kind_ != Kind::kCnn) return;
  conv1_.collect(prefix + ".conv1", out);
  l2_.collect(prefix + ".conv2", out);
  l3_.collect(prefix + ".conv3", out);
  l4_.collect(prefix + ".conv4", out);
  l5_.collect(prefix + ".conv5", out);
}

template <typename T>
void WaveletStage<T>::collect(const std::string& prefix, ParamList<T>& out) const {
  static const char* kNames[] = {"p1", "u1", "p2", "u2"};
  for (int i = 0; i < 4; ++i) steps[i].collect(prefix + "." + kNames[i], out);
}

namespace {

// Tap layouts at offsets (-1, 0, +1): predicts read x_e[n], x_e[n+1] and are
// subtracted; updates read d[n-1], d[n] and are added.
std::array<std::array<double, 3>, 4> cdf97_taps() {
  return {{{0.0, -Cdf97::kAlpha, -Cdf97::kAlpha},
           {Cdf97::kBeta, Cdf97::kBeta, 0.0},
           {0.0, -Cdf97::kGamma, -Cdf97::kGamma},
           {Cdf97::kDelta, Cdf97::kDelta, 0.0}}};
}

}  // namespace

template <typename T>
WaveletStage<T> cdf97_stage() {
  WaveletStage<T> stage;
  const auto taps = cdf97_taps();
  for (int i = 0; i < 4; ++i) stage.steps[i] = LiftingOperator<T>::linear(taps[i]);
  stage.gain_low = static_cast<T>(Cdf97::kZeta);
  stage.gain_high = static_cast<T>(1.0 / Cdf97::kZeta);
  return stage;
}

template <typename T>
WaveletStage<T> learned_stage(Axis axis, std::uint64_t seed) {
  WaveletStage<T> stage;
  Initializer init(seed);
  const auto taps = cdf97_taps();
  for (int i = 0; i < 4; ++i) stage.steps[i] = LiftingOperator<T>::cnn(taps[i], axis, init);
  return stage;
}

template <typename T>
std::pair<Tensor<T>, Tensor<T>> split_even_odd(const Tensor<T>& x, Axis axis) {
  const Shape s = x.shape();
  const int len = axis_length(s, axis);
  if (len % 2 != 0) {
    throw ConfigError("split_even_odd: odd length " + std::to_string(len) + " along lifting axis");
  }
  std::vector<int> even(len / 2), odd(len / 2);
  for (int i = 0; i < len / 2; ++i) {
    even[i] = 2 * i;
    odd[i] = 2 * i + 1;
  }
  const int other = axis == Axis::kRows ? s.w : s.h;
  std::vector<int> all(static_cast<std::size_t>(other));
  std::iota(all.begin(), all.end(), 0);
  auto take = [&](const std::vector<int>& idx) {
    return axis == Axis::kRows ? gather2d(x, std::span<const int>(idx), std::span<const int>(all))
                               : gather2d(x, std::span<const int>(all), std::span<const int>(idx));
  };
  return {take(even), take(odd)};
}

template <typename T>
Tensor<T> merge_even_odd(const Tensor<T>& even, const Tensor<T>& odd, Axis axis) {
  return interleave(even, odd, axis);
}

template <typename T>
std::pair<Tensor<T>, Tensor<T>> lift_forward_1d(const Tensor<T>& x, const WaveletStage<T>& stage, Axis axis) {
  auto [xe, xo] = split_even_odd(x, axis);
  const auto& [p1, u1, p2, u2] = stage.steps;
  const Tensor<T> d1 = sub(xo, p1(xe, axis, Parity::kEven));
  const Tensor<T> s1 = add(xe, u1(d1, axis, Parity::kOdd));
  const Tensor<T> d2 = sub(d1, p2(s1, axis, Parity::kEven));
  const Tensor<T> s2 = add(s1, u2(d2, axis, Parity::kOdd));
  return {stage.gain_low == T(1) ? s2 : scale(s2, stage.gain_low),
          stage.gain_high == T(1) ? d2 : scale(d2, stage.gain_high)};
}

template <typename T>
Tensor<T> lift_inverse_1d(const Tensor<T>& low, const Tensor<T>& high, const WaveletStage<T>& stage,
                          Axis axis) {
  if (stage.gain_low == T(0) || stage.gain_high == T(0)) {
    throw ConfigError("lift_inverse_1d: zero gain is not invertible");
  }
  if (low.shape() != high.shape()) {
    throw ConfigError("lift_inverse_1d: low " + low.shape().str() + " and high " + high.shape().str() +
                      " differ");
  }
  const auto& [p1, u1, p2, u2] = stage.steps;
  const Tensor<T> s2 = stage.gain_low == T(1) ? low : scale(low, T(1) / stage.gain_low);
  const Tensor<T> d2 = stage.gain_high == T(1) ? high : scale(high, T(1) / stage.gain_high);
  const Tensor<T> s1 = sub(s2, u2(d2, axis, Parity::kOdd));
  const Tensor<T> d1 = add(d2, p2(s1, axis, Parity::kEven));
  const Tensor<T> xe = sub(s1, u1(d1, axis, Parity::kOdd));
  const Tensor<T> xo = add(d1, p1(xe, axis, Parity::kEven));
  return merge_even_odd(xe, xo, axis);
}

template <typename T>
void Wavelet2d<T>::collect(const std::string& prefix, ParamList<T>& out) const {
  vertical.collect(prefix + ".v", out);
  horizontal.collect(prefix + ".h", out);
}

template <typename T>
Wavelet2d<T> cdf97_wavelet2d() {
  return {cdf97_stage<T>(), cdf97_stage<T>()};
}

template <typename T>
Wavelet2d<T> learned_wavelet2d(std::uint64_t seed) {
  return {learned_stage<T>(Axis::kRows, seed), learned_stage<T>(Axis::kCols, seed + 1)};
}

template <typename T>
Quad<T> wt2d_forward(const Tensor<T>& x, const Wavelet2d<T>& w) {
  const Shape s = x.shape();
  if (s.h % 2 != 0 || s.w % 2 != 0) throw ConfigError("wt2d_forward: odd image size " + s.str());
  auto [low, high] = lift_forward_1d(x, w.vertical, Axis::kRows);
  auto [ll, lh] = lift_forward_1d(low, w.horizontal, Axis::kCols);
  auto [hl, hh] = lift_forward_1d(high, w.horizontal, Axis::kCols);
  return {ll, lh, hl, hh};
}

template <typename T>
Tensor<T> wt2d_inverse(const Quad<T>& q, const Wavelet2d<T>& w) {
  const Shape s = q.ll.shape();
  if (q.lh.shape() != s || q.hl.shape() != s || q.hh.shape() != s) {
    throw ConfigError("wt2d_inverse: subband shapes differ");
  }
  const Tensor<T> low = lift_inverse_1d(q.ll, q.lh, w.horizontal, Axis::kCols);
  const Tensor<T> high = lift_inverse_1d(q.hl, q.hh, w.horizontal, Axis::kCols);
  return lift_inverse_1d(low, high, w.vertical, Axis::kRows);
}

int band_count(int levels) { return 1 + 3 * levels; }

int band_index(int levels, int level, Orientation o) {
  if (level < 1 || level > levels) throw ConfigError("band_index: level out of range");
  return 1 + 3 * (levels - level) + static_cast<int>(o);
}

int band_level(int levels, int index) {
  if (index == 0) return levels;
  return levels - (index - 1) / 3;
}

bool is_ll_band(int index) { return index == 0; }

Orientation band_orientation(int /*levels*/, int index) {
  if (index == 0) throw ConfigError("LL band has no orientation");
  return static_cast<Orientation>((index - 1) % 3);
}

std::string band_name(int levels, int index) {
  if (index == 0) return "LL";
  static const char* kNames[] = {"LH", "HL", "HH"};
  return kNames[(index - 1) % 3] + std::to_string(band_level(levels, index));
}

template <typename T>
SubbandPyramid<T> dwt_forward(const Tensor<T>& x, const Wavelet2d<T>& w, int levels) {
  if (levels < 1 || levels > kMaxLevels) throw ConfigError("dwt_forward: levels must be in 1..6");
  const Shape s = x.shape();
  const int unit = 1 << levels;
  if (s.h % unit != 0 || s.w % unit != 0) {
    throw ConfigError("dwt_forward: size " + s.str() + " not divisible by " + std::to_string(unit));
  }
  SubbandPyramid<T> p;
  p.levels = levels;
  p.height = s.h;
  p.width = s.w;
  p.bands.resize(band_count(levels));
  Tensor<T> current = x;
  for (int level = 1; level <= levels; ++level) {
    Quad<T> q = wt2d_forward(current, w);
    p.bands[band_index(levels, level, Orientation::kLH)] = q.lh;
    p.bands[band_index(levels, level, Orientation::kHL)] = q.hl;
    p.bands[band_index(levels, level, Orientation::kHH)] = q.hh;
    current = q.ll;
  }
  p.bands[0] = current;
  return p;
}

template <typename T>
Tensor<T> dwt_inverse(const SubbandPyramid<T>& p, const Wavelet2d<T>& w) {
  if (static_cast<int>(p.bands.size()) != band_count(p.levels)) {
    throw ConfigError("dwt_inverse: pyramid has " + std::to_string(p.bands.size()) + " bands");
  }
  Tensor<T> current = p.bands[0];
  for (int level = p.levels; level >= 1; --level) {
    Quad<T> q{current, p.bands[band_index(p.levels, level, Orientation::kLH)],
              p.bands[band_index(p.levels, level, Orientation::kHL)],
              p.bands[band_index(p.levels, level, Orientation::kHH)]};
    current = wt2d_inverse(q, w);
  }
  return current;
}

#define LWC_INSTANTIATE(T)                                                                            \
  template class LiftingOperator<T>;                                                                  \
  template struct WaveletStage<T>;                                                                    \
  template struct Wavelet2d<T>;                                                                       \
  template WaveletStage<T> cdf97_stage<T>();                                                          \
  template WaveletStage<T> learned_stage<T>(Axis, std::uint64_t);                                     \
  template Wavelet2d<T> cdf97_wavelet2d<T>();                                                         \
  template Wavelet2d<T> learned_wavelet2d<T>(std::uint64_t);                                          \
  template std::pair<Tensor<T>, Tensor<T>> split_even_odd(const Tensor<T>&, Axis);                   \
  template Tensor<T> merge_even_odd(const Tensor<T>&, const Tensor<T>&, Axis);                        \
  template std::pair<Tensor<T>, Tensor<T>> lift_forward_1d(const Tensor<T>&, const WaveletStage<T>&, \
                                                           Axis);                                     \
  template Tensor<T> lift_inverse_1d(const Tensor<T>&, const Tensor<T>&, const WaveletStage<T>&, Axis); \
  template Quad<T> wt2d_forward(const Tensor<T>&, const Wavelet2d<T>&);                               \
  template Tensor<T> wt2d_inverse(const Quad<T>&, const Wavelet2d<T>&);                               \
  template SubbandPyramid<T> dwt_forward(const Tensor<T>&, const Wavelet2d<T>&, int);                 \
  template Tensor<T> dwt_inverse(const SubbandPyramid<T>&, const Wavelet2d<T>&);

LWC_INSTANTIATE(float)
LWC_INSTANTIATE(double)

#undef LWC_INSTANTIATE

}  // namespace lwc
