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
#include <utility>
#include <vector>

#include "lwc/tensor.hpp"

namespace lwc {

/// Named handles to trainable tensors. Handles share storage with the
/// modules that own them, so updating through the list updates the model.
template <typename T>
using ParamList = std::vector<std::pair<std::string, Tensor<T>>>;

/// Seeded source for parameter initialization. Draws are made in double and
/// narrowed, so float and double models built from one seed agree.
class Initializer {
 public:
  explicit Initializer(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  template <typename T>
  Tensor<T> uniform_tensor(Shape shape, double bound) {
    std::vector<T> v(shape.numel());
    for (auto& x : v) x = static_cast<T>(uniform(-bound, bound));
    return Tensor<T>(shape, std::move(v));
  }

 private:
  std::mt19937_64 rng_;
};

enum class MaskType { kNone, kA, kB };

/// Raster-causal kernel mask, row-major kH x kW. Taps below the centre row and
/// right of centre on the centre row are zero; type A also zeroes the centre.
std::vector<int> causal_mask(int k_h, int k_w, MaskType type);

/// Same-padded convolution whose kernel is multiplied by the causal mask
/// before use. Kernel dimensions must be odd.
template <typename T>
Tensor<T> masked_conv2d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias,
                        MaskType type);

/// Stride-1 same-padded convolution layer, optionally masked.
template <typename T>
struct Conv2d {
  Tensor<T> weight;  // (out, in, kH, kW)
  Tensor<T> bias;    // (1, out, 1, 1)
  MaskType mask = MaskType::kNone;

  Conv2d() = default;
  /// Glorot-uniform weights, zero bias.
  Conv2d(int in_ch, int out_ch, int k_h, int k_w, Initializer& init, MaskType mask = MaskType::kNone);

  int in_channels() const { return weight.shape().c; }
  int out_channels() const { return weight.shape().n; }
  int kernel_h() const { return weight.shape().h; }
  int kernel_w() const { return weight.shape().w; }

  Tensor<T> operator()(const Tensor<T>& x) const;
  void zero();
  void collect(const std::string& prefix, ParamList<T>& out) const;
};

/// GDN layer with positivity by reparameterization: beta = max(b^2, 1e-6),
/// gamma = g^2.
template <typename T>
struct Gdn {
  static constexpr double kBetaFloor = 1e-6;

  Tensor<T> beta_raw;   // (1, C, 1, 1)
  Tensor<T> gamma_raw;  // (C, C, 1, 1)
  bool inverse = false;

  Gdn() = default;
  /// beta = 1 and gamma = gamma_diag * I.
  Gdn(int channels, bool inverse, double gamma_diag);

  Tensor<T> beta() const;
  Tensor<T> gamma() const;
  Tensor<T> operator()(const Tensor<T>& x) const;
  void collect(const std::string& prefix, ParamList<T>& out) const;
};

struct AdamOptions {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moment buffers for one parameter list.
template <typename T>
struct AdamState {
  AdamOptions options;
  std::int64_t step = 0;
  std::vector<std::vector<double>> first;
  std::vector<std::vector<double>> second;
};

template <typename T>
AdamState<T> make_adam_state(const ParamList<T>& params, AdamOptions options);

/// One bias-corrected Adam update from the parameters' accumulated grads.
template <typename T>
void adam_step(ParamList<T>& params, AdamState<T>& state);

template <typename T>
void zero_grads(ParamList<T>& params);

template <typename T>
void set_requires_grad(ParamList<T>& params, bool on);

/// Copies values between parameter lists with identical names and shapes.
template <typename From, typename To>
void copy_params(const ParamList<From>& from, ParamList<To>& to);

std::size_t count_parameters(const ParamList<float>& params);

}  // namespace lwc
