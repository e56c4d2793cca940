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

#include "lwc/nn.hpp"

#include <cmath>
#include <map>

#include "lwc/errors.hpp"

namespace lwc {

std::vector<int> causal_mask(int k_h, int k_w, MaskType type) {
  if (k_h % 2 == 0 || k_w % 2 == 0) {
    throw ConfigError("masked convolution needs odd kernel sizes, got " + std::to_string(k_h) + "x" +
                      std::to_string(k_w));
  }
  std::vector<int> mask(static_cast<std::size_t>(k_h) * k_w, 1);
  if (type == MaskType::kNone) return mask;
  const int ch = k_h / 2, cw = k_w / 2;
  for (int i = 0; i < k_h; ++i) {
    for (int j = 0; j < k_w; ++j) {
      const bool after = i > ch || (i == ch && j > cw);
      const bool centre = i == ch && j == cw;
      if (after || (centre && type == MaskType::kA)) mask[i * k_w + j] = 0;
    }
  }
  return mask;
}

namespace {

template <typename T>
Tensor<T> mask_tensor(Shape ws, MaskType type) {
  const auto pattern = causal_mask(ws.h, ws.w, type);
  std::vector<T> v(ws.numel());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<T>(pattern[i % pattern.size()]);
  return Tensor<T>(ws, std::move(v));
}

}  // namespace

template <typename T>
Tensor<T> masked_conv2d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias,
                        MaskType type) {
  const Shape ws = weight.shape();
  const Conv2dGeometry same{1, 1, ws.h / 2, ws.w / 2};
  if (type == MaskType::kNone) {
    if (ws.h % 2 == 0 || ws.w % 2 == 0) throw ConfigError("same padding needs odd kernel sizes");
    return conv2d(x, weight, bias, same);
  }
  return conv2d(x, mul(weight, mask_tensor<T>(ws, type)), bias, same);
}

template <typename T>
Conv2d<T>::Conv2d(int in_ch, int out_ch, int k_h, int k_w, Initializer& init, MaskType mask_type)
    : mask(mask_type) {
  if (k_h % 2 == 0 || k_w % 2 == 0) throw ConfigError("Conv2d layers use odd kernel sizes");
  const double fan_in = static_cast<double>(in_ch) * k_h * k_w;
  const double fan_out = static_cast<double>(out_ch) * k_h * k_w;
  weight = init.uniform_tensor<T>(Shape{out_ch, in_ch, k_h, k_w}, std::sqrt(6.0 / (fan_in + fan_out)));
  bias = Tensor<T>(Shape{1, out_ch, 1, 1});
}

template <typename T>
Tensor<T> Conv2d<T>::operator()(const Tensor<T>& x) const {
  return masked_conv2d(x, weight, bias, mask);
}

template <typename T>
void Conv2d<T>::zero() {
  for (auto& v : weight.mutable_data()) v = T(0);
  for (auto& v : bias.mutable_data()) v = T(0);
}

template <typename T>
void Conv2d<T>::collect(const std::string& prefix, ParamList<T>& out) const {
  out.emplace_back(prefix + ".weight", weight);
  out.emplace_back(prefix + ".bias", bias);
}

template <typename T>
Gdn<T>::Gdn(int channels, bool inv, double gamma_diag) : inverse(inv) {
  beta_raw = Tensor<T>(Shape{1, channels, 1, 1}, T(1));
  gamma_raw = Tensor<T>(Shape{channels, channels, 1, 1});
  const T g = static_cast<T>(std::sqrt(gamma_diag));
  for (int c = 0; c < channels; ++c) gamma_raw.mutable_data()[c * channels + c] = g;
}

template <typename T>
Tensor<T> Gdn<T>::beta() const {
  return lower_bound(square(beta_raw), static_cast<T>(kBetaFloor));
}

template <typename T>
Tensor<T> Gdn<T>::gamma() const {
  return square(gamma_raw);
}

template <typename T>
Tensor<T> Gdn<T>::operator()(const Tensor<T>& x) const {
  return gdn(x, beta(), gamma(), inverse);
}

template <typename T>
void Gdn<T>::collect(const std::string& prefix, ParamList<T>& out) const {
  out.emplace_back(prefix + ".beta", beta_raw);
  out.emplace_back(prefix + ".gamma", gamma_raw);
}

template <typename T>
AdamState<T> make_adam_state(const ParamList<T>& params, AdamOptions options) {
  AdamState<T> state;
  state.options = options;
  for (const auto& [name, p] : params) {
    state.first.emplace_back(p.numel(), 0.0);
    state.second.emplace_back(p.numel(), 0.0);
  }
  return state;
}

template <typename T>
void adam_step(ParamList<T>& params, AdamState<T>& state) {
  if (state.first.size() != params.size()) throw ConfigError("Adam state does not match parameter list");
  const AdamOptions& o = state.options;
  state.step += 1;
  const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor<T>& p = params[k].second;
    if (!p.has_grad()) continue;
    auto& m = state.first[k];
    auto& v = state.second[k];
    if (m.size() != p.numel()) throw ConfigError("Adam moment buffer shape mismatch for " + params[k].first);
    auto value = p.mutable_data();
    auto grad = p.grad();
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = grad[i];
      m[i] = o.beta1 * m[i] + (1.0 - o.beta1) * g;
      v[i] = o.beta2 * v[i] + (1.0 - o.beta2) * g * g;
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      value[i] = static_cast<T>(value[i] - o.learning_rate * m_hat / (std::sqrt(v_hat) + o.epsilon));
    }
  }
}

template <typename T>
void zero_grads(ParamList<T>& params) {
  for (auto& [name, p] : params) p.zero_grad();
}

template <typename T>
void set_requires_grad(ParamList<T>& params, bool on) {
  for (auto& [name, p] : params) p.set_requires_grad(on);
}

template <typename From, typename To>
void copy_params(const ParamList<From>& from, ParamList<To>& to) {
  std::map<std::string, const Tensor<From>*> by_name;
  for (const auto& [name, p] : from) by_name[name] = &p;
  for (auto& [name, p] : to) {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw ConfigError("missing parameter " + name);
    if (it->second->shape() != p.shape()) throw ConfigError("shape mismatch for parameter " + name);
    auto src = it->second->data();
    auto dst = p.mutable_data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = static_cast<To>(src[i]);
  }
}

std::size_t count_parameters(const ParamList<float>& params) {
  std::size_t n = 0;
  for (const auto& [name, p] : params) n += p.numel();
  return n;
}

template Tensor<float> masked_conv2d(const Tensor<float>&, const Tensor<float>&, const Tensor<float>&,
                                     MaskType);
template Tensor<double> masked_conv2d(const Tensor<double>&, const Tensor<double>&,
                                      const Tensor<double>&, MaskType);
template struct Conv2d<float>;
template struct Conv2d<double>;
template struct Gdn<float>;
template struct Gdn<double>;
template AdamState<float> make_adam_state(const ParamList<float>&, AdamOptions);
template AdamState<double> make_adam_state(const ParamList<double>&, AdamOptions);
template void adam_step(ParamList<float>&, AdamState<float>&);
template void adam_step(ParamList<double>&, AdamState<double>&);
template void zero_grads(ParamList<float>&);
template void zero_grads(ParamList<double>&);
template void set_requires_grad(ParamList<float>&, bool);
template void set_requires_grad(ParamList<double>&, bool);
template void copy_params(const ParamList<float>&, ParamList<float>&);
template void copy_params(const ParamList<float>&, ParamList<double>&);
template void copy_params(const ParamList<double>&, ParamList<float>&);
template void copy_params(const ParamList<double>&, ParamList<double>&);

}  // namespace lwc
