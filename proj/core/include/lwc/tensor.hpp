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

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace lwc {

/// Dense NCHW shape. Every tensor in the library is four dimensional.
struct Shape {
  int n = 0;
  int c = 0;
  int h = 0;
  int w = 0;

  std::size_t numel() const {
    return static_cast<std::size_t>(n) * c * h * w;
  }
  std::size_t index(int in, int ic, int ih, int iw) const {
    return ((static_cast<std::size_t>(in) * c + ic) * h + ih) * w + iw;
  }
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

namespace detail {

template <typename T>
struct Node {
  Shape shape;
  std::vector<T> value;
  std::vector<T> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this node's grad and accumulates into the parents it captured.
  std::function<void(const Node&)> backward;

  std::vector<T>& grad_buffer() {
    if (grad.empty()) grad.assign(value.size(), T(0));
    return grad;
  }
};

}  // namespace detail

/// Reference-counted handle to a node of the dynamic autodiff graph.
///
/// Copies share storage. Results of differentiable ops record their inputs
/// when gradient recording is enabled and at least one input requires grad;
/// the graph lives exactly as long as the handles that reach it.
template <typename T>
class Tensor {
 public:
  using value_type = T;
  using NodePtr = std::shared_ptr<detail::Node<T>>;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T(0));
  Tensor(Shape shape, std::vector<T> values);

  static Tensor from_node(NodePtr node) {
    Tensor t;
    t.node_ = std::move(node);
    return t;
  }

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t numel() const { return node_->value.size(); }

  std::span<const T> data() const { return node_->value; }
  /// In-place access for leaves (parameters, inputs). Mutating a tensor that
  /// is already part of a recorded graph invalidates that graph.
  std::span<T> mutable_data() { return node_->value; }
  T item() const;
  T at(int n, int c, int h, int w) const {
    return node_->value[node_->shape.index(n, c, h, w)];
  }

  bool requires_grad() const { return node_ && node_->requires_grad; }
  Tensor& set_requires_grad(bool on) {
    node_->requires_grad = on;
    return *this;
  }
  bool has_grad() const { return node_ && !node_->grad.empty(); }
  /// Gradient buffer; all zeros if nothing has been accumulated yet.
  std::span<const T> grad() const {
    return node_->grad_buffer();
  }
  std::span<T> mutable_grad() { return node_->grad_buffer(); }
  void zero_grad() { node_->grad.clear(); }

  /// Value copy with no graph attached.
  Tensor detach() const;

  const NodePtr& node() const { return node_; }

 private:
  NodePtr node_;
};

bool grad_enabled();

/// Disables graph recording on the current thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

/// Reverse-mode sweep from a single-element loss. Gradients accumulate into
/// every reachable tensor that requires grad.
template <typename T>
void backward(const Tensor<T>& loss);

template <typename T>
Tensor<T> cast_tensor(const Tensor<float>& x);

// --- element-wise ----------------------------------------------------------

template <typename T> Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> scale(const Tensor<T>& x, T factor);
template <typename T> Tensor<T> add_scalar(const Tensor<T>& x, T offset);
template <typename T> Tensor<T> tanh(const Tensor<T>& x);
template <typename T> Tensor<T> relu(const Tensor<T>& x);
template <typename T> Tensor<T> sigmoid(const Tensor<T>& x);
template <typename T> Tensor<T> softplus(const Tensor<T>& x);
template <typename T> Tensor<T> exp(const Tensor<T>& x);
template <typename T> Tensor<T> log2(const Tensor<T>& x);
template <typename T> Tensor<T> sqrt(const Tensor<T>& x);
template <typename T> Tensor<T> rsqrt(const Tensor<T>& x);
template <typename T> Tensor<T> reciprocal(const Tensor<T>& x);
template <typename T> Tensor<T> square(const Tensor<T>& x);
template <typename T> Tensor<T> abs(const Tensor<T>& x);
/// Standard normal CDF.
template <typename T> Tensor<T> normal_cdf(const Tensor<T>& x);
/// Clamp with zero gradient outside [lo, hi].
template <typename T> Tensor<T> clamp(const Tensor<T>& x, T lo, T hi);
/// max(x, bound); the gradient still flows where it would push x upwards.
template <typename T> Tensor<T> lower_bound(const Tensor<T>& x, T bound);
/// Per-channel multiply by a (1, C, 1, 1) tensor.
template <typename T> Tensor<T> mul_channel(const Tensor<T>& x, const Tensor<T>& v);
/// Rounds half away from zero; never differentiable.
template <typename T> Tensor<T> round_values(const Tensor<T>& x);

// --- reductions -------------------------------------------------------------

template <typename T> Tensor<T> sum(const Tensor<T>& x);
template <typename T> Tensor<T> mean(const Tensor<T>& x);
template <typename T> Tensor<T> mse(const Tensor<T>& a, const Tensor<T>& b);

// --- layout -----------------------------------------------------------------

template <typename T>
Tensor<T> concat_channels(const std::vector<Tensor<T>>& parts);
template <typename T>
Tensor<T> slice_channels(const Tensor<T>& x, int start, int count);
/// out(n, c, i, j) = x(n, c, rows[i], cols[j]). Indices may repeat.
template <typename T>
Tensor<T> gather2d(const Tensor<T>& x, std::span<const int> rows, std::span<const int> cols);
enum class Axis { kRows, kCols };
/// Inverse of even/odd polyphase split along `axis`.
template <typename T>
Tensor<T> interleave(const Tensor<T>& even, const Tensor<T>& odd, Axis axis);
/// Zero-order hold: every pixel becomes a 2x2 block.
template <typename T> Tensor<T> zoh_upsample2x(const Tensor<T>& x);
template <typename T> Tensor<T> avg_pool2x(const Tensor<T>& x);

// --- convolution and normalization -----------------------------------------

struct Conv2dGeometry {
  int stride_h = 1;
  int stride_w = 1;
  int pad_h = 0;
  int pad_w = 0;
};

/// Zero-padded cross-correlation. `weight` is (out, in, kH, kW) stored as an
/// NCHW shape; `bias` is (1, out, 1, 1) or undefined.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias,
                 Conv2dGeometry geometry);

/// Generalized divisive normalization, y_i = x_i / sqrt(beta_i + sum_j gamma_ij x_j^2).
/// `beta` is (1, C, 1, 1), `gamma` is (C, C, 1, 1). The inverse multiplies.
template <typename T>
Tensor<T> gdn(const Tensor<T>& x, const Tensor<T>& beta, const Tensor<T>& gamma, bool inverse);

}  // namespace lwc
