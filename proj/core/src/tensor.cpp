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

#include "lwc/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_set>

#include <Eigen/Core>

#include "lwc/errors.hpp"
#include "tensor_internal.hpp"

namespace lwc {

std::string Shape::str() const {
  return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," +
         std::to_string(w) + ")";
}

namespace {
thread_local bool g_grad_enabled = true;
}  // namespace

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

template <typename T>
Tensor<T>::Tensor(Shape shape, T fill) : node_(std::make_shared<detail::Node<T>>()) {
  if (shape.n < 0 || shape.c < 0 || shape.h < 0 || shape.w < 0) {
    throw ConfigError("negative tensor dimension " + shape.str());
  }
  node_->shape = shape;
  node_->value.assign(shape.numel(), fill);
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> values) : node_(std::make_shared<detail::Node<T>>()) {
  if (values.size() != shape.numel()) {
    throw ConfigError("tensor data length " + std::to_string(values.size()) +
                      " does not match shape " + shape.str());
  }
  node_->shape = shape;
  node_->value = std::move(values);
}

template <typename T>
T Tensor<T>::item() const {
  if (numel() != 1) throw UsageError("item() on tensor of shape " + shape().str());
  return node_->value[0];
}

template <typename T>
Tensor<T> Tensor<T>::detach() const {
  return Tensor<T>(shape(), node_->value);
}

template <typename T>
void backward(const Tensor<T>& loss) {
  if (!loss.defined() || loss.numel() != 1) {
    throw UsageError("backward() needs a single-element loss");
  }
  using NodePtr = typename Tensor<T>::NodePtr;
  // Iterative post-order DFS; reverse of the result is a valid topological order.
  std::vector<detail::Node<T>*> order;
  std::unordered_set<detail::Node<T>*> seen;
  std::vector<std::pair<detail::Node<T>*, std::size_t>> stack;
  detail::Node<T>* root = loss.node().get();
  if (!root->requires_grad) return;
  stack.emplace_back(root, 0);
  seen.insert(root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      const NodePtr& parent = node->parents[next++];
      if (parent->requires_grad && seen.insert(parent.get()).second) {
        stack.emplace_back(parent.get(), 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  root->grad_buffer()[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node<T>* node = *it;
    if (node->backward && !node->grad.empty()) node->backward(*node);
  }
}

template <typename T>
Tensor<T> cast_tensor(const Tensor<float>& x) {
  std::vector<T> values(x.data().begin(), x.data().end());
  return Tensor<T>(x.shape(), std::move(values));
}


namespace {

using detail::make_result;
using detail::Node;

template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ConfigError(std::string(op) + ": shape mismatch " + a.shape().str() + " vs " +
                      b.shape().str());
  }
}

// y = f(x); dx += g * df(x, y).
template <typename T, typename F, typename D>
Tensor<T> unary(const Tensor<T>& x, F f, D df) {
  std::vector<T> out(x.numel());
  auto in = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(in[i]);
  auto xn = x.node();
  return make_result<T>(x.shape(), std::move(out), {&x}, [xn, df](const Node<T>& self) {
    if (!xn->requires_grad) return;
    auto& gx = xn->grad_buffer();
    for (std::size_t i = 0; i < gx.size(); ++i) {
      gx[i] += self.grad[i] * df(xn->value[i], self.value[i]);
    }
  });
}

template <typename T>
T phi(T x) {
  return T(0.5) * std::erfc(-x / std::numbers::sqrt2_v<T>);
}

}  // namespace

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "add");
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
  auto an = a.node(), bn = b.node();
  return make_result<T>(a.shape(), std::move(out), {&a, &b}, [an, bn](const Node<T>& self) {
    for (auto* n : {an.get(), bn.get()}) {
      if (!n->requires_grad) continue;
      auto& g = n->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "sub");
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] - b.data()[i];
  auto an = a.node(), bn = b.node();
  return make_result<T>(a.shape(), std::move(out), {&a, &b}, [an, bn](const Node<T>& self) {
    if (an->requires_grad) {
      auto& g = an->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (bn->requires_grad) {
      auto& g = bn->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
    }
  });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "mul");
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
  auto an = a.node(), bn = b.node();
  return make_result<T>(a.shape(), std::move(out), {&a, &b}, [an, bn](const Node<T>& self) {
    if (an->requires_grad) {
      auto& g = an->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * bn->value[i];
    }
    if (bn->requires_grad) {
      auto& g = bn->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * an->value[i];
    }
  });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T factor) {
  return unary(x, [factor](T v) { return v * factor; }, [factor](T, T) { return factor; });
}

template <typename T>
Tensor<T> add_scalar(const Tensor<T>& x, T offset) {
  return unary(x, [offset](T v) { return v + offset; }, [](T, T) { return T(1); });
}

template <typename T>
Tensor<T> tanh(const Tensor<T>& x) {
  // Eigen's vectorized tanh; the scalar libm call dominates the learned
  // lifting operators otherwise.
  std::vector<T> out(x.numel());
  const auto in = x.data();
  Eigen::Map<Eigen::Array<T, Eigen::Dynamic, 1>>(out.data(), out.size()) =
      Eigen::Map<const Eigen::Array<T, Eigen::Dynamic, 1>>(in.data(), in.size()).tanh();
  auto xn = x.node();
  return make_result<T>(x.shape(), std::move(out), {&x}, [xn](const Node<T>& self) {
    if (!xn->requires_grad) return;
    auto& gx = xn->grad_buffer();
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += self.grad[i] * (T(1) - self.value[i] * self.value[i]);
  });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  return unary(x, [](T v) { return v > T(0) ? v : T(0); },
               [](T v, T) { return v > T(0) ? T(1) : T(0); });
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
  return unary(
      x,
      [](T v) {
        if (v >= T(0)) return T(1) / (T(1) + std::exp(-v));
        const T e = std::exp(v);
        return e / (T(1) + e);
      },
      [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Tensor<T> softplus(const Tensor<T>& x) {
  return unary(
      x, [](T v) { return v > T(20) ? v : std::log1p(std::exp(v)); },
      [](T v, T) {
        if (v >= T(0)) return T(1) / (T(1) + std::exp(-v));
        const T e = std::exp(v);
        return e / (T(1) + e);
      });
}

template <typename T>
Tensor<T> exp(const Tensor<T>& x) {
  return unary(x, [](T v) { return std::exp(v); }, [](T, T y) { return y; });
}

template <typename T>
Tensor<T> log2(const Tensor<T>& x) {
  return unary(x, [](T v) { return std::log2(v); },
               [](T v, T) { return T(1) / (v * std::numbers::ln2_v<T>); });
}

template <typename T>
Tensor<T> sqrt(const Tensor<T>& x) {
  return unary(x, [](T v) { return std::sqrt(v); }, [](T, T y) { return T(0.5) / y; });
}

template <typename T>
Tensor<T> rsqrt(const Tensor<T>& x) {
  return unary(x, [](T v) { return T(1) / std::sqrt(v); },
               [](T v, T y) { return T(-0.5) * y / v; });
}

template <typename T>
Tensor<T> reciprocal(const Tensor<T>& x) {
  return unary(x, [](T v) { return T(1) / v; }, [](T, T y) { return -y * y; });
}

template <typename T>
Tensor<T> square(const Tensor<T>& x) {
  return unary(x, [](T v) { return v * v; }, [](T v, T) { return T(2) * v; });
}

template <typename T>
Tensor<T> abs(const Tensor<T>& x) {
  return unary(x, [](T v) { return std::abs(v); },
               [](T v, T) { return v > T(0) ? T(1) : (v < T(0) ? T(-1) : T(0)); });
}

template <typename T>
Tensor<T> normal_cdf(const Tensor<T>& x) {
  return unary(x, [](T v) { return phi(v); }, [](T v, T) {
    return std::exp(T(-0.5) * v * v) / std::sqrt(T(2) * std::numbers::pi_v<T>);
  });
}

template <typename T>
Tensor<T> clamp(const Tensor<T>& x, T lo, T hi) {
  return unary(x, [lo, hi](T v) { return std::clamp(v, lo, hi); },
               [lo, hi](T v, T) { return (v >= lo && v <= hi) ? T(1) : T(0); });
}

template <typename T>
Tensor<T> lower_bound(const Tensor<T>& x, T bound) {
  std::vector<T> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(x.data()[i], bound);
  auto xn = x.node();
  return make_result<T>(x.shape(), std::move(out), {&x}, [xn, bound](const Node<T>& self) {
    if (!xn->requires_grad) return;
    auto& g = xn->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) {
      // Descent moves x by -grad, so negative grads raise x off the bound.
      if (xn->value[i] >= bound || self.grad[i] < T(0)) g[i] += self.grad[i];
    }
  });
}

template <typename T>
Tensor<T> mul_channel(const Tensor<T>& x, const Tensor<T>& v) {
  const Shape s = x.shape();
  if (v.shape() != Shape{1, s.c, 1, 1}) {
    throw ConfigError("mul_channel: expected (1," + std::to_string(s.c) + ",1,1), got " +
                      v.shape().str());
  }
  const std::size_t plane = static_cast<std::size_t>(s.h) * s.w;
  std::vector<T> out(x.numel());
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      const std::size_t base = s.index(n, c, 0, 0);
      const T k = v.data()[c];
      for (std::size_t i = 0; i < plane; ++i) out[base + i] = x.data()[base + i] * k;
    }
  }
  auto xn = x.node(), vn = v.node();
  return make_result<T>(s, std::move(out), {&x, &v}, [xn, vn, s, plane](const Node<T>& self) {
    for (int n = 0; n < s.n; ++n) {
      for (int c = 0; c < s.c; ++c) {
        const std::size_t base = s.index(n, c, 0, 0);
        if (xn->requires_grad) {
          auto& g = xn->grad_buffer();
          const T k = vn->value[c];
          for (std::size_t i = 0; i < plane; ++i) g[base + i] += self.grad[base + i] * k;
        }
        if (vn->requires_grad) {
          T acc = 0;
          for (std::size_t i = 0; i < plane; ++i) acc += self.grad[base + i] * xn->value[base + i];
          vn->grad_buffer()[c] += acc;
        }
      }
    }
  });
}

template <typename T>
Tensor<T> round_values(const Tensor<T>& x) {
  std::vector<T> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::round(x.data()[i]);
  return Tensor<T>(x.shape(), std::move(out));
}

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
  T acc = 0;
  for (T v : x.data()) acc += v;
  auto xn = x.node();
  return make_result<T>(Shape{1, 1, 1, 1}, {acc}, {&x}, [xn](const Node<T>& self) {
    if (!xn->requires_grad) return;
    for (auto& g : xn->grad_buffer()) g += self.grad[0];
  });
}

template <typename T>
Tensor<T> mean(const Tensor<T>& x) {
  if (x.numel() == 0) throw ConfigError("mean of empty tensor");
  return scale(sum(x), T(1) / static_cast<T>(x.numel()));
}

template <typename T>
Tensor<T> mse(const Tensor<T>& a, const Tensor<T>& b) {
  return mean(square(sub(a, b)));
}

template <typename T>
Tensor<T> concat_channels(const std::vector<Tensor<T>>& parts) {
  if (parts.empty()) throw ConfigError("concat_channels: no inputs");
  Shape s = parts[0].shape();
  s.c = 0;
  for (const auto& p : parts) {
    const Shape& ps = p.shape();
    if (ps.n != s.n || ps.h != s.h || ps.w != s.w) {
      throw ConfigError("concat_channels: incompatible shape " + ps.str());
    }
    s.c += ps.c;
  }
  const std::size_t plane = static_cast<std::size_t>(s.h) * s.w;
  std::vector<T> out(s.numel());
  std::vector<int> offsets;
  int offset = 0;
  for (const auto& p : parts) {
    offsets.push_back(offset);
    for (int n = 0; n < s.n; ++n) {
      const std::size_t len = plane * p.shape().c;
      std::copy_n(p.data().begin() + n * len, len, out.begin() + s.index(n, offset, 0, 0));
    }
    offset += p.shape().c;
  }
  std::vector<typename Tensor<T>::NodePtr> nodes;
  for (const auto& p : parts) nodes.push_back(p.node());
  return detail::make_result_n<T>(
      s, std::move(out), parts, [nodes, offsets, s, plane](const Node<T>& self) {
        for (std::size_t k = 0; k < nodes.size(); ++k) {
          if (!nodes[k]->requires_grad) continue;
          auto& g = nodes[k]->grad_buffer();
          const std::size_t len = plane * nodes[k]->shape.c;
          for (int n = 0; n < s.n; ++n) {
            const std::size_t src = s.index(n, offsets[k], 0, 0);
            for (std::size_t i = 0; i < len; ++i) g[n * len + i] += self.grad[src + i];
          }
        }
      });
}

template <typename T>
Tensor<T> slice_channels(const Tensor<T>& x, int start, int count) {
  const Shape xs = x.shape();
  if (start < 0 || count < 0 || start + count > xs.c) {
    throw ConfigError("slice_channels: range out of bounds for " + xs.str());
  }
  const Shape s{xs.n, count, xs.h, xs.w};
  const std::size_t len = static_cast<std::size_t>(count) * xs.h * xs.w;
  std::vector<T> out(s.numel());
  for (int n = 0; n < xs.n; ++n) {
    std::copy_n(x.data().begin() + xs.index(n, start, 0, 0), len, out.begin() + n * len);
  }
  auto xn = x.node();
  return make_result<T>(s, std::move(out), {&x}, [xn, xs, start, len](const Node<T>& self) {
    if (!xn->requires_grad) return;
    auto& g = xn->grad_buffer();
    for (int n = 0; n < xs.n; ++n) {
      const std::size_t dst = xs.index(n, start, 0, 0);
      for (std::size_t i = 0; i < len; ++i) g[dst + i] += self.grad[n * len + i];
    }
  });
}

template <typename T>
Tensor<T> gather2d(const Tensor<T>& x, std::span<const int> rows, std::span<const int> cols) {
  const Shape xs = x.shape();
  for (int r : rows) {
    if (r < 0 || r >= xs.h) throw ConfigError("gather2d: row index out of range");
  }
  for (int c : cols) {
    if (c < 0 || c >= xs.w) throw ConfigError("gather2d: column index out of range");
  }
  const Shape s{xs.n, xs.c, static_cast<int>(rows.size()), static_cast<int>(cols.size())};
  std::vector<T> out(s.numel());
  std::size_t k = 0;
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      for (int r : rows) {
        const T* src = x.data().data() + xs.index(n, c, r, 0);
        for (int col : cols) out[k++] = src[col];
      }
    }
  }
  auto xn = x.node();
  std::vector<int> rv(rows.begin(), rows.end()), cv(cols.begin(), cols.end());
  return make_result<T>(s, std::move(out), {&x}, [xn, xs, s, rv, cv](const Node<T>& self) {
    if (!xn->requires_grad) return;
    auto& g = xn->grad_buffer();
    std::size_t k = 0;
    for (int n = 0; n < s.n; ++n) {
      for (int c = 0; c < s.c; ++c) {
        for (int r : rv) {
          T* dst = g.data() + xs.index(n, c, r, 0);
          for (int col : cv) dst[col] += self.grad[k++];
        }
      }
    }
  });
}

template <typename T>
Tensor<T> interleave(const Tensor<T>& even, const Tensor<T>& odd, Axis axis) {
  require_same_shape(even, odd, "interleave");
  const Shape hs = even.shape();
  Shape s = hs;
  if (axis == Axis::kRows) {
    s.h *= 2;
  } else {
    s.w *= 2;
  }
  std::vector<T> out(s.numel());
  auto out_index = [axis, s](int n, int c, int i, int j, int parity) {
    return axis == Axis::kRows ? s.index(n, c, 2 * i + parity, j) : s.index(n, c, i, 2 * j + parity);
  };
  for (int n = 0; n < hs.n; ++n) {
    for (int c = 0; c < hs.c; ++c) {
      for (int i = 0; i < hs.h; ++i) {
        for (int j = 0; j < hs.w; ++j) {
          const std::size_t src = hs.index(n, c, i, j);
          out[out_index(n, c, i, j, 0)] = even.data()[src];
          out[out_index(n, c, i, j, 1)] = odd.data()[src];
        }
      }
    }
  }
  auto en = even.node(), on = odd.node();
  return make_result<T>(s, std::move(out), {&even, &odd},
                        [en, on, hs, out_index](const Node<T>& self) {
                          for (int parity = 0; parity < 2; ++parity) {
                            auto* node = parity == 0 ? en.get() : on.get();
                            if (!node->requires_grad) continue;
                            auto& g = node->grad_buffer();
                            for (int n = 0; n < hs.n; ++n) {
                              for (int c = 0; c < hs.c; ++c) {
                                for (int i = 0; i < hs.h; ++i) {
                                  for (int j = 0; j < hs.w; ++j) {
                                    g[hs.index(n, c, i, j)] +=
                                        self.grad[out_index(n, c, i, j, parity)];
                                  }
                                }
                              }
                            }
                          }
                        });
}

template <typename T>
Tensor<T> zoh_upsample2x(const Tensor<T>& x) {
  const Shape xs = x.shape();
  const Shape s{xs.n, xs.c, xs.h * 2, xs.w * 2};
  std::vector<T> out(s.numel());
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      for (int i = 0; i < s.h; ++i) {
        for (int j = 0; j < s.w; ++j) out[s.index(n, c, i, j)] = x.at(n, c, i / 2, j / 2);
      }
    }
  }
  auto xn = x.node();
  return make_result<T>(s, std::move(out), {&x}, [xn, xs, s](const Node<T>& self) {
    if (!xn->requires_grad) return;
    auto& g = xn->grad_buffer();
    for (int n = 0; n < s.n; ++n) {
      for (int c = 0; c < s.c; ++c) {
        for (int i = 0; i < s.h; ++i) {
          for (int j = 0; j < s.w; ++j) g[xs.index(n, c, i / 2, j / 2)] += self.grad[s.index(n, c, i, j)];
        }
      }
    }
  });
}

template <typename T>
Tensor<T> avg_pool2x(const Tensor<T>& x) {
  const Shape xs = x.shape();
  if (xs.h % 2 != 0 || xs.w % 2 != 0) throw ConfigError("avg_pool2x: odd spatial size " + xs.str());
  const Shape s{xs.n, xs.c, xs.h / 2, xs.w / 2};
  std::vector<T> out(s.numel(), T(0));
  for (int n = 0; n < xs.n; ++n) {
    for (int c = 0; c < xs.c; ++c) {
      for (int i = 0; i < xs.h; ++i) {
        for (int j = 0; j < xs.w; ++j) out[s.index(n, c, i / 2, j / 2)] += T(0.25) * x.at(n, c, i, j);
      }
    }
  }
  auto xn = x.node();
  return make_result<T>(s, std::move(out), {&x}, [xn, xs, s](const Node<T>& self) {
    if (!xn->requires_grad) return;
    auto& g = xn->grad_buffer();
    for (int n = 0; n < xs.n; ++n) {
      for (int c = 0; c < xs.c; ++c) {
        for (int i = 0; i < xs.h; ++i) {
          for (int j = 0; j < xs.w; ++j) {
            g[xs.index(n, c, i, j)] += T(0.25) * self.grad[s.index(n, c, i / 2, j / 2)];
          }
        }
      }
    }
  });
}

template <typename T>
Tensor<T> gdn(const Tensor<T>& x, const Tensor<T>& beta, const Tensor<T>& gamma, bool inverse) {
  const int ch = x.shape().c;
  if (beta.shape() != Shape{1, ch, 1, 1} || gamma.shape() != Shape{ch, ch, 1, 1}) {
    throw ConfigError("gdn: parameter shapes do not match " + std::to_string(ch) + " channels");
  }
  const Tensor<T> norm = conv2d(square(x), gamma, beta, Conv2dGeometry{});
  return mul(x, inverse ? sqrt(norm) : rsqrt(norm));
}

#define LWC_INSTANTIATE(T)                                                                       \
  template class Tensor<T>;                                                                      \
  template void backward<T>(const Tensor<T>&);                                                   \
  template Tensor<T> cast_tensor<T>(const Tensor<float>&);                                       \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                    \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                                    \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                                    \
  template Tensor<T> scale(const Tensor<T>&, T);                                                 \
  template Tensor<T> add_scalar(const Tensor<T>&, T);                                            \
  template Tensor<T> tanh(const Tensor<T>&);                                                     \
  template Tensor<T> relu(const Tensor<T>&);                                                     \
  template Tensor<T> sigmoid(const Tensor<T>&);                                                  \
  template Tensor<T> softplus(const Tensor<T>&);                                                 \
  template Tensor<T> exp(const Tensor<T>&);                                                      \
  template Tensor<T> log2(const Tensor<T>&);                                                     \
  template Tensor<T> sqrt(const Tensor<T>&);                                                     \
  template Tensor<T> rsqrt(const Tensor<T>&);                                                    \
  template Tensor<T> reciprocal(const Tensor<T>&);                                               \
  template Tensor<T> square(const Tensor<T>&);                                                   \
  template Tensor<T> abs(const Tensor<T>&);                                                      \
  template Tensor<T> normal_cdf(const Tensor<T>&);                                               \
  template Tensor<T> clamp(const Tensor<T>&, T, T);                                              \
  template Tensor<T> lower_bound(const Tensor<T>&, T);                                           \
  template Tensor<T> mul_channel(const Tensor<T>&, const Tensor<T>&);                            \
  template Tensor<T> round_values(const Tensor<T>&);                                             \
  template Tensor<T> sum(const Tensor<T>&);                                                      \
  template Tensor<T> mean(const Tensor<T>&);                                                     \
  template Tensor<T> mse(const Tensor<T>&, const Tensor<T>&);                                    \
  template Tensor<T> concat_channels(const std::vector<Tensor<T>>&);                             \
  template Tensor<T> slice_channels(const Tensor<T>&, int, int);                                 \
  template Tensor<T> gather2d(const Tensor<T>&, std::span<const int>, std::span<const int>);     \
  template Tensor<T> interleave(const Tensor<T>&, const Tensor<T>&, Axis);                       \
  template Tensor<T> zoh_upsample2x(const Tensor<T>&);                                           \
  template Tensor<T> avg_pool2x(const Tensor<T>&);                                               \
  template Tensor<T> gdn(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, bool);

LWC_INSTANTIATE(float)
LWC_INSTANTIATE(double)

#undef LWC_INSTANTIATE

}  // namespace lwc
