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

#include <Eigen/Core>
#include <algorithm>

#include "lwc/errors.hpp"
#include "lwc/tensor.hpp"
#include "tensor_internal.hpp"

namespace lwc {

namespace {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMatrix = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMapMatrix = Eigen::Map<const RowMatrix<T>>;

struct ConvDims {
  int in_c, in_h, in_w;
  int k_h, k_w;
  int out_h, out_w;
  Conv2dGeometry g;

  bool pointwise() const {
    return k_h == 1 && k_w == 1 && g.stride_h == 1 && g.stride_w == 1 && g.pad_h == 0 && g.pad_w == 0;
  }
  int rows() const { return in_c * k_h * k_w; }
  int cols() const { return out_h * out_w; }
};

// Output columns [lo, hi) whose input column oj*s - p + kj lies inside [0, in_w).
inline std::pair<int, int> valid_cols(const ConvDims& d, int kj) {
  const int s = d.g.stride_w, off = kj - d.g.pad_w;
  const int lo = off >= 0 ? 0 : (-off + s - 1) / s;
  const int hi = std::min(d.out_w, d.in_w - off <= 0 ? 0 : (d.in_w - off + s - 1) / s);
  return {std::min(lo, hi), hi};
}

// col(ci*kh*kw + ki*kw + kj, n*cols + oi*out_w + oj) = x(n, ci, oi*s - p + ki, oj*s - p + kj),
// zero outside; `ld` is the row stride of col, `n` the sample's column block.
template <typename T>
void im2col(const T* x, const ConvDims& d, T* col, std::size_t ld) {
  for (int ci = 0; ci < d.in_c; ++ci) {
    for (int ki = 0; ki < d.k_h; ++ki) {
      for (int kj = 0; kj < d.k_w; ++kj) {
        T* row = col + static_cast<std::size_t>((ci * d.k_h + ki) * d.k_w + kj) * ld;
        const auto [lo, hi] = valid_cols(d, kj);
        const int off = kj - d.g.pad_w;
        for (int oi = 0; oi < d.out_h; ++oi) {
          const int ii = oi * d.g.stride_h - d.g.pad_h + ki;
          T* dst = row + static_cast<std::size_t>(oi) * d.out_w;
          if (ii < 0 || ii >= d.in_h) {
            std::fill_n(dst, d.out_w, T(0));
            continue;
          }
          const T* src = x + (static_cast<std::size_t>(ci) * d.in_h + ii) * d.in_w + off;
          std::fill_n(dst, lo, T(0));
          if (d.g.stride_w == 1) {
            std::copy(src + lo, src + hi, dst + lo);
          } else {
            for (int oj = lo; oj < hi; ++oj) dst[oj] = src[oj * d.g.stride_w];
          }
          std::fill(dst + hi, dst + d.out_w, T(0));
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const T* col, const ConvDims& d, std::size_t ld, T* x) {
  for (int ci = 0; ci < d.in_c; ++ci) {
    for (int ki = 0; ki < d.k_h; ++ki) {
      for (int kj = 0; kj < d.k_w; ++kj) {
        const T* row = col + static_cast<std::size_t>((ci * d.k_h + ki) * d.k_w + kj) * ld;
        const auto [lo, hi] = valid_cols(d, kj);
        const int off = kj - d.g.pad_w;
        for (int oi = 0; oi < d.out_h; ++oi) {
          const int ii = oi * d.g.stride_h - d.g.pad_h + ki;
          if (ii < 0 || ii >= d.in_h) continue;
          const T* src = row + static_cast<std::size_t>(oi) * d.out_w;
          T* dst = x + (static_cast<std::size_t>(ci) * d.in_h + ii) * d.in_w + off;
          for (int oj = lo; oj < hi; ++oj) dst[oj * d.g.stride_w] += src[oj];
        }
      }
    }
  }
}

}  // namespace

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias,
                 Conv2dGeometry geometry) {
  const Shape xs = x.shape();
  const Shape ws = weight.shape();
  if (ws.c != xs.c) {
    throw ConfigError("conv2d: input has " + std::to_string(xs.c) + " channels, kernel expects " +
                      std::to_string(ws.c));
  }
  if (bias.defined() && bias.shape() != Shape{1, ws.n, 1, 1}) {
    throw ConfigError("conv2d: bias shape " + bias.shape().str() + " does not match kernel " +
                      ws.str());
  }
  if (geometry.stride_h < 1 || geometry.stride_w < 1 || geometry.pad_h < 0 || geometry.pad_w < 0) {
    throw ConfigError("conv2d: invalid stride or padding");
  }
  ConvDims d{xs.c, xs.h, xs.w, ws.h, ws.w, 0, 0, geometry};
  d.out_h = (xs.h + 2 * geometry.pad_h - ws.h) / geometry.stride_h + 1;
  d.out_w = (xs.w + 2 * geometry.pad_w - ws.w) / geometry.stride_w + 1;
  if (xs.h + 2 * geometry.pad_h < ws.h || xs.w + 2 * geometry.pad_w < ws.w) {
    throw ConfigError("conv2d: kernel " + ws.str() + " larger than padded input " + xs.str());
  }
  const Shape os{xs.n, ws.n, d.out_h, d.out_w};
  const int out_c = ws.n;
  const std::size_t in_len = static_cast<std::size_t>(xs.c) * xs.h * xs.w;
  const std::size_t out_len = static_cast<std::size_t>(out_c) * d.cols();

  // One GEMM over the whole batch: (out_c, rows) x (rows, N * cols).
  const std::size_t cols = d.cols();
  const std::size_t ld = cols * xs.n;
  std::vector<T> col(static_cast<std::size_t>(d.rows()) * ld);
  for (int n = 0; n < xs.n; ++n) {
    const T* xn = x.data().data() + n * in_len;
    if (d.pointwise()) {
      for (int r = 0; r < d.rows(); ++r) std::copy_n(xn + r * cols, cols, col.data() + r * ld + n * cols);
    } else {
      im2col(xn, d, col.data() + n * cols, ld);
    }
  }
  ConstMapMatrix<T> w_mat(weight.data().data(), out_c, d.rows());
  RowMatrix<T> prod = w_mat * ConstMapMatrix<T>(col.data(), d.rows(), ld);
  std::vector<T> out(os.numel());
  for (int n = 0; n < xs.n; ++n) {
    for (int oc = 0; oc < out_c; ++oc) {
      const T b = bias.defined() ? bias.data()[oc] : T(0);
      const T* src = prod.data() + oc * ld + n * cols;
      T* dst = out.data() + n * out_len + oc * cols;
      for (std::size_t k = 0; k < cols; ++k) dst[k] = src[k] + b;
    }
  }

  auto xnode = x.node(), wnode = weight.node(), bnode = bias.defined() ? bias.node() : nullptr;
  return detail::make_result<T>(
      os, std::move(out), {&x, &weight, &bias},
      [xnode, wnode, bnode, d, in_len, out_len, out_c](const detail::Node<T>& self) {
        const int batch = xnode->shape.n;
        const bool want_x = xnode->requires_grad;
        const bool want_w = wnode->requires_grad;
        const bool want_b = bnode && bnode->requires_grad;
        const std::size_t cols = d.cols();
        const std::size_t ld = cols * batch;
        // Output gradient gathered as (out_c, N * cols).
        RowMatrix<T> g(out_c, static_cast<Eigen::Index>(ld));
        for (int n = 0; n < batch; ++n)
          for (int oc = 0; oc < out_c; ++oc)
            std::copy_n(self.grad.data() + n * out_len + oc * cols, cols, g.data() + oc * ld + n * cols);
        if (want_b) {
          auto& gb = bnode->grad_buffer();
          for (int oc = 0; oc < out_c; ++oc) gb[oc] += g.row(oc).sum();
        }
        if (want_w) {
          RowMatrix<T> col(d.rows(), static_cast<Eigen::Index>(ld));
          for (int n = 0; n < batch; ++n) {
            const T* xn = xnode->value.data() + n * in_len;
            if (d.pointwise()) {
              for (int r = 0; r < d.rows(); ++r) std::copy_n(xn + r * cols, cols, col.data() + r * ld + n * cols);
            } else {
              im2col(xn, d, col.data() + n * cols, ld);
            }
          }
          MapMatrix<T> gw(wnode->grad_buffer().data(), out_c, d.rows());
          gw.noalias() += g * col.transpose();
        }
        if (want_x) {
          ConstMapMatrix<T> w_mat(wnode->value.data(), out_c, d.rows());
          const RowMatrix<T> dcol = w_mat.transpose() * g;
          for (int n = 0; n < batch; ++n) {
            T* gx = xnode->grad_buffer().data() + n * in_len;
            if (d.pointwise()) {
              for (int r = 0; r < d.rows(); ++r) {
                const T* src = dcol.data() + r * ld + n * cols;
                T* dst = gx + r * cols;
                for (std::size_t k = 0; k < cols; ++k) dst[k] += src[k];
              }
            } else {
              col2im_add(dcol.data() + n * cols, d, ld, gx);
            }
          }
        }
      });
}

template Tensor<float> conv2d(const Tensor<float>&, const Tensor<float>&, const Tensor<float>&,
                              Conv2dGeometry);
template Tensor<double> conv2d(const Tensor<double>&, const Tensor<double>&, const Tensor<double>&,
                               Conv2dGeometry);

}  // namespace lwc
