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
#include <filesystem>
#include <span>
#include <vector>

#include "lwc/tensor.hpp"

namespace lwc {

/// 8-bit RGB raster, row-major, channels interleaved.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, 0) {}

  std::uint8_t& at(int i, int j, int c) { return pixels[(static_cast<std::size_t>(i) * width + j) * 3 + c]; }
  std::uint8_t at(int i, int j, int c) const { return pixels[(static_cast<std::size_t>(i) * width + j) * 3 + c]; }
  bool operator==(const RgbImage&) const = default;
};

/// Binary PPM (P6, maxval 255). Comments in the header are skipped.
RgbImage parse_ppm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> serialize_ppm(const RgbImage& img);

/// True when the library was built with PNG support.
bool png_supported();

/// Dispatches on the extension: .ppm always, .png when supported.
RgbImage read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const RgbImage& img);
/// Whether read_image would try to read `path`.
bool is_image_path(const std::filesystem::path& path);

/// Full-range BT.601 with Cb and Cr centred at zero:
///   Y  =  0.299    R + 0.587    G + 0.114    B
///   Cb = -0.168736 R - 0.331264 G + 0.5      B
///   Cr =  0.5      R - 0.418688 G - 0.081312 B
struct Bt601 {
  static const std::array<std::array<double, 3>, 3>& forward();
  /// Numerical inverse of forward().
  static const std::array<std::array<double, 3>, 3>& inverse();
};

/// Planes of shape (1, 1, H, W) in Y, Cb, Cr order.
std::array<Tensor<float>, 3> rgb_to_ycbcr(const RgbImage& img);
/// Differentiable; inputs and outputs are (N, 1, H, W) planes.
template <typename T>
std::array<Tensor<T>, 3> ycbcr_to_rgb(const std::array<Tensor<T>, 3>& ycc);
/// Same as rgb_to_ycbcr but on differentiable (N, 1, H, W) RGB planes.
template <typename T>
std::array<Tensor<T>, 3> rgb_planes_to_ycbcr(const std::array<Tensor<T>, 3>& rgb);

/// R, G, B planes of shape (1, 1, H, W) with values in [0, 255].
std::array<Tensor<float>, 3> rgb_planes(const RgbImage& img);
/// Rounds half away from zero and clamps to [0, 255].
RgbImage planes_to_rgb(const std::array<Tensor<float>, 3>& rgb);

/// Smallest multiple of `m` that is >= n.
int round_up(int n, int m);
/// Replicates the last row and column to reach multiples of `multiple`.
RgbImage pad_to_multiple(const RgbImage& img, int multiple);
/// Top-left width x height window.
RgbImage crop(const RgbImage& img, int width, int height);
/// Window at (top, left).
RgbImage crop(const RgbImage& img, int top, int left, int width, int height);

/// Mean squared error over all channels.
double mse(const RgbImage& a, const RgbImage& b);
/// 10 log10(255^2 / MSE); infinite for identical images.
double psnr(const RgbImage& a, const RgbImage& b);

}  // namespace lwc
