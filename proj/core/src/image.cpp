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

#include "lwc/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

#include "lwc/checkpoint.hpp"
#include "lwc/errors.hpp"

#ifdef LWC_WITH_PNG
#include <png.h>
#endif

namespace lwc {

namespace {

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string ppm_token(std::span<const std::uint8_t> b, std::size_t& pos) {
  for (;;) {
    while (pos < b.size() && std::isspace(b[pos])) ++pos;
    if (pos < b.size() && b[pos] == '#') {
      while (pos < b.size() && b[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  std::string tok;
  while (pos < b.size() && !std::isspace(b[pos]) && b[pos] != '#') tok.push_back(static_cast<char>(b[pos++]));
  if (tok.empty()) throw DecodeError("PPM header truncated");
  return tok;
}

int ppm_int(std::span<const std::uint8_t> b, std::size_t& pos, const char* what) {
  const std::string tok = ppm_token(b, pos);
  if (!std::all_of(tok.begin(), tok.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }) ||
      tok.size() > 9) {
    throw DecodeError(std::string("PPM header: bad ") + what + " '" + tok + "'");
  }
  return std::stoi(tok);
}

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext;
}

std::array<std::array<double, 3>, 3> invert3(const std::array<std::array<double, 3>, 3>& m) {
  const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                     m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                     m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  std::array<std::array<double, 3>, 3> r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const int a0 = (j + 1) % 3, a1 = (j + 2) % 3, b0 = (i + 1) % 3, b1 = (i + 2) % 3;
      r[i][j] = (m[a0][b0] * m[a1][b1] - m[a0][b1] * m[a1][b0]) / det;
    }
  return r;
}

template <typename T>
std::array<Tensor<T>, 3> mix(const std::array<std::array<double, 3>, 3>& m, const std::array<Tensor<T>, 3>& in) {
  std::array<Tensor<T>, 3> out;
  for (int k = 0; k < 3; ++k) {
    Tensor<T> acc = scale(in[0], static_cast<T>(m[k][0]));
    for (int c = 1; c < 3; ++c) acc = add(acc, scale(in[c], static_cast<T>(m[k][c])));
    out[k] = acc;
  }
  return out;
}

}  // namespace

RgbImage parse_ppm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  if (ppm_token(bytes, pos) != "P6") throw DecodeError("not a binary PPM (P6) file");
  const int w = ppm_int(bytes, pos, "width");
  const int h = ppm_int(bytes, pos, "height");
  const int maxval = ppm_int(bytes, pos, "maxval");
  if (w <= 0 || h <= 0) throw DecodeError("PPM has an empty raster");
  if (maxval != 255) throw DecodeError("only 8-bit PPM (maxval 255) is supported, got " + std::to_string(maxval));
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw DecodeError("PPM header not terminated");
  ++pos;
  RgbImage img(w, h);
  if (bytes.size() - pos < img.pixels.size()) throw DecodeError("PPM raster truncated");
  std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(pos), img.pixels.size(), img.pixels.begin());
  return img;
}

std::vector<std::uint8_t> serialize_ppm(const RgbImage& img) {
  const std::string header = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.pixels.begin(), img.pixels.end());
  return out;
}

bool png_supported() {
#ifdef LWC_WITH_PNG
  return true;
#else
  return false;
#endif
}

bool is_image_path(const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  return ext == ".ppm" || (ext == ".png" && png_supported());
}

RgbImage read_image(const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") {
#ifdef LWC_WITH_PNG
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&png, path.string().c_str())) {
      throw IoError("cannot read PNG " + path.string() + ": " + png.message);
    }
    png.format = PNG_FORMAT_RGB;
    RgbImage img(static_cast<int>(png.width), static_cast<int>(png.height));
    if (!png_image_finish_read(&png, nullptr, img.pixels.data(), 0, nullptr)) {
      throw IoError("cannot decode PNG " + path.string() + ": " + png.message);
    }
    return img;
#else
    throw ConfigError("PNG support was not compiled in; rebuild with LWC_WITH_PNG=ON");
#endif
  }
  const auto bytes = read_file(path);
  try {
    return parse_ppm(bytes);
  } catch (const DecodeError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_image(const std::filesystem::path& path, const RgbImage& img) {
  if (lower_extension(path) == ".png") {
#ifdef LWC_WITH_PNG
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(img.width);
    png.height = static_cast<png_uint_32>(img.height);
    png.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&png, path.string().c_str(), 0, img.pixels.data(), 0, nullptr)) {
      throw IoError("cannot write PNG " + path.string() + ": " + png.message);
    }
    return;
#else
    throw ConfigError("PNG support was not compiled in; rebuild with LWC_WITH_PNG=ON");
#endif
  }
  write_file(path, serialize_ppm(img));
}

const std::array<std::array<double, 3>, 3>& Bt601::forward() {
  static const std::array<std::array<double, 3>, 3> m{{{0.299, 0.587, 0.114},
                                                       {-0.168736, -0.331264, 0.5},
                                                       {0.5, -0.418688, -0.081312}}};
  return m;
}

const std::array<std::array<double, 3>, 3>& Bt601::inverse() {
  static const std::array<std::array<double, 3>, 3> m = invert3(forward());
  return m;
}

std::array<Tensor<float>, 3> rgb_planes(const RgbImage& img) {
  std::array<Tensor<float>, 3> out;
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  for (int c = 0; c < 3; ++c) {
    std::vector<float> v(n);
    for (std::size_t k = 0; k < n; ++k) v[k] = img.pixels[k * 3 + c];
    out[c] = Tensor<float>(Shape{1, 1, img.height, img.width}, std::move(v));
  }
  return out;
}

std::array<Tensor<float>, 3> rgb_to_ycbcr(const RgbImage& img) {
  const auto& m = Bt601::forward();
  std::array<Tensor<float>, 3> out;
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  for (int k = 0; k < 3; ++k) {
    std::vector<float> v(n);
    for (std::size_t p = 0; p < n; ++p) {
      double acc = 0.0;
      for (int c = 0; c < 3; ++c) acc += m[k][c] * img.pixels[p * 3 + c];
      v[p] = static_cast<float>(acc);
    }
    out[k] = Tensor<float>(Shape{1, 1, img.height, img.width}, std::move(v));
  }
  return out;
}

template <typename T>
std::array<Tensor<T>, 3> ycbcr_to_rgb(const std::array<Tensor<T>, 3>& ycc) {
  return mix(Bt601::inverse(), ycc);
}

template <typename T>
std::array<Tensor<T>, 3> rgb_planes_to_ycbcr(const std::array<Tensor<T>, 3>& rgb) {
  return mix(Bt601::forward(), rgb);
}

RgbImage planes_to_rgb(const std::array<Tensor<float>, 3>& rgb) {
  const Shape s = rgb[0].shape();
  if (s.n != 1 || s.c != 1) throw ConfigError("planes_to_rgb expects (1, 1, H, W) planes");
  RgbImage img(s.w, s.h);
  const std::size_t n = static_cast<std::size_t>(s.w) * s.h;
  for (int c = 0; c < 3; ++c) {
    if (!(rgb[c].shape() == s)) throw ConfigError("planes_to_rgb: plane shapes differ");
    const auto d = rgb[c].data();
    for (std::size_t p = 0; p < n; ++p) {
      const float v = std::round(d[p]);
      img.pixels[p * 3 + c] = static_cast<std::uint8_t>(std::clamp(v, 0.0f, 255.0f));
    }
  }
  return img;
}

int round_up(int n, int m) { return (n + m - 1) / m * m; }

RgbImage pad_to_multiple(const RgbImage& img, int multiple) {
  if (multiple <= 0) throw ConfigError("pad multiple must be positive");
  RgbImage out(round_up(img.width, multiple), round_up(img.height, multiple));
  for (int i = 0; i < out.height; ++i)
    for (int j = 0; j < out.width; ++j)
      for (int c = 0; c < 3; ++c) out.at(i, j, c) = img.at(std::min(i, img.height - 1), std::min(j, img.width - 1), c);
  return out;
}

RgbImage crop(const RgbImage& img, int width, int height) { return crop(img, 0, 0, width, height); }

RgbImage crop(const RgbImage& img, int top, int left, int width, int height) {
  if (top < 0 || left < 0 || width <= 0 || height <= 0 || top + height > img.height || left + width > img.width) {
    throw ConfigError("crop window " + std::to_string(width) + "x" + std::to_string(height) + " at (" +
                      std::to_string(top) + ", " + std::to_string(left) + ") exceeds the " +
                      std::to_string(img.width) + "x" + std::to_string(img.height) + " image");
  }
  RgbImage out(width, height);
  for (int i = 0; i < height; ++i) {
    const auto* src = &img.pixels[(static_cast<std::size_t>(top + i) * img.width + left) * 3];
    std::copy_n(src, static_cast<std::size_t>(width) * 3, &out.pixels[static_cast<std::size_t>(i) * width * 3]);
  }
  return out;
}

double mse(const RgbImage& a, const RgbImage& b) {
  if (a.width != b.width || a.height != b.height) throw ConfigError("mse: image sizes differ");
  double acc = 0.0;
  for (std::size_t k = 0; k < a.pixels.size(); ++k) {
    const double d = static_cast<double>(a.pixels[k]) - b.pixels[k];
    acc += d * d;
  }
  return acc / static_cast<double>(a.pixels.size());
}

double psnr(const RgbImage& a, const RgbImage& b) {
  const double e = mse(a, b);
  if (e == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / e);
}

template std::array<Tensor<float>, 3> ycbcr_to_rgb(const std::array<Tensor<float>, 3>&);
template std::array<Tensor<double>, 3> ycbcr_to_rgb(const std::array<Tensor<double>, 3>&);
template std::array<Tensor<float>, 3> rgb_planes_to_ycbcr(const std::array<Tensor<float>, 3>&);
template std::array<Tensor<double>, 3> rgb_planes_to_ycbcr(const std::array<Tensor<double>, 3>&);

}  // namespace lwc
