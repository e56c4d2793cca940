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

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "doctest.h"
#include "lwc/errors.hpp"
#include "lwc/image.hpp"

using namespace lwc;

namespace {

RgbImage random_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> u(0, 255);
  RgbImage img(w, h);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(u(rng));
  return img;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("lwc_test_image_" + name);
}

}  // namespace

TEST_CASE("ppm round trip") {
  const RgbImage img = random_image(7, 5, 1);
  const auto bytes = serialize_ppm(img);
  CHECK(std::string(bytes.begin(), bytes.begin() + 11) == "P6\n7 5\n255\n");
  CHECK(parse_ppm(bytes) == img);
  const auto path = temp_path("a.ppm");
  write_image(path, img);
  CHECK(read_image(path) == img);
  std::filesystem::remove(path);
}

TEST_CASE("ppm header comments and errors") {
  std::string text = "P6 # comment\n2 1\n# another\n255\n";
  std::vector<std::uint8_t> bytes(text.begin(), text.end());
  for (int k = 0; k < 6; ++k) bytes.push_back(static_cast<std::uint8_t>(10 * k));
  const RgbImage img = parse_ppm(bytes);
  CHECK(img.width == 2);
  CHECK(img.height == 1);
  CHECK(img.at(0, 1, 2) == 50);

  auto bad = [](const std::string& s) { return std::vector<std::uint8_t>(s.begin(), s.end()); };
  CHECK_THROWS_AS(parse_ppm(bad("P5\n1 1\n255\n\x01")), DecodeError);
  CHECK_THROWS_AS(parse_ppm(bad("P6\n1 1\n65535\n")), DecodeError);
  CHECK_THROWS_AS(parse_ppm(bad("P6\n2 2\n255\n\x01\x02")), DecodeError);
  CHECK_THROWS_AS(parse_ppm(bad("P6\n0 2\n255\n")), DecodeError);
  CHECK_THROWS_AS(parse_ppm(bad("P6\n2")), DecodeError);
  CHECK_THROWS_AS(read_image(temp_path("missing.ppm")), IoError);
}

TEST_CASE("png round trip when enabled") {
  const RgbImage img = random_image(9, 4, 2);
  const auto path = temp_path("b.png");
  if (png_supported()) {
    CHECK(is_image_path(path));
    write_image(path, img);
    CHECK(read_image(path) == img);
    std::filesystem::remove(path);
  } else {
    CHECK(!is_image_path(path));
    CHECK_THROWS_AS(write_image(path, img), ConfigError);
  }
  CHECK(is_image_path("x.PPM"));
  CHECK(!is_image_path("x.jpg"));
}

TEST_CASE("bt601 conversion") {
  RgbImage gray(3, 1);
  for (int j = 0; j < 3; ++j)
    for (int c = 0; c < 3; ++c) gray.at(0, j, c) = static_cast<std::uint8_t>(j * 100);
  auto ycc = rgb_to_ycbcr(gray);
  for (int j = 0; j < 3; ++j) {
    CHECK(ycc[0].at(0, 0, 0, j) == doctest::Approx(j * 100.0).epsilon(1e-6));
    CHECK(std::abs(ycc[1].at(0, 0, 0, j)) < 1e-4f);
    CHECK(std::abs(ycc[2].at(0, 0, 0, j)) < 1e-4f);
  }
  // Black maps to the origin.
  CHECK(ycc[0].at(0, 0, 0, 0) == 0.0f);

  // Inverse times forward is the identity.
  const auto& f = Bt601::forward();
  const auto& g = Bt601::inverse();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double acc = 0.0;
      for (int k = 0; k < 3; ++k) acc += g[i][k] * f[k][j];
      CHECK(acc == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
    }
  CHECK(g[0][2] == doctest::Approx(1.402).epsilon(1e-6));

  const RgbImage img = random_image(16, 16, 3);
  const auto rgb = ycbcr_to_rgb(rgb_to_ycbcr(img));
  const auto ref = rgb_planes(img);
  double worst = 0.0;
  for (int c = 0; c < 3; ++c)
    for (std::size_t k = 0; k < rgb[c].numel(); ++k)
      worst = std::max<double>(worst, std::abs(rgb[c].data()[k] - ref[c].data()[k]));
  CHECK(worst <= 1e-4 * 255);
  CHECK(planes_to_rgb(rgb) == img);
}

TEST_CASE("differentiable conversion matches the direct one") {
  const RgbImage img = random_image(6, 4, 4);
  const auto direct = rgb_to_ycbcr(img);
  const auto via = rgb_planes_to_ycbcr(rgb_planes(img));
  for (int c = 0; c < 3; ++c)
    for (std::size_t k = 0; k < direct[c].numel(); ++k)
      CHECK(via[c].data()[k] == doctest::Approx(direct[c].data()[k]).epsilon(1e-5));
}

TEST_CASE("planes to rgb rounds and clamps") {
  std::array<Tensor<float>, 3> p;
  p[0] = Tensor<float>(Shape{1, 1, 1, 4}, std::vector<float>{-3.0f, 2.5f, 254.49f, 300.0f});
  p[1] = Tensor<float>(Shape{1, 1, 1, 4}, 0.0f);
  p[2] = Tensor<float>(Shape{1, 1, 1, 4}, 0.0f);
  const RgbImage img = planes_to_rgb(p);
  CHECK(img.at(0, 0, 0) == 0);
  CHECK(img.at(0, 1, 0) == 3);
  CHECK(img.at(0, 2, 0) == 254);
  CHECK(img.at(0, 3, 0) == 255);
}

TEST_CASE("padding and cropping") {
  CHECK(round_up(512, 16) == 512);
  CHECK(round_up(500, 16) == 512);
  CHECK(round_up(750, 16) == 752);
  const RgbImage big = random_image(768, 512, 5);
  CHECK(pad_to_multiple(big, 16) == big);

  const RgbImage img = random_image(750, 500, 6);
  const RgbImage padded = pad_to_multiple(img, 16);
  CHECK(padded.width == 752);
  CHECK(padded.height == 512);
  CHECK(padded.at(511, 751, 1) == img.at(499, 749, 1));
  CHECK(padded.at(3, 751, 0) == img.at(3, 749, 0));
  CHECK(padded.at(505, 10, 2) == img.at(499, 10, 2));
  CHECK(crop(padded, 750, 500) == img);

  const RgbImage w = crop(img, 10, 20, 4, 3);
  CHECK(w.at(2, 3, 1) == img.at(12, 23, 1));
  CHECK_THROWS_AS(crop(img, 498, 0, 4, 3), ConfigError);
}

TEST_CASE("psnr") {
  const RgbImage a = random_image(8, 8, 7);
  CHECK(std::isinf(psnr(a, a)));
  RgbImage b = a;
  for (auto& p : b.pixels) p = static_cast<std::uint8_t>(p < 255 ? p + 1 : p - 1);
  CHECK(mse(a, b) == doctest::Approx(1.0));
  CHECK(psnr(a, b) == doctest::Approx(10.0 * std::log10(255.0 * 255.0)));
}
