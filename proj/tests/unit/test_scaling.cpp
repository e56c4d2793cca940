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

#include <random>

#include "doctest.h"
#include "gradcheck.hpp"
#include "lwc/errors.hpp"
#include "lwc/scaling.hpp"

using namespace lwc;
using lwc::testing::max_abs_diff;

namespace {

SubbandPyramid<float> random_pyramid(int h, int w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto x = lwc::testing::random_tensor_f({1, 1, h, w}, rng, -20, 20);
  return dwt_forward(x, cdf97_wavelet2d<float>(), 4);
}

}  // namespace

TEST_CASE("simple variant starts as a pure gain") {
  Initializer init(1);
  PointwiseScaler<float> s(2.5, init);
  std::mt19937_64 rng(2);
  auto x = lwc::testing::random_tensor_f({1, 1, 32, 48}, rng, -10, 10);
  auto y = s(x);
  CHECK(y.shape() == x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) CHECK(y.data()[i] == 2.5f * x.data()[i]);
}

TEST_CASE("scaling networks preserve shapes") {
  auto p = random_pyramid(64, 96, 3);
  for (ScalingVariant v : {ScalingVariant::kSimple, ScalingVariant::kLlb}) {
    auto enc = make_scaling_network<float>(v, 4, false, ScalingInit::kTraining, 4);
    auto out = scale_forward(p, enc);
    REQUIRE(out.bands.size() == p.bands.size());
    for (std::size_t b = 0; b < p.bands.size(); ++b) CHECK(out.bands[b].shape() == p.bands[b].shape());
  }
  auto wrong = make_scaling_network<float>(ScalingVariant::kLlb, 3, false, ScalingInit::kIdentity, 1);
  CHECK_THROWS_AS(scale_forward(p, wrong), ConfigError);
}

TEST_CASE("identity-initialized networks are identity maps") {
  auto p = random_pyramid(32, 48, 5);
  for (ScalingVariant v : {ScalingVariant::kSimple, ScalingVariant::kLlb}) {
    auto enc = make_scaling_network<float>(v, 4, false, ScalingInit::kIdentity, 6);
    auto dec = make_scaling_network<float>(v, 4, true, ScalingInit::kIdentity, 7);
    auto y = scale_forward(p, enc);
    auto back = scale_inverse(y, dec);
    for (std::size_t b = 0; b < p.bands.size(); ++b) {
      CHECK(max_abs_diff(y.bands[b].data(), p.bands[b].data()) < 1e-5);
      CHECK(max_abs_diff(back.bands[b].data(), p.bands[b].data()) < 1e-5);
    }
  }
}

TEST_CASE("encoder and decoder parameters are independent") {
  auto enc = make_scaling_network<float>(ScalingVariant::kLlb, 4, false, ScalingInit::kTraining, 8);
  auto dec = make_scaling_network<float>(ScalingVariant::kLlb, 4, true, ScalingInit::kTraining, 9);
  ParamList<float> a, b;
  enc.collect("enc", a);
  dec.collect("dec", b);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].second.node() != b[i].second.node());
  CHECK(enc.detail.g1.inverse == false);
  CHECK(dec.detail.g1.inverse == true);
}

TEST_CASE("round quantizer") {
  Tensor<float> y(Shape{1, 1, 1, 6}, std::vector<float>{2.4f, -2.5f, 2.5f, -0.49f, 0.5f, 7.0f});
  auto q = quantize(y, QuantizerMode::kRound);
  CHECK(std::vector<float>(q.data().begin(), q.data().end()) == std::vector<float>{2, -3, 3, 0, 1, 7});
  auto qq = quantize(q, QuantizerMode::kRound);
  CHECK(max_abs_diff(qq.data(), q.data()) == 0.0);
  std::mt19937_64 rng(10);
  auto r = lwc::testing::random_tensor_f({1, 1, 16, 16}, rng, -100, 100);
  auto rq = quantize(r, QuantizerMode::kRound);
  for (std::size_t i = 0; i < r.numel(); ++i) CHECK(std::abs(rq.data()[i] - r.data()[i]) <= 0.5f);
}

TEST_CASE("noise quantizer") {
  std::mt19937_64 rng(11);
  Tensor<double> y(Shape{1, 1, 100, 100}, 3.7);
  auto n = quantize(y, QuantizerMode::kNoise, &rng);
  double mean = 0;
  for (double v : n.data()) {
    CHECK(std::abs(v - 3.7) <= 0.5);
    mean += v;
  }
  mean /= static_cast<double>(n.numel());
  CHECK(std::abs(mean - 3.7) < 0.01);
  y.set_requires_grad(true);
  backward(sum(quantize(y, QuantizerMode::kNoise, &rng)));
  for (double g : y.grad()) CHECK(g == 1.0);
  CHECK_THROWS_AS(quantize(y, QuantizerMode::kNoise, nullptr), UsageError);
}
