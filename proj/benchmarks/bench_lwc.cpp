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

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "lwc/codec.hpp"
#include "lwc/lifting.hpp"
#include "lwc/rans.hpp"

namespace {

using lwc::Shape;
using lwc::Tensor;

Tensor<float> random_tensor(Shape s, std::uint64_t seed, float scale = 1.0f) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> n(0.0f, scale);
  std::vector<float> v(s.numel());
  for (float& x : v) x = n(rng);
  return Tensor<float>(s, std::move(v));
}

lwc::RgbImage textured_image(int w, int h) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 6.0);
  lwc::RgbImage img(w, h);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j)
      for (int c = 0; c < 3; ++c) {
        const double v = 128 + 70 * std::sin(0.05 * i + c) * std::cos(0.03 * j) + noise(rng);
        img.at(i, j, c) = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
      }
  return img;
}

// args: channels, spatial size
void BM_Conv2dForward(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  const int n = static_cast<int>(state.range(1));
  const auto x = random_tensor({4, c, n, n}, 1);
  const auto w = random_tensor({c, c, 3, 3}, 2, 0.1f);
  const auto b = random_tensor({1, c, 1, 1}, 3);
  lwc::NoGradGuard guard;
  for (auto _ : state) benchmark::DoNotOptimize(lwc::conv2d(x, w, b, {1, 1, 1, 1}));
  state.SetItemsProcessed(state.iterations() * 4LL * c * c * 9 * n * n);
}
BENCHMARK(BM_Conv2dForward)->Args({16, 32})->Args({16, 64})->Args({64, 32})->Unit(benchmark::kMicrosecond);

void BM_Conv2dBackward(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  const int n = static_cast<int>(state.range(1));
  auto x = random_tensor({4, c, n, n}, 1);
  auto w = random_tensor({c, c, 3, 3}, 2, 0.1f);
  auto b = random_tensor({1, c, 1, 1}, 3);
  x.set_requires_grad(true);
  w.set_requires_grad(true);
  b.set_requires_grad(true);
  for (auto _ : state) {
    lwc::backward(lwc::sum(lwc::conv2d(x, w, b, {1, 1, 1, 1})));
  }
}
BENCHMARK(BM_Conv2dBackward)->Args({16, 32})->Args({64, 32})->Unit(benchmark::kMicrosecond);

void BM_DwtCdf97(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto x = random_tensor({1, 1, n, n}, 4, 50.0f);
  const auto w = lwc::cdf97_wavelet2d<float>();
  lwc::NoGradGuard guard;
  for (auto _ : state) {
    const auto p = lwc::dwt_forward(x, w, 4);
    benchmark::DoNotOptimize(lwc::dwt_inverse(p, w));
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_DwtCdf97)->Arg(128)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_DwtLearned(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto x = random_tensor({1, 1, n, n}, 4, 50.0f);
  const auto w = lwc::learned_wavelet2d<float>(5);
  lwc::NoGradGuard guard;
  for (auto _ : state) {
    const auto p = lwc::dwt_forward(x, w, 4);
    benchmark::DoNotOptimize(lwc::dwt_inverse(p, w));
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_DwtLearned)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

struct GaussianData {
  std::vector<std::int32_t> values;
  std::vector<float> mus;
  std::vector<float> sigmas;
};

GaussianData gaussian_data(std::size_t count) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<float> log_sigma(-2.0f, 4.0f);
  std::uniform_real_distribution<float> mu(-3.0f, 3.0f);
  GaussianData d;
  for (std::size_t i = 0; i < count; ++i) {
    d.mus.push_back(mu(rng));
    d.sigmas.push_back(std::exp(log_sigma(rng)));
    std::normal_distribution<float> n(d.mus.back(), d.sigmas.back());
    d.values.push_back(static_cast<std::int32_t>(std::lround(n(rng))));
  }
  return d;
}

void BM_RansEncode(benchmark::State& state) {
  const auto d = gaussian_data(static_cast<std::size_t>(state.range(0)));
  lwc::sigma_table_cache();
  for (auto _ : state) {
    auto enc = lwc::CoefficientCoder::encoder();
    for (std::size_t i = 0; i < d.values.size(); ++i) {
      std::int32_t v = d.values[i];
      enc.code_gaussian(d.mus[i], d.sigmas[i], v);
    }
    benchmark::DoNotOptimize(enc.finish_encoding());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RansEncode)->Arg(1 << 16)->Unit(benchmark::kMicrosecond);

void BM_RansDecode(benchmark::State& state) {
  const auto d = gaussian_data(static_cast<std::size_t>(state.range(0)));
  auto enc = lwc::CoefficientCoder::encoder();
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    std::int32_t v = d.values[i];
    enc.code_gaussian(d.mus[i], d.sigmas[i], v);
  }
  const auto bytes = enc.finish_encoding();
  for (auto _ : state) {
    auto dec = lwc::CoefficientCoder::decoder(bytes);
    for (std::size_t i = 0; i < d.values.size(); ++i) {
      std::int32_t v = 0;
      dec.code_gaussian(d.mus[i], d.sigmas[i], v);
      benchmark::DoNotOptimize(v);
    }
    dec.finish_decoding();
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RansDecode)->Arg(1 << 16)->Unit(benchmark::kMicrosecond);

// args: filters, entropy
lwc::Codec bench_codec(const benchmark::State& state) {
  const lwc::CodecConfig config{static_cast<lwc::FilterKind>(state.range(0)),
                                static_cast<lwc::EntropyKind>(state.range(1)), 4};
  return lwc::Codec::from_checkpoint(lwc::to_checkpoint(lwc::make_system<float>(config, 1)));
}

void BM_CodecEncode(benchmark::State& state) {
  const lwc::Codec codec = bench_codec(state);
  const auto img = textured_image(128, 128);
  for (auto _ : state) benchmark::DoNotOptimize(codec.encode(img));
  state.SetLabel(lwc::to_string(codec.config()));
}

void BM_CodecDecode(benchmark::State& state) {
  const lwc::Codec codec = bench_codec(state);
  const auto bytes = codec.encode(textured_image(128, 128)).bytes;
  for (auto _ : state) benchmark::DoNotOptimize(codec.decode(bytes));
  state.SetLabel(lwc::to_string(codec.config()));
}

void codec_args(benchmark::internal::Benchmark* b) {
  for (int f : {0, 1})
    for (int e : {0, 1, 2, 3}) b->Args({f, e});
  b->Unit(benchmark::kMillisecond);
}
BENCHMARK(BM_CodecEncode)->Apply(codec_args);
BENCHMARK(BM_CodecDecode)->Apply(codec_args);

}  // namespace

BENCHMARK_MAIN();
