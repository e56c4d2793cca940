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

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "doctest.h"
#include "lwc/codec.hpp"
#include "lwc/errors.hpp"

using namespace lwc;

namespace {

const std::vector<CodecConfig>& all_configs() {
  static const std::vector<CodecConfig> configs = [] {
    std::vector<CodecConfig> out;
    for (FilterKind f : {FilterKind::kCdf97, FilterKind::kLlb})
      for (EntropyKind e : {EntropyKind::kFem, EntropyKind::kIscem, EntropyKind::kIiscem, EntropyKind::kIpiscem})
        out.push_back({f, e, 4});
    return out;
  }();
  return configs;
}

// Smooth gradients plus noise, so every band carries some signal.
RgbImage test_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 12.0);
  RgbImage img(w, h);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j)
      for (int c = 0; c < 3; ++c) {
        const double v = 128 + 80 * std::sin(0.11 * i + 0.7 * c) * std::cos(0.07 * j) + noise(rng);
        img.at(i, j, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
  return img;
}

// Fresh networks have constant entropy parameters; nudge every parameter so
// the context paths actually vary with their inputs.
Codec perturbed_codec(const CodecConfig& config, std::uint64_t seed) {
  CodecSystem<float> sys = make_system<float>(config, seed);
  std::mt19937_64 rng(seed + 17);
  std::uniform_real_distribution<float> u(-0.02f, 0.02f);
  for (auto& [name, p] : sys.parameters()) {
    if (name.rfind("em.", 0) != 0) continue;
    for (float& v : p.mutable_data()) v += u(rng);
  }
  return Codec::from_checkpoint(to_checkpoint(sys));
}

bool same_pyramids(const std::array<SubbandPyramid<float>, 3>& a, const std::array<SubbandPyramid<float>, 3>& b) {
  for (int c = 0; c < 3; ++c) {
    if (a[c].bands.size() != b[c].bands.size()) return false;
    for (std::size_t k = 0; k < a[c].bands.size(); ++k) {
      if (a[c].bands[k].shape() != b[c].bands[k].shape()) return false;
      const auto x = a[c].bands[k].data();
      const auto y = b[c].bands[k].data();
      if (!std::equal(x.begin(), x.end(), y.begin())) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("config labels") {
  CHECK(to_string(CodecConfig{}) == "cdf97+fem");
  CHECK(to_string(CodecConfig{FilterKind::kLlb, EntropyKind::kIpiscem, 4}) == "llb+ipiscem");
  CHECK(parse_filter_kind("llb") == FilterKind::kLlb);
  CHECK_THROWS_AS(parse_filter_kind("haar"), ConfigError);
}

TEST_CASE("round trip is exact for every configuration") {
  const RgbImage img = test_image(37, 29, 1);
  for (const CodecConfig& config : all_configs()) {
    CAPTURE(to_string(config));
    const Codec codec = perturbed_codec(config, 3);
    const EncodeResult enc = codec.encode(img);
    const DecodeResult dec = codec.decode(enc.bytes);
    CHECK(same_pyramids(enc.quantized, dec.quantized));
    CHECK(dec.image == enc.reconstruction);
    CHECK(dec.image.width == 37);
    CHECK(dec.image.height == 29);
    CHECK(enc.stream.header.padded_width == 48);
    CHECK(enc.stream.header.padded_height == 32);
    // An untrained system is close to the identity at unit quantization.
    CHECK(psnr(img, dec.image) > 40.0);
  }
}

TEST_CASE("encoding is deterministic") {
  const RgbImage img = test_image(32, 32, 2);
  const CodecConfig config{FilterKind::kLlb, EntropyKind::kIscem, 4};
  const auto a = perturbed_codec(config, 5).encode(img).bytes;
  const auto b = perturbed_codec(config, 5).encode(img).bytes;
  CHECK(a == b);
}

TEST_CASE("file accounting") {
  const RgbImage img = test_image(40, 24, 3);
  const Codec codec = perturbed_codec({FilterKind::kCdf97, EntropyKind::kFem, 4}, 7);
  const EncodeResult enc = codec.encode(img);
  CHECK(enc.stream.chunks.size() == 39u);
  CHECK(enc.bytes.size() == enc.stream.header_bytes() + enc.stream.chunk_bytes());
  CHECK(enc.bpp == enc.stream.chunk_bytes() * 8.0 / (40.0 * 24.0));
  CHECK(serialize_stream(parse_stream(enc.bytes)) == enc.bytes);

  // Each chunk stays within the coder's own bound of its ideal length.
  REQUIRE(enc.ideal_bits.size() == enc.stream.chunks.size());
  for (std::size_t k = 0; k < enc.ideal_bits.size(); ++k) {
    CHECK(enc.stream.chunks[k].size() * 8.0 <= enc.ideal_bits[k] * 1.02 + 16 * 8);
  }

  const auto model = codec.model_bits(enc.quantized);
  double total = 0.0;
  for (const auto& ch : model) {
    CHECK(ch.size() == 13u);
    for (double b : ch) total += b;
  }
  CHECK(total > 0.0);
}

TEST_CASE("corrupt streams are rejected") {
  const RgbImage img = test_image(32, 32, 4);
  const Codec codec = perturbed_codec({FilterKind::kCdf97, EntropyKind::kIscem, 4}, 9);
  const auto bytes = codec.encode(img).bytes;

  auto flipped = bytes;
  flipped.back() ^= 0x40;
  CHECK_THROWS_AS(codec.decode(flipped), DecodeError);

  auto magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_AS(codec.decode(magic), DecodeError);

  auto version = bytes;
  version[4] = 9;
  CHECK_THROWS_AS(codec.decode(version), DecodeError);

  const std::vector<std::uint8_t> truncated(bytes.begin(), bytes.end() - 3);
  CHECK_THROWS_AS(codec.decode(truncated), DecodeError);
  const std::vector<std::uint8_t> header_only(bytes.begin(), bytes.begin() + 30);
  CHECK_THROWS_AS(codec.decode(header_only), DecodeError);

  auto dims = bytes;
  dims[14] = 0x11;  // padded width no longer matches
  CHECK_THROWS_AS(codec.decode(dims), DecodeError);
}

TEST_CASE("stream and checkpoint must agree") {
  const RgbImage img = test_image(32, 32, 5);
  const CodecConfig fem{FilterKind::kCdf97, EntropyKind::kFem, 4};
  const Codec a = perturbed_codec(fem, 11);
  const Codec b = perturbed_codec(fem, 12);
  REQUIRE(a.checkpoint_hash() != b.checkpoint_hash());
  const auto bytes = a.encode(img).bytes;
  CHECK_THROWS_AS(b.decode(bytes), DecodeError);

  const Codec c = perturbed_codec({FilterKind::kCdf97, EntropyKind::kIscem, 4}, 11);
  CHECK_THROWS_AS(c.decode(bytes), DecodeError);

  CHECK_THROWS_AS(encode_image(img, {FilterKind::kLlb, EntropyKind::kFem, 4}, a), ConfigError);
  CHECK(decode_image(encode_image(img, fem, a).bytes, a).image == a.encode(img).reconstruction);
}

TEST_CASE("images smaller than the transform are rejected") {
  const Codec codec = perturbed_codec({}, 13);
  CHECK_THROWS_AS(codec.encode(test_image(15, 40, 6)), ConfigError);
  CHECK_NOTHROW(codec.encode(test_image(16, 16, 6)));
}

TEST_CASE("stream description") {
  const Codec codec = perturbed_codec({FilterKind::kLlb, EntropyKind::kIpiscem, 4}, 14);
  const EncodeResult enc = codec.encode(test_image(20, 18, 7));
  const std::string text = describe_stream(parse_stream(enc.bytes));
  CHECK(text.find("20x18 (padded 32x32)") != std::string::npos);
  CHECK(text.find("llb+ipiscem") != std::string::npos);
  CHECK(text.find("cr      HH1") != std::string::npos);
  CHECK(text.find("total " + std::to_string(enc.bytes.size())) != std::string::npos);
}

TEST_CASE("checkpoints round trip") {
  for (const CodecConfig& config : all_configs()) {
    CAPTURE(to_string(config));
    const CodecSystem<float> sys = make_system<float>(config, 21);
    const Checkpoint ckpt = parse_checkpoint(serialize_checkpoint(to_checkpoint(sys)));
    CHECK(checkpoint_config(ckpt) == config);
    const auto again = system_from_checkpoint<float>(ckpt);
    const auto p = sys.parameters();
    const auto q = again.parameters();
    REQUIRE(p.size() == q.size());
    for (std::size_t k = 0; k < p.size(); ++k) {
      CHECK(p[k].first == q[k].first);
      const auto x = p[k].second.data();
      const auto y = q[k].second.data();
      CHECK(std::equal(x.begin(), x.end(), y.begin()));
    }
  }
  Checkpoint bad;
  bad.meta["filters"] = "cdf97";
  CHECK_THROWS(checkpoint_config(bad));
}

TEST_CASE("system forward pass") {
  const CodecSystem<double> sys = make_system<double>({FilterKind::kLlb, EntropyKind::kIiscem, 4}, 31);
  std::array<Tensor<double>, 3> rgb;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 255.0);
  for (auto& p : rgb) {
    p = Tensor<double>(Shape{2, 1, 32, 32}, 0.0);
    for (double& v : p.mutable_data()) v = u(rng);
  }
  const ForwardPass<double> out = run_system(sys, rgb, QuantizerMode::kNoise, &rng);
  for (int c = 0; c < 3; ++c) {
    CHECK(out.rgb[c].shape() == Shape{2, 1, 32, 32});
    CHECK(out.band_bits[c].size() == 13u);
    CHECK(out.quantized[c].bands[0].shape() == Shape{2, 1, 2, 2});
  }
  CHECK(out.rate_bits.numel() == 1u);
  double sum = 0.0;
  for (const auto& ch : out.band_bits)
    for (const auto& b : ch) sum += b.item();
  CHECK(out.rate_bits.item() == doctest::Approx(sum).epsilon(1e-12));
  // Noise quantization keeps the reconstruction close to the input.
  double worst = 0.0;
  for (int c = 0; c < 3; ++c)
    for (std::size_t k = 0; k < rgb[c].numel(); ++k)
      worst = std::max(worst, std::abs(out.rgb[c].data()[k] - rgb[c].data()[k]));
  CHECK(worst < 20.0);
}
