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
#include <random>
#include <span>
#include <string>
#include <vector>

#include "lwc/checkpoint.hpp"
#include "lwc/entropy_models.hpp"
#include "lwc/image.hpp"
#include "lwc/lifting.hpp"
#include "lwc/scaling.hpp"

namespace lwc {

enum class FilterKind { kCdf97, kLlb };

std::string to_string(FilterKind kind);
/// Accepts "cdf97" and "llb"; throws ConfigError otherwise.
FilterKind parse_filter_kind(const std::string& name);

struct CodecConfig {
  FilterKind filters = FilterKind::kCdf97;
  EntropyKind entropy = EntropyKind::kFem;
  int levels = 4;

  bool operator==(const CodecConfig&) const = default;
};

/// "cdf97+fem" style label.
std::string to_string(const CodecConfig& config);

inline constexpr std::array<const char*, 3> kChannelNames{"y", "cb", "cr"};
/// Subtracted from luma before the transform so every channel is zero-centred.
inline constexpr float kLumaOffset = 128.0f;

/// Transform, scaling and entropy networks of one color channel.
template <typename T>
struct ChannelCodec {
  Wavelet2d<T> wavelet;
  ScalingNetwork<T> encoder_scaling;
  ScalingNetwork<T> decoder_scaling;
  ChannelEntropyModel<T> entropy;
};

/// The trainable system: one ChannelCodec per Y, Cb, Cr. CDF 9/7 filters pair
/// with the simple scaling networks, learned filters with the GDN ones.
template <typename T>
struct CodecSystem {
  CodecConfig config;
  std::array<ChannelCodec<T>, 3> channels;

  /// Names: dwt.<ch>.*, scale.enc.<ch>.*, scale.dec.<ch>.*, em.<ch>.*
  ParamList<T> parameters() const;
};

template <typename T>
CodecSystem<T> make_system(const CodecConfig& config, std::uint64_t seed);

/// Checkpoint meta keys holding the configuration.
Checkpoint to_checkpoint(const CodecSystem<float>& system);
CodecConfig checkpoint_config(const Checkpoint& ckpt);
template <typename T>
CodecSystem<T> system_from_checkpoint(const Checkpoint& ckpt);

/// Result of running the system on (N, 1, H, W) RGB planes in [0, 255].
template <typename T>
struct ForwardPass {
  std::array<Tensor<T>, 3> rgb;                     // reconstructed RGB planes
  std::array<SubbandPyramid<T>, 3> quantized;       // per color channel
  std::array<std::vector<Tensor<T>>, 3> band_bits;  // scalar -sum log2 p per band
  Tensor<T> rate_bits;                              // total over the batch
};

template <typename T>
ForwardPass<T> run_system(const CodecSystem<T>& system, const std::array<Tensor<T>, 3>& rgb, QuantizerMode mode,
                          std::mt19937_64* rng);

/// Bitstream, all integers little-endian:
///
///   offset size
///    0     4   magic "LWC1"
///    4     2   u16 format version (1)
///    6     4   u32 image width
///   10     4   u32 image height
///   14     4   u32 padded width
///   18     4   u32 padded height
///   22     1   u8 filters (0 cdf97, 1 llb)
///   23     1   u8 entropy model (0 fem, 1 iscem, 2 iiscem, 3 ipiscem)
///   24     1   u8 levels
///   25     1   u8 coder table precision bits
///   26     2   u16 gaussian alphabet half width
///   28     2   u16 sigma bins
///   30     1   u8 mean offset bins
///   31     1   u8 escape length field bits
///   32     1   u8 bypass sigma threshold
///   33     8   u64 checkpoint hash (FNV-1a 64 of the serialized checkpoint)
///   41     8   u64 payload hash (FNV-1a 64 of all chunks, concatenated)
///   49     2   u16 chunk count C = 3 * (3 * levels + 1)
///   51         C chunk sizes, LEB128 varints
///              chunks
///
/// Each chunk is one rANS stream ending in the flushed coder state. Chunks are
/// ordered Y, Cb, Cr, each in band coding order (LL, LH_L, HL_L,
/// HH_L, ..., HH_1).
struct StreamHeader {
  static constexpr std::uint16_t kVersion = 1;
  int width = 0;
  int height = 0;
  int padded_width = 0;
  int padded_height = 0;
  CodecConfig config;
  std::uint64_t checkpoint_hash = 0;
  std::uint64_t payload_hash = 0;
};

struct EncodedImage {
  StreamHeader header;
  std::vector<std::vector<std::uint8_t>> chunks;

  std::size_t header_bytes() const;
  std::size_t chunk_bytes() const;
};

std::vector<std::uint8_t> serialize_stream(const EncodedImage& stream);
/// Checks magic, version, coder constants, sizes and the payload hash.
EncodedImage parse_stream(std::span<const std::uint8_t> bytes);
/// Human-readable header and per-band chunk sizes.
std::string describe_stream(const EncodedImage& stream);

/// Bits per pixel of `bytes` relative to the original image size.
double bits_per_pixel(std::size_t bytes, int width, int height);

struct EncodeResult {
  std::vector<std::uint8_t> bytes;
  EncodedImage stream;
  std::array<SubbandPyramid<float>, 3> quantized;
  RgbImage reconstruction;
  std::vector<double> ideal_bits;  // per chunk, under the coding tables
  std::size_t escapes = 0;
  double bpp = 0.0;                // chunk bytes * 8 / (width * height); the header is not counted
};

struct DecodeResult {
  RgbImage image;
  std::array<SubbandPyramid<float>, 3> quantized;
};

/// A system ready for coding: float networks plus the checkpoint hash that
/// streams record, and the factorized coding tables derived from it.
class Codec {
 public:
  Codec(CodecSystem<float> system, std::uint64_t checkpoint_hash);
  static Codec from_checkpoint(const Checkpoint& ckpt);

  const CodecConfig& config() const { return system_.config; }
  const CodecSystem<float>& system() const { return system_; }
  std::uint64_t checkpoint_hash() const { return hash_; }

  EncodeResult encode(const RgbImage& img) const;
  DecodeResult decode(std::span<const std::uint8_t> bytes) const;

  /// Model rate (-sum log2 p, in bits) of quantized pyramids, per channel and band.
  std::array<std::vector<double>, 3> model_bits(const std::array<SubbandPyramid<float>, 3>& quantized) const;
  /// Decoder half of the pipeline: scale_inverse, dwt_inverse, color conversion, crop.
  RgbImage reconstruct(const std::array<SubbandPyramid<float>, 3>& quantized, int width, int height) const;

 private:
  CodecSystem<float> system_;
  std::uint64_t hash_ = 0;
  std::array<std::vector<FactorizedTable>, 3> tables_;
};

/// Throws ConfigError unless `config` matches the codec's checkpoint.
EncodeResult encode_image(const RgbImage& img, const CodecConfig& config, const Codec& codec);
DecodeResult decode_image(std::span<const std::uint8_t> bytes, const Codec& codec);

}  // namespace lwc
