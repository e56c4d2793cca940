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

#include "lwc/codec.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "byte_io.hpp"
#include "lwc/errors.hpp"

namespace lwc {

namespace {

constexpr char kMagic[4] = {'L', 'W', 'C', '1'};
constexpr std::size_t kFixedHeaderBytes = 51;

std::uint64_t component_seed(std::uint64_t seed, int channel, int component) {
  return seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(channel) * 1000003ull +
         static_cast<std::uint64_t>(component);
}

int chunk_count(int levels) { return 3 * band_count(levels); }

template <typename T>
SubbandPyramid<T> empty_pyramid(int levels, int height, int width) {
  SubbandPyramid<T> p;
  p.levels = levels;
  p.height = height;
  p.width = width;
  for (int b = 0; b < band_count(levels); ++b) {
    const int level = band_level(levels, b);
    p.bands.emplace_back(Shape{1, 1, height >> level, width >> level});
  }
  return p;
}

// Codes one color channel unit by unit in decode-schedule order. The same
// routine runs in both directions: encoding coders read the coefficient in
// `q`, decoding coders overwrite it, so every conditional input is computed
// from exactly the values the decoder has at that point.
class ChannelCoder {
 public:
  ChannelCoder(const ChannelCodec<float>& ch, const std::vector<FactorizedTable>& tables, SubbandPyramid<float>& q,
               std::vector<CoefficientCoder>& coders)
      : ch_(ch), tables_(tables), q_(q), coders_(coders), kind_(ch.entropy.kind), levels_(ch.entropy.levels) {}

  void run() {
    for (const CodingUnit& u : decode_schedule(kind_, levels_)) code_unit(u);
  }

 private:
  void code_unit(const CodingUnit& u) {
    const int b = u.band;
    CoefficientCoder& coder = coders_[b];
    auto data = q_.bands[b].mutable_data();
    const Shape s = q_.bands[b].shape();
    switch (band_model(kind_, levels_, b)) {
      case BandModel::kFactorized: {
        const FactorizedTable& t = tables_[b];
        for (auto& x : data) {
          std::int32_t v = static_cast<std::int32_t>(x);
          coder.code(t.table, t.offset, v);
          x = static_cast<float>(v);
        }
        return;
      }
      case BandModel::kInter: {
        const int level = band_level(levels_, b);
        auto it = inter_raw_.find(level);
        if (it == inter_raw_.end()) {
          it = inter_raw_.emplace(level, ch_.entropy.inter[level - 1].raw(orientation_triple(q_, level + 1))).first;
        }
        const GaussianParams<float> p =
            gaussian_params_from_raw(it->second, static_cast<int>(band_orientation(levels_, b)));
        const auto mu = p.mu.data();
        const auto sigma = p.sigma.data();
        for (std::size_t k = 0; k < data.size(); ++k) {
          std::int32_t v = static_cast<std::int32_t>(data[k]);
          coder.code_gaussian(mu[k], sigma[k], v);
          data[k] = static_cast<float>(v);
        }
        return;
      }
      case BandModel::kTopMasked: {
        TopLevelCursor cursor(ch_.entropy.top[b], s.h, s.w);
        code_raster(cursor, coder, data, s);
        return;
      }
      case BandModel::kInterIntra: {
        const int level = band_level(levels_, b);
        auto it = right_.find(level);
        if (it == right_.end()) {
          const auto& net = ch_.entropy.inter_intra[level - 1];
          it = right_.emplace(level, net.right_features(orientation_triple(q_, level + 1))).first;
        }
        InterIntraCursor cursor(ch_.entropy.inter_intra[level - 1], static_cast<int>(band_orientation(levels_, b)),
                                it->second);
        code_raster(cursor, coder, data, s);
        return;
      }
      case BandModel::kPhase: {
        const int level = band_level(levels_, b);
        const auto key = std::make_pair(level, u.phase);
        auto it = phase_params_.find(key);
        if (it == phase_params_.end()) {
          it = phase_params_.emplace(key, ipiscem_params(ch_.entropy, q_, level, u.phase)).first;
        }
        const GaussianParams<float>& p = it->second[static_cast<int>(band_orientation(levels_, b))];
        const auto mu = p.mu.data();
        const auto sigma = p.sigma.data();
        const int h2 = s.h / 2, w2 = s.w / 2;
        for (int i = 0; i < h2; ++i)
          for (int j = 0; j < w2; ++j) {
            const std::size_t k = static_cast<std::size_t>(2 * i + u.phase / 2) * s.w + 2 * j + u.phase % 2;
            std::int32_t v = static_cast<std::int32_t>(data[k]);
            coder.code_gaussian(mu[i * w2 + j], sigma[i * w2 + j], v);
            data[k] = static_cast<float>(v);
          }
        return;
      }
    }
  }

  template <typename Cursor>
  static void code_raster(Cursor& cursor, CoefficientCoder& coder, std::span<float> data, Shape s) {
    for (int i = 0; i < s.h; ++i)
      for (int j = 0; j < s.w; ++j) {
        const ScalarGaussian g = cursor.at(i, j);
        float& x = data[static_cast<std::size_t>(i) * s.w + j];
        std::int32_t v = static_cast<std::int32_t>(x);
        coder.code_gaussian(g.mu, g.sigma, v);
        x = static_cast<float>(v);
        cursor.set(i, j, x);
      }
  }

  const ChannelCodec<float>& ch_;
  const std::vector<FactorizedTable>& tables_;
  SubbandPyramid<float>& q_;
  std::vector<CoefficientCoder>& coders_;
  EntropyKind kind_;
  int levels_;
  std::map<int, Tensor<float>> inter_raw_;
  std::map<int, Tensor<float>> right_;
  std::map<std::pair<int, int>, std::array<GaussianParams<float>, 3>> phase_params_;
};

std::uint64_t payload_hash(const std::vector<std::vector<std::uint8_t>>& chunks) {
  std::vector<std::uint8_t> all;
  for (const auto& c : chunks) all.insert(all.end(), c.begin(), c.end());
  return fnv1a64(all);
}

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016" PRIx64, v);
  return buf;
}

}  // namespace

std::string to_string(FilterKind kind) { return kind == FilterKind::kCdf97 ? "cdf97" : "llb"; }

FilterKind parse_filter_kind(const std::string& name) {
  if (name == "cdf97") return FilterKind::kCdf97;
  if (name == "llb") return FilterKind::kLlb;
  throw ConfigError("unknown filters '" + name + "' (expected cdf97 or llb)");
}

std::string to_string(const CodecConfig& config) { return to_string(config.filters) + "+" + to_string(config.entropy); }

template <typename T>
ParamList<T> CodecSystem<T>::parameters() const {
  ParamList<T> out;
  for (int c = 0; c < 3; ++c) {
    const std::string name = kChannelNames[c];
    channels[c].wavelet.collect("dwt." + name, out);
    channels[c].encoder_scaling.collect("scale.enc." + name, out);
    channels[c].decoder_scaling.collect("scale.dec." + name, out);
    channels[c].entropy.collect("em." + name, out);
  }
  return out;
}

template <typename T>
CodecSystem<T> make_system(const CodecConfig& config, std::uint64_t seed) {
  if (config.levels < 2 || config.levels > kMaxLevels) throw ConfigError("levels must be in 2..6");
  CodecSystem<T> sys;
  sys.config = config;
  const ScalingVariant variant = config.filters == FilterKind::kCdf97 ? ScalingVariant::kSimple : ScalingVariant::kLlb;
  for (int c = 0; c < 3; ++c) {
    ChannelCodec<T>& ch = sys.channels[c];
    ch.wavelet = config.filters == FilterKind::kCdf97 ? cdf97_wavelet2d<T>()
                                                      : learned_wavelet2d<T>(component_seed(seed, c, 0));
    ch.encoder_scaling =
        make_scaling_network<T>(variant, config.levels, false, ScalingInit::kTraining, component_seed(seed, c, 1));
    ch.decoder_scaling =
        make_scaling_network<T>(variant, config.levels, true, ScalingInit::kTraining, component_seed(seed, c, 2));
    ch.entropy = make_channel_entropy_model<T>(config.entropy, config.levels, component_seed(seed, c, 3));
  }
  return sys;
}

Checkpoint to_checkpoint(const CodecSystem<float>& system) {
  Checkpoint ckpt;
  ckpt.meta["filters"] = to_string(system.config.filters);
  ckpt.meta["entropy"] = to_string(system.config.entropy);
  ckpt.meta["levels"] = std::to_string(system.config.levels);
  store_params(system.parameters(), ckpt);
  return ckpt;
}

CodecConfig checkpoint_config(const Checkpoint& ckpt) {
  auto get = [&](const char* key) {
    auto it = ckpt.meta.find(key);
    if (it == ckpt.meta.end()) throw ConfigError(std::string("checkpoint has no '") + key + "' entry");
    return it->second;
  };
  CodecConfig config;
  config.filters = parse_filter_kind(get("filters"));
  config.entropy = parse_entropy_kind(get("entropy"));
  try {
    config.levels = std::stoi(get("levels"));
  } catch (const std::logic_error&) {
    throw ConfigError("checkpoint levels entry is not a number");
  }
  return config;
}

template <typename T>
CodecSystem<T> system_from_checkpoint(const Checkpoint& ckpt) {
  CodecSystem<T> sys = make_system<T>(checkpoint_config(ckpt), 0);
  ParamList<T> params = sys.parameters();
  restore_params(ckpt, params);
  return sys;
}

template <typename T>
ForwardPass<T> run_system(const CodecSystem<T>& system, const std::array<Tensor<T>, 3>& rgb, QuantizerMode mode,
                          std::mt19937_64* rng) {
  const int levels = system.config.levels;
  ForwardPass<T> out;
  std::array<Tensor<T>, 3> ycc = rgb_planes_to_ycbcr(rgb);
  ycc[0] = add_scalar(ycc[0], static_cast<T>(-kLumaOffset));
  std::array<Tensor<T>, 3> rec;
  out.rate_bits = Tensor<T>(Shape{1, 1, 1, 1});
  for (int c = 0; c < 3; ++c) {
    const ChannelCodec<T>& ch = system.channels[c];
    const SubbandPyramid<T> y = scale_forward(dwt_forward(ycc[c], ch.wavelet, levels), ch.encoder_scaling);
    SubbandPyramid<T> q = quantize(y, mode, rng);
    const std::vector<Tensor<T>> lik = ch.entropy.likelihoods(q);
    for (const auto& l : lik) {
      Tensor<T> bits = rate_bits(l);
      out.band_bits[c].push_back(bits);
      out.rate_bits = add(out.rate_bits, bits);
    }
    rec[c] = dwt_inverse(scale_inverse(q, ch.decoder_scaling), ch.wavelet);
    out.quantized[c] = std::move(q);
  }
  rec[0] = add_scalar(rec[0], static_cast<T>(kLumaOffset));
  out.rgb = ycbcr_to_rgb(rec);
  return out;
}

std::size_t EncodedImage::header_bytes() const {
  std::size_t n = kFixedHeaderBytes;
  for (const auto& c : chunks) n += ByteWriter::varint_size(static_cast<std::uint32_t>(c.size()));
  return n;
}

std::size_t EncodedImage::chunk_bytes() const {
  std::size_t n = 0;
  for (const auto& c : chunks) n += c.size();
  return n;
}

std::vector<std::uint8_t> serialize_stream(const EncodedImage& stream) {
  const StreamHeader& h = stream.header;
  ByteWriter w;
  for (char c : kMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u16(StreamHeader::kVersion);
  w.u32(static_cast<std::uint32_t>(h.width));
  w.u32(static_cast<std::uint32_t>(h.height));
  w.u32(static_cast<std::uint32_t>(h.padded_width));
  w.u32(static_cast<std::uint32_t>(h.padded_height));
  w.u8(static_cast<std::uint8_t>(h.config.filters));
  w.u8(static_cast<std::uint8_t>(h.config.entropy));
  w.u8(static_cast<std::uint8_t>(h.config.levels));
  w.u8(CoderConstants::kPrecisionBits);
  w.u16(CoderConstants::kHalfWidth);
  w.u16(CoderConstants::kSigmaBins);
  w.u8(CoderConstants::kOffsetBins);
  w.u8(CoderConstants::kEscapeLengthBits);
  w.u8(CoderConstants::kBypassSigma);
  w.u64(h.checkpoint_hash);
  w.u64(h.payload_hash);
  w.u16(static_cast<std::uint16_t>(stream.chunks.size()));
  for (const auto& c : stream.chunks) w.varint(static_cast<std::uint32_t>(c.size()));
  for (const auto& c : stream.chunks) w.bytes(c);
  return w.take();
}

EncodedImage parse_stream(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "LWC1 stream");
  const auto magic = r.bytes(4);
  if (!std::equal(magic.begin(), magic.end(), kMagic)) throw DecodeError("not an LWC1 stream (bad magic)");
  const std::uint16_t version = r.u16();
  if (version != StreamHeader::kVersion) {
    throw DecodeError("unsupported LWC1 format version " + std::to_string(version));
  }
  EncodedImage s;
  StreamHeader& h = s.header;
  h.width = static_cast<int>(r.u32());
  h.height = static_cast<int>(r.u32());
  h.padded_width = static_cast<int>(r.u32());
  h.padded_height = static_cast<int>(r.u32());
  const std::uint8_t filters = r.u8(), entropy = r.u8(), levels = r.u8();
  if (filters > 1 || entropy > 3 || levels < 2 || levels > kMaxLevels) {
    throw DecodeError("stream header holds an unknown configuration");
  }
  h.config = CodecConfig{static_cast<FilterKind>(filters), static_cast<EntropyKind>(entropy), levels};
  const std::uint8_t precision = r.u8();
  const std::uint16_t half_width = r.u16(), bins = r.u16();
  const std::uint8_t offsets = r.u8();
  const std::uint8_t escape_bits = r.u8(), bypass = r.u8();
  if (precision != CoderConstants::kPrecisionBits || half_width != CoderConstants::kHalfWidth ||
      bins != CoderConstants::kSigmaBins || offsets != CoderConstants::kOffsetBins || escape_bits != CoderConstants::kEscapeLengthBits ||
      bypass != CoderConstants::kBypassSigma) {
    throw DecodeError("stream was written with different coder constants");
  }
  h.checkpoint_hash = r.u64();
  h.payload_hash = r.u64();
  const int m = 1 << levels;
  if (h.width <= 0 || h.height <= 0 || h.padded_width != round_up(h.width, m) ||
      h.padded_height != round_up(h.height, m) || h.width < m || h.height < m) {
    throw DecodeError("stream header has inconsistent image dimensions");
  }
  const std::uint16_t count = r.u16();
  if (count != chunk_count(levels)) throw DecodeError("stream has " + std::to_string(count) + " chunks");
  std::vector<std::uint32_t> sizes(count);
  std::uint64_t total = 0;
  for (auto& n : sizes) {
    n = r.varint();
    total += n;
  }
  if (total != r.remaining()) {
    throw DecodeError("stream chunk directory covers " + std::to_string(total) + " bytes but " +
                      std::to_string(r.remaining()) + " follow the header");
  }
  for (auto n : sizes) {
    const auto b = r.bytes(n);
    s.chunks.emplace_back(b.begin(), b.end());
  }
  if (payload_hash(s.chunks) != h.payload_hash) throw DecodeError("stream payload hash mismatch (corrupt chunk)");
  return s;
}

std::string describe_stream(const EncodedImage& stream) {
  const StreamHeader& h = stream.header;
  const std::size_t total = stream.header_bytes() + stream.chunk_bytes();
  std::ostringstream os;
  os << "format      LWC1 v" << StreamHeader::kVersion << "\n";
  os << "image       " << h.width << "x" << h.height << " (padded " << h.padded_width << "x" << h.padded_height
     << ")\n";
  os << "config      " << to_string(h.config) << ", " << h.config.levels << " levels\n";
  os << "coder       " << CoderConstants::kPrecisionBits << "-bit tables, half width " << CoderConstants::kHalfWidth
     << ", " << CoderConstants::kSigmaBins << " sigma bins x " << CoderConstants::kOffsetBins
     << " offset bins, bypass from sigma " << CoderConstants::kBypassSigma << "\n";
  os << "checkpoint  " << hex64(h.checkpoint_hash) << "\n";
  os << "payload     " << hex64(h.payload_hash) << "\n";
  os << "bytes       header " << stream.header_bytes() << ", chunks " << stream.chunk_bytes() << ", total " << total
     << "\n";
  char bpp[32];
  std::snprintf(bpp, sizeof bpp, "%.4f", bits_per_pixel(stream.chunk_bytes(), h.width, h.height));
  os << "bpp         " << bpp << "\n";
  os << "channel band   bytes\n";
  const int bands = band_count(h.config.levels);
  for (std::size_t k = 0; k < stream.chunks.size(); ++k) {
    char line[64];
    std::snprintf(line, sizeof line, "%-7s %-6s %zu\n", kChannelNames[k / bands],
                  band_name(h.config.levels, static_cast<int>(k % bands)).c_str(), stream.chunks[k].size());
    os << line;
  }
  return os.str();
}

double bits_per_pixel(std::size_t bytes, int width, int height) {
  return static_cast<double>(bytes) * 8.0 / (static_cast<double>(width) * height);
}

Codec::Codec(CodecSystem<float> system, std::uint64_t checkpoint_hash)
    : system_(std::move(system)), hash_(checkpoint_hash) {
  for (int c = 0; c < 3; ++c) {
    for (const auto& d : system_.channels[c].entropy.factorized) tables_[c].push_back(build_factorized_table(d));
  }
}

Codec Codec::from_checkpoint(const Checkpoint& ckpt) {
  return Codec(system_from_checkpoint<float>(ckpt), lwc::checkpoint_hash(ckpt));
}

EncodeResult Codec::encode(const RgbImage& img) const {
  NoGradGuard no_grad;
  const int levels = system_.config.levels;
  const int m = 1 << levels;
  if (img.width < m || img.height < m) {
    throw ConfigError("image " + std::to_string(img.width) + "x" + std::to_string(img.height) +
                      " is smaller than " + std::to_string(m) + " pixels on a side");
  }
  const RgbImage padded = pad_to_multiple(img, m);
  std::array<Tensor<float>, 3> ycc = rgb_to_ycbcr(padded);
  ycc[0] = add_scalar(ycc[0], -kLumaOffset);

  EncodeResult res;
  for (int c = 0; c < 3; ++c) {
    const ChannelCodec<float>& ch = system_.channels[c];
    res.quantized[c] =
        quantize(scale_forward(dwt_forward(ycc[c], ch.wavelet, levels), ch.encoder_scaling), QuantizerMode::kRound,
                 nullptr);
    SubbandPyramid<float> q = res.quantized[c];
    for (auto& b : q.bands) b = b.detach();
    std::vector<CoefficientCoder> coders;
    for (int b = 0; b < band_count(levels); ++b) coders.push_back(CoefficientCoder::encoder());
    ChannelCoder(ch, tables_[c], q, coders).run();
    for (auto& coder : coders) {
      res.ideal_bits.push_back(coder.ideal_bits());
      res.escapes += coder.escapes();
      res.stream.chunks.push_back(coder.finish_encoding());
    }
  }
  StreamHeader& h = res.stream.header;
  h.width = img.width;
  h.height = img.height;
  h.padded_width = padded.width;
  h.padded_height = padded.height;
  h.config = system_.config;
  h.checkpoint_hash = hash_;
  h.payload_hash = payload_hash(res.stream.chunks);
  res.bytes = serialize_stream(res.stream);
  res.bpp = bits_per_pixel(res.stream.chunk_bytes(), img.width, img.height);
  res.reconstruction = reconstruct(res.quantized, img.width, img.height);
  return res;
}

DecodeResult Codec::decode(std::span<const std::uint8_t> bytes) const {
  NoGradGuard no_grad;
  const EncodedImage s = parse_stream(bytes);
  const StreamHeader& h = s.header;
  if (!(h.config == system_.config)) {
    throw DecodeError("stream was encoded as " + to_string(h.config) + " but the checkpoint is " +
                      to_string(system_.config));
  }
  if (h.checkpoint_hash != hash_) {
    throw DecodeError("stream references checkpoint " + hex64(h.checkpoint_hash) + ", loaded checkpoint is " +
                      hex64(hash_));
  }
  const int levels = h.config.levels;
  const int bands = band_count(levels);
  DecodeResult res;
  for (int c = 0; c < 3; ++c) {
    SubbandPyramid<float> q = empty_pyramid<float>(levels, h.padded_height, h.padded_width);
    std::vector<CoefficientCoder> coders;
    for (int b = 0; b < bands; ++b) coders.push_back(CoefficientCoder::decoder(s.chunks[c * bands + b]));
    ChannelCoder(system_.channels[c], tables_[c], q, coders).run();
    for (const auto& coder : coders) coder.finish_decoding();
    res.quantized[c] = std::move(q);
  }
  res.image = reconstruct(res.quantized, h.width, h.height);
  return res;
}

std::array<std::vector<double>, 3> Codec::model_bits(const std::array<SubbandPyramid<float>, 3>& quantized) const {
  NoGradGuard no_grad;
  std::array<std::vector<double>, 3> out;
  for (int c = 0; c < 3; ++c) {
    for (const auto& l : system_.channels[c].entropy.likelihoods(quantized[c])) {
      double bits = 0.0;
      for (float p : l.data()) bits -= std::log2(static_cast<double>(p));
      out[c].push_back(bits);
    }
  }
  return out;
}

RgbImage Codec::reconstruct(const std::array<SubbandPyramid<float>, 3>& quantized, int width, int height) const {
  NoGradGuard no_grad;
  std::array<Tensor<float>, 3> rec;
  for (int c = 0; c < 3; ++c) {
    const ChannelCodec<float>& ch = system_.channels[c];
    rec[c] = dwt_inverse(scale_inverse(quantized[c], ch.decoder_scaling), ch.wavelet);
  }
  rec[0] = add_scalar(rec[0], kLumaOffset);
  return crop(planes_to_rgb(ycbcr_to_rgb(rec)), width, height);
}

EncodeResult encode_image(const RgbImage& img, const CodecConfig& config, const Codec& codec) {
  if (!(config == codec.config())) {
    throw ConfigError("requested " + to_string(config) + " but the checkpoint was trained as " +
                      to_string(codec.config()));
  }
  return codec.encode(img);
}

DecodeResult decode_image(std::span<const std::uint8_t> bytes, const Codec& codec) { return codec.decode(bytes); }

#define LWC_INSTANTIATE(T)                                                                                  \
  template struct CodecSystem<T>;                                                                           \
  template CodecSystem<T> make_system<T>(const CodecConfig&, std::uint64_t);                                \
  template CodecSystem<T> system_from_checkpoint<T>(const Checkpoint&);                                     \
  template ForwardPass<T> run_system(const CodecSystem<T>&, const std::array<Tensor<T>, 3>&, QuantizerMode, \
                                     std::mt19937_64*);

LWC_INSTANTIATE(float)
LWC_INSTANTIATE(double)

#undef LWC_INSTANTIATE

}  // namespace lwc
