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

#include "lwc/rans.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "lwc/errors.hpp"

namespace lwc {

namespace {

constexpr int kScale = CoderConstants::kPrecisionBits;
constexpr std::uint64_t kLower = 1ull << CoderConstants::kStateLowerBits;
constexpr int kFlush = CoderConstants::kFlushBytes;
static_assert(CoderConstants::kStateLowerBits + 8 <= 8 * kFlush);
constexpr std::uint32_t kSlotMask = CoderConstants::kTotal - 1;

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

CdfTable::CdfTable(std::vector<std::uint32_t> cumulative) : cumulative_(std::move(cumulative)) {
  if (cumulative_.size() < 2 || cumulative_.front() != 0 || cumulative_.back() != CoderConstants::kTotal) {
    throw ConfigError("cdf table must start at 0 and end at 2^16");
  }
  for (std::size_t i = 1; i < cumulative_.size(); ++i) {
    if (cumulative_[i] <= cumulative_[i - 1]) throw ConfigError("cdf table has a zero-frequency symbol");
  }
}

int CdfTable::find(std::uint32_t slot) const {
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), slot);
  return static_cast<int>(it - cumulative_.begin()) - 1;
}

double CdfTable::bits(int s) const {
  return static_cast<double>(kScale) - std::log2(static_cast<double>(freq(s)));
}

CdfTable build_cdf_table(std::span<const double> pmf) {
  const std::size_t n = pmf.size();
  if (n == 0) throw ConfigError("build_cdf_table: empty pmf");
  if (n > CoderConstants::kTotal) throw ConfigError("build_cdf_table: more symbols than table slots");
  double mass = 0.0;
  for (double p : pmf) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw ConfigError("build_cdf_table: pmf must be finite and >= 0");
    mass += p;
  }
  // Every symbol gets one slot; the rest is shared in proportion to pmf.
  const std::uint32_t spare = CoderConstants::kTotal - static_cast<std::uint32_t>(n);
  std::vector<std::uint32_t> freq(n, 1);
  std::vector<double> remainder(n, 0.0);
  std::uint32_t used = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double share = mass > 0.0 ? pmf[i] / mass * spare : static_cast<double>(spare) / static_cast<double>(n);
    const double whole = std::floor(share);
    freq[i] += static_cast<std::uint32_t>(whole);
    used += static_cast<std::uint32_t>(whole);
    remainder[i] = share - whole;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::uint32_t k = 0; used < spare; ++k, ++used) freq[order[k % n]] += 1;
  std::vector<std::uint32_t> cumulative(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) cumulative[i + 1] = cumulative[i] + freq[i];
  return CdfTable(std::move(cumulative));
}

void RansEncoder::put(const CdfTable& table, int symbol) {
  if (symbol < 0 || symbol >= table.size()) {
    throw UsageError("rANS: symbol " + std::to_string(symbol) + " outside table of size " +
                     std::to_string(table.size()));
  }
  starts_.push_back(table.start(symbol));
  freqs_.push_back(table.freq(symbol));
}

void RansEncoder::put_bits(std::uint32_t value, int count) {
  if (count < 1 || count > kScale) throw UsageError("rANS: raw bit count must be in 1..16");
  const int shift = kScale - count;
  starts_.push_back((value & ((1u << count) - 1)) << shift);
  freqs_.push_back(1u << shift);
}

std::vector<std::uint8_t> RansEncoder::finish() {
  std::vector<std::uint8_t> out;
  out.reserve(starts_.size() + kFlush);
  std::uint64_t x = kLower;
  for (std::size_t k = starts_.size(); k-- > 0;) {
    const std::uint64_t f = freqs_[k];
    const std::uint64_t x_max = ((kLower >> kScale) << 8) * f;
    while (x >= x_max) {
      out.push_back(static_cast<std::uint8_t>(x & 0xff));
      x >>= 8;
    }
    x = ((x / f) << kScale) + (x % f) + starts_[k];
  }
  for (int i = 0; i < kFlush; ++i) {
    out.push_back(static_cast<std::uint8_t>(x & 0xff));
    x >>= 8;
  }
  std::reverse(out.begin(), out.end());
  starts_.clear();
  freqs_.clear();
  return out;
}

RansDecoder::RansDecoder(std::span<const std::uint8_t> bytes) : bytes_(bytes) {
  if (bytes_.size() < kFlush) {
    throw DecodeError("rANS stream of " + std::to_string(bytes_.size()) + " bytes is shorter than its state");
  }
  for (int i = 0; i < kFlush; ++i) state_ = (state_ << 8) | bytes_[pos_++];
  if (state_ < kLower) throw DecodeError("rANS stream starts with an invalid state");
}

void RansDecoder::renormalize() {
  while (state_ < kLower) {
    if (pos_ >= bytes_.size()) {
      throw DecodeError("rANS stream exhausted at byte " + std::to_string(pos_));
    }
    state_ = (state_ << 8) | bytes_[pos_++];
  }
}

int RansDecoder::get(const CdfTable& table) {
  const std::uint32_t slot = static_cast<std::uint32_t>(state_ & kSlotMask);
  const int s = table.find(slot);
  state_ = table.freq(s) * (state_ >> kScale) + slot - table.start(s);
  renormalize();
  return s;
}

std::uint32_t RansDecoder::get_bits(int count) {
  if (count < 1 || count > kScale) throw UsageError("rANS: raw bit count must be in 1..16");
  const int shift = kScale - count;
  const std::uint32_t slot = static_cast<std::uint32_t>(state_ & kSlotMask);
  const std::uint32_t value = slot >> shift;
  state_ = (std::uint64_t{1} << shift) * (state_ >> kScale) + slot - (value << shift);
  renormalize();
  return value;
}

void RansDecoder::finish() const {
  if (pos_ != bytes_.size() || state_ != kLower) {
    throw DecodeError("rANS stream corrupt: ended at byte " + std::to_string(pos_) + " of " +
                      std::to_string(bytes_.size()) + " with a non-initial state");
  }
}

SigmaTableCache::SigmaTableCache() {
  constexpr int a = CoderConstants::kHalfWidth;
  tables_.reserve(CoderConstants::kSigmaBins * CoderConstants::kOffsetBins);
  std::vector<double> pmf(2 * a + 2);
  for (int b = 0; b < CoderConstants::kSigmaBins; ++b) {
    const double sigma = bin_sigma(b);
    for (int o = 0; o < CoderConstants::kOffsetBins; ++o) {
      const double mu = bin_offset(o);
      for (int v = -a; v <= a; ++v) {
        pmf[v + a] = normal_cdf((v - mu + 0.5) / sigma) - normal_cdf((v - mu - 0.5) / sigma);
      }
      pmf[2 * a + 1] = normal_cdf((-a - mu - 0.5) / sigma) + normal_cdf((mu - a - 0.5) / sigma);
      tables_.push_back(build_cdf_table(pmf));
    }
  }
}

int SigmaTableCache::bin(double sigma) {
  if (!(sigma > CoderConstants::kSigmaMin)) return 0;
  const double span = std::log(CoderConstants::kSigmaMax) - std::log(CoderConstants::kSigmaMin);
  const double t = (std::log(sigma) - std::log(CoderConstants::kSigmaMin)) / span;
  const int b = static_cast<int>(std::floor(t * CoderConstants::kSigmaBins));
  return std::clamp(b, 0, CoderConstants::kSigmaBins - 1);
}

double SigmaTableCache::bin_sigma(int bin) {
  const double lo = std::log(CoderConstants::kSigmaMin);
  const double span = std::log(CoderConstants::kSigmaMax) - lo;
  return std::exp(lo + (bin + 0.5) * span / CoderConstants::kSigmaBins);
}

int SigmaTableCache::offset_bin(double offset) {
  const int b = static_cast<int>(std::floor((offset + 0.5) * CoderConstants::kOffsetBins));
  return std::clamp(b, 0, CoderConstants::kOffsetBins - 1);
}

double SigmaTableCache::bin_offset(int offset_bin) {
  return (offset_bin + 0.5) / CoderConstants::kOffsetBins - 0.5;
}

const SigmaTableCache& sigma_table_cache() {
  static const SigmaTableCache cache;
  return cache;
}

int bypass_bits(float sigma) {
  if (!(sigma >= CoderConstants::kBypassSigma)) return 0;
  int e = 0;
  std::frexp(sigma / CoderConstants::kBypassSigma, &e);  // sigma / 8 in [2^(e-1), 2^e)
  return std::min(e, 16);
}

GaussianSymbol gaussian_symbol(std::int32_t v, float mu, float sigma, const SigmaTableCache& cache) {
  GaussianSymbol g;
  g.bypass = bypass_bits(sigma);
  g.center = static_cast<int>(std::round(mu));
  const double offset = std::ldexp(static_cast<double>(mu) - g.center, -g.bypass);
  g.table = &cache.table(SigmaTableCache::bin(std::ldexp(static_cast<double>(sigma), -g.bypass)),
                         SigmaTableCache::offset_bin(offset));
  const std::int64_t r = static_cast<std::int64_t>(v) - g.center;
  if (g.bypass == 0) {
    g.high = r;
  } else {
    const std::int64_t half = std::int64_t{1} << (g.bypass - 1);
    g.high = (r + half) >> g.bypass;  // floor division
    g.low = static_cast<std::uint32_t>(r + half - (g.high << g.bypass));
  }
  constexpr int a = CoderConstants::kHalfWidth;
  g.escape = g.high < -a || g.high > a;
  g.symbol = g.escape ? 2 * a + 1 : static_cast<int>(g.high) + a;
  return g;
}

CoefficientCoder CoefficientCoder::encoder() {
  CoefficientCoder c;
  c.encoder_ = std::make_unique<RansEncoder>();
  return c;
}

CoefficientCoder CoefficientCoder::decoder(std::span<const std::uint8_t> bytes) {
  CoefficientCoder c;
  c.decoder_ = std::make_unique<RansDecoder>(bytes);
  return c;
}

void CoefficientCoder::code_bits(std::uint64_t& value, int count) {
  for (int done = 0; done < count;) {
    const int n = std::min(count - done, 16);
    if (decoder_) {
      value |= static_cast<std::uint64_t>(decoder_->get_bits(n)) << done;
    } else {
      encoder_->put_bits(static_cast<std::uint32_t>(value >> done), n);
    }
    done += n;
  }
  ideal_bits_ += count;
}

void CoefficientCoder::code_escape(std::int64_t lo, std::int64_t hi, std::int64_t& value) {
  // distance d >= 1 past the window [lo, hi]; d is sent as its bit length n
  // followed by the n - 1 bits below the leading one.
  std::uint64_t side = !decoder_ && value > hi ? 1 : 0;
  std::uint64_t d = decoder_ ? 0 : static_cast<std::uint64_t>(side ? value - hi : lo - value);
  std::uint64_t n = decoder_ ? 0 : static_cast<std::uint64_t>(std::bit_width(d));
  code_bits(side, 1);
  code_bits(n, CoderConstants::kEscapeLengthBits);
  if (decoder_ && (n < 1 || n > 40)) throw DecodeError("rANS escape has an invalid length");
  std::uint64_t rest = d & ((std::uint64_t{1} << (n - 1)) - 1);
  if (n > 1) code_bits(rest, static_cast<int>(n - 1));
  if (decoder_) {
    d = (std::uint64_t{1} << (n - 1)) | rest;
    value = side ? hi + static_cast<std::int64_t>(d) : lo - static_cast<std::int64_t>(d);
  }
  ++escapes_;
}

void CoefficientCoder::code(const CdfTable& table, int offset, std::int32_t& value) {
  std::int64_t v = value;
  code_symbol(table, offset, v);
  if (v < std::numeric_limits<std::int32_t>::min() || v > std::numeric_limits<std::int32_t>::max()) {
    throw DecodeError("rANS escape decodes outside the 32-bit range");
  }
  value = static_cast<std::int32_t>(v);
}

void CoefficientCoder::code_symbol(const CdfTable& table, int offset, std::int64_t& value) {
  const int escape = table.size() - 1;
  if (decoder_) {
    const int s = decoder_->get(table);
    ideal_bits_ += table.bits(s);
    if (s == escape) {
      code_escape(offset, offset + escape - 1, value);
    } else {
      value = offset + s;
    }
    return;
  }
  const std::int64_t index = value - offset;
  if (index >= 0 && index < escape) {
    encoder_->put(table, static_cast<int>(index));
    ideal_bits_ += table.bits(static_cast<int>(index));
    return;
  }
  encoder_->put(table, escape);
  ideal_bits_ += table.bits(escape);
  code_escape(offset, offset + escape - 1, value);
}

void CoefficientCoder::code_gaussian(float mu, float sigma, std::int32_t& value) {
  const GaussianSymbol g = gaussian_symbol(decoder_ ? 0 : value, mu, sigma, sigma_table_cache());
  constexpr int a = CoderConstants::kHalfWidth;
  std::int64_t high = g.high;
  code_symbol(*g.table, -a, high);
  std::uint64_t low = decoder_ ? 0 : g.low;
  if (g.bypass > 0) code_bits(low, g.bypass);
  if (decoder_) {
    const std::int64_t r =
        g.bypass == 0 ? high : high * (std::int64_t{1} << g.bypass) - (std::int64_t{1} << (g.bypass - 1)) +
                                   static_cast<std::int64_t>(low);
    const std::int64_t v = g.center + r;
    if (v < std::numeric_limits<std::int32_t>::min() || v > std::numeric_limits<std::int32_t>::max()) {
      throw DecodeError("rANS escape decodes outside the 32-bit range");
    }
    value = static_cast<std::int32_t>(v);
  }
}

std::vector<std::uint8_t> CoefficientCoder::finish_encoding() {
  if (!encoder_) throw UsageError("finish_encoding on a decoding coder");
  return encoder_->finish();
}

void CoefficientCoder::finish_decoding() const {
  if (!decoder_) throw UsageError("finish_decoding on an encoding coder");
  decoder_->finish();
}

std::vector<std::uint8_t> encode_symbols(std::span<const int> symbols, std::span<const CdfTable* const> tables) {
  if (symbols.size() != tables.size()) throw UsageError("encode_symbols: one table per symbol");
  RansEncoder enc;
  for (std::size_t i = 0; i < symbols.size(); ++i) enc.put(*tables[i], symbols[i]);
  return enc.finish();
}

std::vector<int> decode_symbols(std::span<const std::uint8_t> bytes, std::span<const CdfTable* const> tables) {
  RansDecoder dec(bytes);
  std::vector<int> out(tables.size());
  for (std::size_t i = 0; i < tables.size(); ++i) out[i] = dec.get(*tables[i]);
  dec.finish();
  return out;
}

}  // namespace lwc
