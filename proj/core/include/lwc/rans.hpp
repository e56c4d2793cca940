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

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace lwc {

/// Coder constants. They are written into every bitstream header.
struct CoderConstants {
  static constexpr int kPrecisionBits = 16;
  static constexpr std::uint32_t kTotal = 1u << kPrecisionBits;
  static constexpr int kHalfWidth = 64;  // Gaussian alphabet [-64, 64] + escape
  static constexpr int kSigmaBins = 64;
  static constexpr double kSigmaMin = 1e-3;
  static constexpr double kSigmaMax = 1e3;
  /// Fractional part of the mean, mu - round(mu), in uniform bins over [-1/2, 1/2].
  static constexpr int kOffsetBins = 16;
  /// Escapes send the distance past the table window as a kEscapeLengthBits
  /// bit length, the bits below the leading one, and a side bit.
  static constexpr int kEscapeLengthBits = 6;
  /// Gaussians with sigma >= kBypassSigma code the high part of the residual
  /// against a table for sigma / 2^k, k chosen so that sigma / 2^k lies in
  /// [kBypassSigma / 2, kBypassSigma), and send the k low bits uniformly.
  static constexpr int kBypassSigma = 8;
  /// The coder state lives in [2^kStateLowerBits, 2^(kStateLowerBits + 8)) and
  /// is flushed as kFlushBytes bytes.
  static constexpr int kStateLowerBits = 31;
  static constexpr int kFlushBytes = 5;
};

/// Quantized distribution over symbols 0..size()-1. By convention the last
/// symbol is the escape of the tables built in this library.
class CdfTable {
 public:
  CdfTable() = default;
  /// `cumulative` has size+1 entries, starts at 0 and ends at 2^16.
  explicit CdfTable(std::vector<std::uint32_t> cumulative);

  int size() const { return static_cast<int>(cumulative_.size()) - 1; }
  std::uint32_t start(int s) const { return cumulative_[s]; }
  std::uint32_t freq(int s) const { return cumulative_[s + 1] - cumulative_[s]; }
  /// Symbol whose interval contains `slot` (< 2^16).
  int find(std::uint32_t slot) const;
  /// Ideal code length of `s` under this table.
  double bits(int s) const;
  const std::vector<std::uint32_t>& cumulative() const { return cumulative_; }

 private:
  std::vector<std::uint32_t> cumulative_;
};

/// Frequencies proportional to `pmf`, each at least 1, summing to exactly
/// 2^16. Rounding follows the largest-remainder rule, ties broken by lower
/// index. Throws ConfigError on an empty, negative or non-finite pmf, or
/// more than 2^16 symbols.
CdfTable build_cdf_table(std::span<const double> pmf);

/// rANS with a 64-bit state register and byte-wise renormalization. Symbols are
/// buffered and encoded in reverse on finish(), so the decoder reads them in
/// the order they were put.
class RansEncoder {
 public:
  void put(const CdfTable& table, int symbol);
  /// `count` raw bits, 1 <= count <= 16, coded as a uniform symbol.
  void put_bits(std::uint32_t value, int count);
  std::size_t pending() const { return starts_.size(); }
  /// Finishes the stream; the encoder is empty afterwards.
  std::vector<std::uint8_t> finish();

 private:
  std::vector<std::uint32_t> starts_;
  std::vector<std::uint32_t> freqs_;
};

class RansDecoder {
 public:
  /// Throws DecodeError if the stream is shorter than the flushed state.
  explicit RansDecoder(std::span<const std::uint8_t> bytes);

  int get(const CdfTable& table);
  std::uint32_t get_bits(int count);
  /// Throws DecodeError unless every byte was consumed and the state returned
  /// to its initial value.
  void finish() const;

 private:
  void renormalize();

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  std::uint64_t state_ = 0;
};

/// One discretized Gaussian table per log-spaced sigma bin and mean offset
/// bin. Symbol i stands for the integer i - kHalfWidth.
class SigmaTableCache {
 public:
  SigmaTableCache();

  static int bin(double sigma);
  /// Sigma the table of `bin` was built for (geometric bin centre).
  static double bin_sigma(int bin);
  static int offset_bin(double offset);
  static double bin_offset(int offset_bin);
  const CdfTable& table(int bin, int offset_bin) const {
    return tables_[static_cast<std::size_t>(bin) * CoderConstants::kOffsetBins + offset_bin];
  }

 private:
  std::vector<CdfTable> tables_;
};

/// Process-wide cache (built on first use, immutable afterwards).
const SigmaTableCache& sigma_table_cache();

/// Number of uniformly coded low bits for a Gaussian of this sigma.
int bypass_bits(float sigma);

/// Table and symbols for coding integer `v` under N(mu, sigma). With k bypass
/// bits the residual r = v - center splits as r = high * 2^k - 2^(k-1) + low,
/// and the table is the one for sigma / 2^k and offset (mu - center) / 2^k.
struct GaussianSymbol {
  const CdfTable* table = nullptr;
  int center = 0;        // round(mu), ties away from zero
  int bypass = 0;        // k
  std::int64_t high = 0;
  std::uint32_t low = 0;
  int symbol = 0;        // index of `high` in table; escape when |high| > half width
  bool escape = false;
};

GaussianSymbol gaussian_symbol(std::int32_t v, float mu, float sigma, const SigmaTableCache& cache);

/// Either encodes or decodes coefficients with one code path: in encode mode
/// `value` is read and written to the stream; in decode mode it is replaced by
/// the decoded value.
class CoefficientCoder {
 public:
  static CoefficientCoder encoder();
  static CoefficientCoder decoder(std::span<const std::uint8_t> bytes);

  bool decoding() const { return decoder_ != nullptr; }

  /// Codes `value` against `table` whose symbols 0..size-2 map to values
  /// offset..offset+size-2 and whose last symbol is the escape.
  void code(const CdfTable& table, int offset, std::int32_t& value);
  void code_gaussian(float mu, float sigma, std::int32_t& value);

  std::vector<std::uint8_t> finish_encoding();
  void finish_decoding() const;

  /// Ideal code length of everything coded so far, escapes included.
  double ideal_bits() const { return ideal_bits_; }
  std::size_t escapes() const { return escapes_; }

 private:
  CoefficientCoder() = default;
  void code_symbol(const CdfTable& table, int offset, std::int64_t& value);
  void code_escape(std::int64_t lo, std::int64_t hi, std::int64_t& value);
  void code_bits(std::uint64_t& value, int count);

  double ideal_bits_ = 0.0;
  std::size_t escapes_ = 0;
  std::unique_ptr<RansEncoder> encoder_;
  std::unique_ptr<RansDecoder> decoder_;
};

/// Helpers over whole symbol lists (used by tests and benchmarks).
std::vector<std::uint8_t> encode_symbols(std::span<const int> symbols, std::span<const CdfTable* const> tables);
std::vector<int> decode_symbols(std::span<const std::uint8_t> bytes, std::span<const CdfTable* const> tables);

}  // namespace lwc
