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
#include <string>
#include <utility>
#include <vector>

#include "lwc/lifting.hpp"
#include "lwc/nn.hpp"
#include "lwc/rans.hpp"
#include "lwc/tensor.hpp"

namespace lwc {

enum class EntropyKind { kFem, kIscem, kIiscem, kIpiscem };

std::string to_string(EntropyKind kind);
/// Accepts "fem", "iscem", "iiscem", "ipiscem"; throws ConfigError otherwise.
EntropyKind parse_entropy_kind(const std::string& name);

/// How many coefficients of a subband can be decoded at once.
enum class DecodeParallelism { kFullyParallel, kFourWaves, kSequential };
DecodeParallelism decode_parallelism(EntropyKind kind);

/// Which probability model codes a band.
enum class BandModel { kFactorized, kInter, kInterIntra, kTopMasked, kPhase };
BandModel band_model(EntropyKind kind, int levels, int band);

/// Bands whose values the parameters of `band` depend on. A band listed as
/// its own dependency is conditioned on its causal part only.
std::vector<int> conditioning_bands(EntropyKind kind, int levels, int band);

/// A band, or one polyphase component of it (phase >= 0), coded as a unit.
struct CodingUnit {
  int band = 0;
  int phase = -1;
  /// Raster-sequential: each coefficient's parameters depend on earlier ones.
  bool sequential = false;
  /// Units (band, phase) that must be fully decoded first; phase -1 means the
  /// whole band.
  std::vector<std::pair<int, int>> depends_on;
};

/// Order in which the decoder reconstructs one color channel.
std::vector<CodingUnit> decode_schedule(EntropyKind kind, int levels);

inline constexpr double kLikelihoodFloor = 1.0 / 65536.0;
inline constexpr double kSigmaMin = 1e-3;
inline constexpr double kSigmaMax = 1e3;
/// Context networks see coefficients multiplied by this constant and emit
/// (mu, log sigma) in the same normalized units.
inline constexpr double kContextScale = 1.0 / 16.0;
/// Gaussian sigma of freshly built conditional models; the LL band starts wider.
inline constexpr double kInitialSigma = 4.0;
inline constexpr double kInitialSigmaLL = 256.0;
/// Spread of freshly built factorized densities (detail bands, LL band).
inline constexpr double kFactorizedInitScale = 10.0;
inline constexpr double kFactorizedInitScaleLL = 1000.0;

template <typename T>
struct GaussianParams {
  Tensor<T> mu;
  Tensor<T> sigma;
};

/// mu and sigma of orientation `o` from a raw map laid out as
/// (mu_0, s_0, mu_1, s_1, ...), in normalized units.
template <typename T>
GaussianParams<T> gaussian_params_from_raw(const Tensor<T>& raw, int o);

/// P(v) = Phi((v - mu + 1/2) / sigma) - Phi((v - mu - 1/2) / sigma), floored.
template <typename T>
Tensor<T> discretized_gaussian_likelihood(const Tensor<T>& y, const GaussianParams<T>& params);

/// -sum(log2 p).
template <typename T>
Tensor<T> rate_bits(const Tensor<T>& likelihood);

/// Monotone scalar CDF network with filters 1 -> 3 -> 3 -> 3 -> 1:
///   f(x) = sigmoid(H4 g3(H3 g2(H2 g1(H1 x + b1) + b2) + b3) + b4)
/// where H_k = softplus(raw_k) >= 0 and g_k(u) = u + tanh(a_k) * tanh(u).
template <typename T>
struct FactorizedDensity {
  static constexpr int kStages = 4;
  static constexpr std::array<int, 5> kFilters{1, 3, 3, 3, 1};

  std::array<Tensor<T>, kStages> matrices;    // raw, (out, in, 1, 1)
  std::array<Tensor<T>, kStages> biases;      // (1, out, 1, 1)
  std::array<Tensor<T>, kStages - 1> factors; // raw, (1, out, 1, 1)

  FactorizedDensity() = default;
  FactorizedDensity(double init_scale, Initializer& init);

  /// Logit of the CDF, elementwise on a single-channel tensor.
  Tensor<T> logits(const Tensor<T>& x) const;
  Tensor<T> likelihood(const Tensor<T>& y) const;
  void collect(const std::string& prefix, ParamList<T>& out) const;
};

/// Scalar evaluation of FactorizedDensity::logits in double.
double factorized_logit(const FactorizedDensity<float>& d, double x);

/// Coding table of a factorized density: symbol k is value offset + k, the
/// last symbol is the escape.
struct FactorizedTable {
  int offset = 0;
  CdfTable table;
};

inline constexpr double kFactorizedTailMass = 1e-9;
inline constexpr int kFactorizedMaxHalfWidth = 4096;
FactorizedTable build_factorized_table(const FactorizedDensity<float>& d);

/// ZOH(parent triple) -> Conv3x3(3 -> 243) -> tanh -> Conv3x3(243 -> 6).
template <typename T>
struct InterContextNet {
  static constexpr int kHidden = 243;
  Conv2d<T> c1, c2;

  InterContextNet() = default;
  explicit InterContextNet(Initializer& init);
  /// Raw (mu, log sigma) map at child resolution, 6 channels.
  Tensor<T> raw(const Tensor<T>& parent) const;
  void collect(const std::string& prefix, ParamList<T>& out) const;
};

/// Right branch: ZOH -> Conv3x3(3 -> 243) -> tanh -> Conv3x3(243 -> 243) -> tanh,
/// split into 81 channels per orientation. Left branch per orientation:
/// MaskA 5x5 (1 -> 81) -> tanh. Fusion per orientation: concat (162) ->
/// 1x1 162 -> tanh -> 1x1 162 -> tanh -> 1x1 2.
template <typename T>
struct InterIntraNet {
  static constexpr int kRight = 243;
  static constexpr int kLeft = 81;
  static constexpr int kFused = 162;
  static constexpr int kLeftKernel = 5;

  Conv2d<T> r1, r2;
  std::array<Conv2d<T>, 3> left;
  std::array<Conv2d<T>, 3> pen1, pen2, pen3;

  InterIntraNet() = default;
  explicit InterIntraNet(Initializer& init);
  Tensor<T> right_features(const Tensor<T>& parent) const;
  /// Raw 2-channel map for orientation `o` given right features and the child.
  Tensor<T> raw(int o, const Tensor<T>& right, const Tensor<T>& child) const;
  void collect(const std::string& prefix, ParamList<T>& out) const;
};

/// MaskA 5x5 (1 -> 81) -> tanh -> MaskB 3x3 (81 -> 81) -> tanh -> MaskB 1x1 (81 -> 2).
template <typename T>
struct TopLevelMaskedNet {
  static constexpr int kHidden = 81;
  Conv2d<T> a1, b1, b2;

  TopLevelMaskedNet() = default;
  TopLevelMaskedNet(Initializer& init, double initial_sigma);
  Tensor<T> raw(const Tensor<T>& band) const;
  void collect(const std::string& prefix, ParamList<T>& out) const;
};

/// Four dependency extractor networks. Net k sees the parent triple and the
/// already coded phases 0..k-1 of the child triple:
///   Conv3x3(3 + 3k -> 32) -> tanh -> Conv3x3(32 -> 32) -> tanh -> Conv3x3(32 -> 6).
template <typename T>
struct PhaseNets {
  static constexpr int kHidden = 32;
  std::array<Conv2d<T>, 4> c1, c2, c3;

  PhaseNets() = default;
  explicit PhaseNets(Initializer& init);
  Tensor<T> raw(int phase, const Tensor<T>& parent, const std::vector<Tensor<T>>& previous) const;
  void collect(const std::string& prefix, ParamList<T>& out) const;
};

/// Phase k in [0, 4): rows k / 2, columns k % 2 ([0,0], [0,1], [1,0], [1,1]).
template <typename T>
Tensor<T> phase_component(const Tensor<T>& band, int phase);
template <typename T>
Tensor<T> phase_merge(const std::array<Tensor<T>, 4>& phases);

/// The same-orientation triple (LH, HL, HH) of `level`, stacked as channels.
template <typename T>
Tensor<T> orientation_triple(const SubbandPyramid<T>& p, int level);

/// All entropy networks for one color channel.
template <typename T>
struct ChannelEntropyModel {
  EntropyKind kind = EntropyKind::kFem;
  int levels = 0;
  std::vector<FactorizedDensity<T>> factorized;  // indexed by band; top bands only unless FEM
  std::vector<InterContextNet<T>> inter;         // indexed by child level - 1
  std::vector<InterIntraNet<T>> inter_intra;     // indexed by child level - 1
  std::vector<TopLevelMaskedNet<T>> top;         // LL, LH_L, HL_L, HH_L
  std::vector<PhaseNets<T>> phases;              // indexed by child level - 1

  /// Likelihood maps, one per band in band order (noisy or integer input).
  std::vector<Tensor<T>> likelihoods(const SubbandPyramid<T>& y) const;
  void collect(const std::string& prefix, ParamList<T>& out) const;
};

template <typename T>
ChannelEntropyModel<T> make_channel_entropy_model(EntropyKind kind, int levels, std::uint64_t seed);

template <typename T>
GaussianParams<T> iscem_params(const ChannelEntropyModel<T>& m, const SubbandPyramid<T>& y, int band);
template <typename T>
GaussianParams<T> iiscem_params(const ChannelEntropyModel<T>& m, const SubbandPyramid<T>& y, int band);
template <typename T>
GaussianParams<T> toplevel_masked_params(const ChannelEntropyModel<T>& m, const SubbandPyramid<T>& y, int band);
/// Parameters of phase `phase` for all three orientations of `level`,
/// computed from the parent triple and phases < `phase`.
template <typename T>
std::array<GaussianParams<T>, 3> ipiscem_params(const ChannelEntropyModel<T>& m, const SubbandPyramid<T>& y,
                                                int level, int phase);

struct ScalarGaussian {
  float mu = 0.0f;
  float sigma = 1.0f;
};

/// Position-by-position evaluation of the top-level masked network in raster
/// order, used identically by encoder and decoder. Call at(i, j) for every
/// position in raster order, then set(i, j, value) once it is known.
class TopLevelCursor {
 public:
  TopLevelCursor(const TopLevelMaskedNet<float>& net, int height, int width);
  ScalarGaussian at(int i, int j);
  void set(int i, int j, float value);

 private:
  const TopLevelMaskedNet<float>& net_;
  int height_, width_;
  std::vector<float> values_;  // normalized coded values
  std::vector<float> hidden_;  // first-layer features, (h, w, 81)
};

/// Same for one orientation of an inter+intra conditioned band. `right` is
/// InterIntraNet::right_features of the decoded parent triple.
class InterIntraCursor {
 public:
  InterIntraCursor(const InterIntraNet<float>& net, int orientation, const Tensor<float>& right);
  ScalarGaussian at(int i, int j);
  void set(int i, int j, float value);

 private:
  const InterIntraNet<float>& net_;
  int o_;
  int height_, width_;
  const Tensor<float>& right_;
  std::vector<float> values_;
};

}  // namespace lwc
