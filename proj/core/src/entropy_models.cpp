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

#include "lwc/entropy_models.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "lwc/errors.hpp"

namespace lwc {

std::string to_string(EntropyKind kind) {
  switch (kind) {
    case EntropyKind::kFem: return "fem";
    case EntropyKind::kIscem: return "iscem";
    case EntropyKind::kIiscem: return "iiscem";
    case EntropyKind::kIpiscem: return "ipiscem";
  }
  return "?";
}

EntropyKind parse_entropy_kind(const std::string& name) {
  for (EntropyKind k : {EntropyKind::kFem, EntropyKind::kIscem, EntropyKind::kIiscem, EntropyKind::kIpiscem}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown entropy model '" + name + "' (expected fem, iscem, iiscem or ipiscem)");
}

DecodeParallelism decode_parallelism(EntropyKind kind) {
  switch (kind) {
    case EntropyKind::kIiscem: return DecodeParallelism::kSequential;
    case EntropyKind::kIpiscem: return DecodeParallelism::kFourWaves;
    default: return DecodeParallelism::kFullyParallel;
  }
}

BandModel band_model(EntropyKind kind, int levels, int band) {
  if (band < 0 || band >= band_count(levels)) throw ConfigError("band index out of range");
  const bool top = band < 4;
  switch (kind) {
    case EntropyKind::kFem: return BandModel::kFactorized;
    case EntropyKind::kIscem: return top ? BandModel::kFactorized : BandModel::kInter;
    case EntropyKind::kIiscem: return top ? BandModel::kTopMasked : BandModel::kInterIntra;
    case EntropyKind::kIpiscem: return top ? BandModel::kFactorized : BandModel::kPhase;
  }
  return BandModel::kFactorized;
}

std::vector<CodingUnit> decode_schedule(EntropyKind kind, int levels) {
  const Orientation orients[3] = {Orientation::kLH, Orientation::kHL, Orientation::kHH};
  std::vector<CodingUnit> units;
  const bool sequential = kind == EntropyKind::kIiscem;
  for (int b = 0; b < 4; ++b) units.push_back(CodingUnit{b, -1, sequential, {}});
  for (int level = levels - 1; level >= 1; --level) {
    std::vector<std::pair<int, int>> parents;
    for (Orientation o : orients) parents.emplace_back(band_index(levels, level + 1, o), -1);
    if (kind == EntropyKind::kFem) parents.clear();
    if (kind == EntropyKind::kIpiscem) {
      for (int phase = 0; phase < 4; ++phase) {
        for (Orientation o : orients) {
          CodingUnit u{band_index(levels, level, o), phase, false, parents};
          for (int earlier = 0; earlier < phase; ++earlier) {
            for (Orientation s : orients) u.depends_on.emplace_back(band_index(levels, level, s), earlier);
          }
          units.push_back(std::move(u));
        }
      }
    } else {
      for (Orientation o : orients) units.push_back(CodingUnit{band_index(levels, level, o), -1, sequential, parents});
    }
  }
  return units;
}

std::vector<int> conditioning_bands(EntropyKind kind, int levels, int band) {
  std::set<int> deps;
  for (const CodingUnit& u : decode_schedule(kind, levels)) {
    if (u.band != band) continue;
    for (const auto& [b, phase] : u.depends_on) deps.insert(b);
    if (u.sequential) deps.insert(band);
  }
  return {deps.begin(), deps.end()};
}

namespace {

template <typename T>
T context_scale() {
  return static_cast<T>(kContextScale);
}

// Zero weights and biases (0, log sigma0) in normalized units on every
// (mu, log sigma) output pair.
template <typename T>
void init_param_head(Conv2d<T>& head, double sigma0) {
  head.zero();
  auto b = head.bias.mutable_data();
  for (std::size_t c = 1; c < b.size(); c += 2) b[c] = static_cast<T>(std::log(sigma0 * kContextScale));
}

double softplus_d(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

double sigmoid_d(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Discretized likelihood of integer v under the factorized CDF, in double.
double factorized_mass(const FactorizedDensity<float>& d, double v) {
  const double lower = factorized_logit(d, v - 0.5);
  const double upper = factorized_logit(d, v + 0.5);
  const double sign = lower + upper > 0.0 ? -1.0 : 1.0;
  return std::abs(sigmoid_d(sign * upper) - sigmoid_d(sign * lower));
}

double solve_logit(const FactorizedDensity<float>& d, double target) {
  double lo = -double(1 << 22), hi = double(1 << 22);
  if (factorized_logit(d, lo) >= target) return lo;
  if (factorized_logit(d, hi) <= target) return hi;
  for (int it = 0; it < 100 && hi - lo > 1e-3; ++it) {
    const double mid = 0.5 * (lo + hi);
    (factorized_logit(d, mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

template <typename T>
Tensor<T> scaled(const Tensor<T>& x) {
  return scale(x, context_scale<T>());
}

}  // namespace

template <typename T>
GaussianParams<T> gaussian_params_from_raw(const Tensor<T>& raw, int o) {
  if (raw.shape().c < 2 * o + 2) throw ConfigError("raw parameter map has too few channels");
  const T inv = T(1) / context_scale<T>();
  const T lo = static_cast<T>(std::log(kSigmaMin * kContextScale));
  const T hi = static_cast<T>(std::log(kSigmaMax * kContextScale));
  GaussianParams<T> p;
  p.mu = scale(slice_channels(raw, 2 * o, 1), inv);
  p.sigma = scale(exp(clamp(slice_channels(raw, 2 * o + 1, 1), lo, hi)), inv);
  return p;
}

template <typename T>
Tensor<T> discretized_gaussian_likelihood(const Tensor<T>& y, const GaussianParams<T>& params) {
  const Tensor<T> neg = scale(abs(sub(y, params.mu)), T(-1));
  const Tensor<T> inv = reciprocal(params.sigma);
  const Tensor<T> upper = normal_cdf(mul(add_scalar(neg, T(0.5)), inv));
  const Tensor<T> lower = normal_cdf(mul(add_scalar(neg, T(-0.5)), inv));
  return lower_bound(sub(upper, lower), static_cast<T>(kLikelihoodFloor));
}

template <typename T>
Tensor<T> rate_bits(const Tensor<T>& likelihood) {
  return scale(sum(log2(likelihood)), T(-1));
}

template <typename T>
FactorizedDensity<T>::FactorizedDensity(double init_scale, Initializer& init) {
  const double s = std::pow(init_scale, 1.0 / kStages);
  for (int k = 0; k < kStages; ++k) {
    const int in = kFilters[k], out = kFilters[k + 1];
    const double value = std::log(std::expm1(1.0 / s / out));
    matrices[k] = Tensor<T>(Shape{out, in, 1, 1}, static_cast<T>(value));
    std::vector<T> b(out);
    for (auto& v : b) v = static_cast<T>(init.uniform(-0.5, 0.5));
    biases[k] = Tensor<T>(Shape{1, out, 1, 1}, std::move(b));
    if (k < kStages - 1) factors[k] = Tensor<T>(Shape{1, out, 1, 1});
  }
}

template <typename T>
Tensor<T> FactorizedDensity<T>::logits(const Tensor<T>& x) const {
  if (x.shape().c != 1) throw ConfigError("factorized density expects a single-channel tensor");
  Tensor<T> v = x;
  for (int k = 0; k < kStages; ++k) {
    v = conv2d(v, softplus(matrices[k]), biases[k], Conv2dGeometry{});
    if (k < kStages - 1) v = add(v, mul_channel(tanh(v), tanh(factors[k])));
  }
  return v;
}

template <typename T>
Tensor<T> FactorizedDensity<T>::likelihood(const Tensor<T>& y) const {
  const Tensor<T> lower = logits(add_scalar(y, T(-0.5)));
  const Tensor<T> upper = logits(add_scalar(y, T(0.5)));
  std::vector<T> sign(y.numel());
  for (std::size_t i = 0; i < sign.size(); ++i) sign[i] = lower.data()[i] + upper.data()[i] > T(0) ? T(-1) : T(1);
  const Tensor<T> s(y.shape(), std::move(sign));
  const Tensor<T> p = abs(sub(sigmoid(mul(upper, s)), sigmoid(mul(lower, s))));
  return lower_bound(p, static_cast<T>(kLikelihoodFloor));
}

template <typename T>
void FactorizedDensity<T>::collect(const std::string& prefix, ParamList<T>& out) const {
  for (int k = 0; k < kStages; ++k) {
    out.emplace_back(prefix + ".matrix" + std::to_string(k), matrices[k]);
    out.emplace_back(prefix + ".bias" + std::to_string(k), biases[k]);
    if (k < kStages - 1) out.emplace_back(prefix + ".factor" + std::to_string(k), factors[k]);
  }
}

double factorized_logit(const FactorizedDensity<float>& d, double x) {
  std::array<double, 3> v{x, 0, 0};
  int width = 1;
  for (int k = 0; k < FactorizedDensity<float>::kStages; ++k) {
    const int out = FactorizedDensity<float>::kFilters[k + 1];
    std::array<double, 3> next{};
    const auto m = d.matrices[k].data();
    const auto b = d.biases[k].data();
    for (int r = 0; r < out; ++r) {
      double acc = b[r];
      for (int c = 0; c < width; ++c) acc += softplus_d(m[r * width + c]) * v[c];
      next[r] = acc;
    }
    if (k < FactorizedDensity<float>::kStages - 1) {
      const auto a = d.factors[k].data();
      for (int r = 0; r < out; ++r) next[r] += std::tanh(static_cast<double>(a[r])) * std::tanh(next[r]);
    }
    v = next;
    width = out;
  }
  return v[0];
}

FactorizedTable build_factorized_table(const FactorizedDensity<float>& d) {
  const double tail = std::log(kFactorizedTailMass / (1.0 - kFactorizedTailMass));
  int lo = static_cast<int>(std::floor(solve_logit(d, tail)));
  int hi = static_cast<int>(std::ceil(solve_logit(d, -tail)));
  if (hi - lo > 2 * kFactorizedMaxHalfWidth) {
    const int median = static_cast<int>(std::lround(solve_logit(d, 0.0)));
    lo = std::max(lo, median - kFactorizedMaxHalfWidth);
    hi = std::min(hi, median + kFactorizedMaxHalfWidth);
  }
  std::vector<double> pmf(static_cast<std::size_t>(hi - lo + 2));
  for (int v = lo; v <= hi; ++v) pmf[v - lo] = factorized_mass(d, v);
  pmf.back() = sigmoid_d(factorized_logit(d, lo - 0.5)) + 1.0 - sigmoid_d(factorized_logit(d, hi + 0.5));
  return FactorizedTable{lo, build_cdf_table(pmf)};
}

template <typename T>
InterContextNet<T>::InterContextNet(Initializer& init)
    : c1(3, kHidden, 3, 3, init), c2(kHidden, 6, 3, 3, init) {
  init_param_head(c2, kInitialSigma);
}

template <typename T>
Tensor<T> InterContextNet<T>::raw(const Tensor<T>& parent) const {
  return c2(tanh(c1(zoh_upsample2x(scaled(parent)))));
}

template <typename T>
void InterContextNet<T>::collect(const std::string& prefix, ParamList<T>& out) const {
  c1.collect(prefix + ".c1", out);
  c2.collect(prefix + ".c2", out);
}

template <typename T>
InterIntraNet<T>::InterIntraNet(Initializer& init)
    : r1(3, kRight, 3, 3, init), r2(kRight, kRight, 3, 3, init) {
  for (int o = 0; o < 3; ++o) {
    left[o] = Conv2d<T>(1, kLeft, kLeftKernel, kLeftKernel, init, MaskType::kA);
    pen1[o] = Conv2d<T>(kFused, kFused, 1, 1, init);
    pen2[o] = Conv2d<T>(kFused, kFused, 1, 1, init);
    pen3[o] = Conv2d<T>(kFused, 2, 1, 1, init);
    init_param_head(pen3[o], kInitialSigma);
  }
}

template <typename T>
Tensor<T> InterIntraNet<T>::right_features(const Tensor<T>& parent) const {
  return tanh(r2(tanh(r1(zoh_upsample2x(scaled(parent))))));
}

template <typename T>
Tensor<T> InterIntraNet<T>::raw(int o, const Tensor<T>& right, const Tensor<T>& child) const {
  const Tensor<T> l = tanh(left[o](scaled(child)));
  const Tensor<T> fused = concat_channels<T>({l, slice_channels(right, kLeft * o, kLeft)});
  return pen3[o](tanh(pen2[o](tanh(pen1[o](fused)))));
}

template <typename T>
void InterIntraNet<T>::collect(const std::string& prefix, ParamList<T>& out) const {
  r1.collect(prefix + ".r1", out);
  r2.collect(prefix + ".r2", out);
  const char* names[3] = {"lh", "hl", "hh"};
  for (int o = 0; o < 3; ++o) {
    const std::string p = prefix + "." + names[o];
    left[o].collect(p + ".left", out);
    pen1[o].collect(p + ".pen1", out);
    pen2[o].collect(p + ".pen2", out);
    pen3[o].collect(p + ".pen3", out);
  }
}

template <typename T>
TopLevelMaskedNet<T>::TopLevelMaskedNet(Initializer& init, double initial_sigma)
    : a1(1, kHidden, 5, 5, init, MaskType::kA),
      b1(kHidden, kHidden, 3, 3, init, MaskType::kB),
      b2(kHidden, 2, 1, 1, init, MaskType::kB) {
  init_param_head(b2, initial_sigma);
}

template <typename T>
Tensor<T> TopLevelMaskedNet<T>::raw(const Tensor<T>& band) const {
  return b2(tanh(b1(tanh(a1(scaled(band))))));
}

template <typename T>
void TopLevelMaskedNet<T>::collect(const std::string& prefix, ParamList<T>& out) const {
  a1.collect(prefix + ".a1", out);
  b1.collect(prefix + ".b1", out);
  b2.collect(prefix + ".b2", out);
}

template <typename T>
PhaseNets<T>::PhaseNets(Initializer& init) {
  for (int k = 0; k < 4; ++k) {
    c1[k] = Conv2d<T>(3 + 3 * k, kHidden, 3, 3, init);
    c2[k] = Conv2d<T>(kHidden, kHidden, 3, 3, init);
    c3[k] = Conv2d<T>(kHidden, 6, 3, 3, init);
    init_param_head(c3[k], kInitialSigma);
  }
}

template <typename T>
Tensor<T> PhaseNets<T>::raw(int phase, const Tensor<T>& parent, const std::vector<Tensor<T>>& previous) const {
  if (phase < 0 || phase > 3 || static_cast<int>(previous.size()) != phase) {
    throw ConfigError("phase " + std::to_string(phase) + " needs exactly the " + std::to_string(phase) +
                      " earlier phases");
  }
  std::vector<Tensor<T>> inputs{scaled(parent)};
  for (const auto& p : previous) inputs.push_back(scaled(p));
  const Tensor<T> x = phase == 0 ? inputs[0] : concat_channels(inputs);
  return c3[phase](tanh(c2[phase](tanh(c1[phase](x)))));
}

template <typename T>
void PhaseNets<T>::collect(const std::string& prefix, ParamList<T>& out) const {
  for (int k = 0; k < 4; ++k) {
    const std::string p = prefix + ".net" + std::to_string(k);
    c1[k].collect(p + ".c1", out);
    c2[k].collect(p + ".c2", out);
    c3[k].collect(p + ".c3", out);
  }
}

template <typename T>
Tensor<T> phase_component(const Tensor<T>& band, int phase) {
  const Shape s = band.shape();
  if (s.h % 2 != 0 || s.w % 2 != 0) throw ConfigError("phase split needs even subband dimensions");
  std::vector<int> rows(s.h / 2), cols(s.w / 2);
  for (int i = 0; i < s.h / 2; ++i) rows[i] = 2 * i + phase / 2;
  for (int j = 0; j < s.w / 2; ++j) cols[j] = 2 * j + phase % 2;
  return gather2d(band, std::span<const int>(rows), std::span<const int>(cols));
}

template <typename T>
Tensor<T> phase_merge(const std::array<Tensor<T>, 4>& phases) {
  return interleave(interleave(phases[0], phases[1], Axis::kCols), interleave(phases[2], phases[3], Axis::kCols),
                    Axis::kRows);
}

template <typename T>
Tensor<T> orientation_triple(const SubbandPyramid<T>& p, int level) {
  const int lh = band_index(p.levels, level, Orientation::kLH);
  return concat_channels<T>({p.bands[lh], p.bands[lh + 1], p.bands[lh + 2]});
}

template <typename T>
std::vector<Tensor<T>> ChannelEntropyModel<T>::likelihoods(const SubbandPyramid<T>& y) const {
  if (y.levels != levels || static_cast<int>(y.bands.size()) != band_count(levels)) {
    throw ConfigError("entropy model built for " + std::to_string(levels) + " levels");
  }
  std::vector<Tensor<T>> out(y.bands.size());
  for (int b = 0; b < 4; ++b) {
    if (band_model(kind, levels, b) == BandModel::kFactorized) {
      out[b] = factorized[b].likelihood(y.bands[b]);
    } else {
      out[b] = discretized_gaussian_likelihood(y.bands[b], gaussian_params_from_raw(top[b].raw(y.bands[b]), 0));
    }
  }
  for (int level = levels - 1; level >= 1; --level) {
    const int lh = band_index(levels, level, Orientation::kLH);
    switch (kind) {
      case EntropyKind::kFem:
        for (int o = 0; o < 3; ++o) out[lh + o] = factorized[lh + o].likelihood(y.bands[lh + o]);
        break;
      case EntropyKind::kIscem: {
        const Tensor<T> raw = inter[level - 1].raw(orientation_triple(y, level + 1));
        for (int o = 0; o < 3; ++o) {
          out[lh + o] = discretized_gaussian_likelihood(y.bands[lh + o], gaussian_params_from_raw(raw, o));
        }
        break;
      }
      case EntropyKind::kIiscem: {
        const InterIntraNet<T>& net = inter_intra[level - 1];
        const Tensor<T> right = net.right_features(orientation_triple(y, level + 1));
        for (int o = 0; o < 3; ++o) {
          const Tensor<T> raw = net.raw(o, right, y.bands[lh + o]);
          out[lh + o] = discretized_gaussian_likelihood(y.bands[lh + o], gaussian_params_from_raw(raw, 0));
        }
        break;
      }
      case EntropyKind::kIpiscem: {
        const Tensor<T> parent = orientation_triple(y, level + 1);
        std::array<std::array<Tensor<T>, 4>, 3> comps, lik;
        for (int o = 0; o < 3; ++o)
          for (int k = 0; k < 4; ++k) comps[o][k] = phase_component(y.bands[lh + o], k);
        std::vector<Tensor<T>> previous;
        for (int k = 0; k < 4; ++k) {
          const Tensor<T> raw = phases[level - 1].raw(k, parent, previous);
          for (int o = 0; o < 3; ++o) {
            lik[o][k] = discretized_gaussian_likelihood(comps[o][k], gaussian_params_from_raw(raw, o));
          }
          previous.push_back(concat_channels<T>({comps[0][k], comps[1][k], comps[2][k]}));
        }
        for (int o = 0; o < 3; ++o) out[lh + o] = phase_merge(lik[o]);
        break;
      }
    }
  }
  return out;
}

template <typename T>
void ChannelEntropyModel<T>::collect(const std::string& prefix, ParamList<T>& out) const {
  for (std::size_t b = 0; b < factorized.size(); ++b) {
    factorized[b].collect(prefix + ".fem." + band_name(levels, static_cast<int>(b)), out);
  }
  for (std::size_t b = 0; b < top.size(); ++b) {
    top[b].collect(prefix + ".top." + band_name(levels, static_cast<int>(b)), out);
  }
  for (std::size_t l = 0; l < inter.size(); ++l) inter[l].collect(prefix + ".inter.L" + std::to_string(l + 1), out);
  for (std::size_t l = 0; l < inter_intra.size(); ++l) {
    inter_intra[l].collect(prefix + ".interintra.L" + std::to_string(l + 1), out);
  }
  for (std::size_t l = 0; l < phases.size(); ++l) phases[l].collect(prefix + ".phase.L" + std::to_string(l + 1), out);
}

template <typename T>
ChannelEntropyModel<T> make_channel_entropy_model(EntropyKind kind, int levels, std::uint64_t seed) {
  if (levels < 2 || levels > kMaxLevels) throw ConfigError("entropy models need 2..6 levels");
  Initializer init(seed);
  ChannelEntropyModel<T> m;
  m.kind = kind;
  m.levels = levels;
  const int fem_bands = kind == EntropyKind::kFem ? band_count(levels) : kind == EntropyKind::kIiscem ? 0 : 4;
  for (int b = 0; b < fem_bands; ++b) {
    m.factorized.emplace_back(b == 0 ? kFactorizedInitScaleLL : kFactorizedInitScale, init);
  }
  for (int level = 1; level < levels; ++level) {
    if (kind == EntropyKind::kIscem) m.inter.emplace_back(init);
    if (kind == EntropyKind::kIiscem) m.inter_intra.emplace_back(init);
    if (kind == EntropyKind::kIpiscem) m.phases.emplace_back(init);
  }
  if (kind == EntropyKind::kIiscem) {
    for (int b = 0; b < 4; ++b) m.top.emplace_back(init, b == 0 ? kInitialSigmaLL : kInitialSigma);
  }
  return m;
}

namespace {

template <typename T>
void require_model(const ChannelEntropyModel<T>& m, int band, BandModel expected, const char* what) {
  if (band_model(m.kind, m.levels, band) != expected) {
    throw ConfigError(std::string(what) + ": band " + band_name(m.levels, band) + " is not coded by this model");
  }
}

}  // namespace

template <typename T>
GaussianParams<T> iscem_params(const ChannelEntropyModel<T>& m, const SubbandPyramid<T>& y, int band) {
  require_model(m, band, BandModel::kInter, "iscem_params");
  const int level = band_level(m.levels, band);
  const Tensor<T> raw = m.inter[level - 1].raw(orientation_triple(y, level + 1));
  return gaussian_params_from_raw(raw, static_cast<int>(band_orientation(m.levels, band)));
}

template <typename T>
GaussianParams<T> iiscem_params(const ChannelEntropyModel<T>& m, const SubbandPyramid<T>& y, int band) {
  require_model(m, band, BandModel::kInterIntra, "iiscem_params");
  const int level = band_level(m.levels, band);
  const InterIntraNet<T>& net = m.inter_intra[level - 1];
  const Tensor<T> right = net.right_features(orientation_triple(y, level + 1));
  return gaussian_params_from_raw(net.raw(static_cast<int>(band_orientation(m.levels, band)), right, y.bands[band]),
                                  0);
}

template <typename T>
GaussianParams<T> toplevel_masked_params(const ChannelEntropyModel<T>& m, const SubbandPyramid<T>& y, int band) {
  require_model(m, band, BandModel::kTopMasked, "toplevel_masked_params");
  return gaussian_params_from_raw(m.top[band].raw(y.bands[band]), 0);
}

template <typename T>
std::array<GaussianParams<T>, 3> ipiscem_params(const ChannelEntropyModel<T>& m, const SubbandPyramid<T>& y,
                                                int level, int phase) {
  if (m.kind != EntropyKind::kIpiscem || level < 1 || level >= m.levels) {
    throw ConfigError("ipiscem_params: level " + std::to_string(level) + " is not phase coded");
  }
  if (phase < 0 || phase > 3) throw ConfigError("ipiscem_params: phase must be in 0..3");
  const int lh = band_index(m.levels, level, Orientation::kLH);
  std::vector<Tensor<T>> previous;
  for (int k = 0; k < phase; ++k) {
    previous.push_back(concat_channels<T>({phase_component(y.bands[lh], k), phase_component(y.bands[lh + 1], k),
                                           phase_component(y.bands[lh + 2], k)}));
  }
  const Tensor<T> raw = m.phases[level - 1].raw(phase, orientation_triple(y, level + 1), previous);
  return {gaussian_params_from_raw(raw, 0), gaussian_params_from_raw(raw, 1), gaussian_params_from_raw(raw, 2)};
}

namespace {

ScalarGaussian scalar_params(float mu_n, float log_sigma_n) {
  const float s = static_cast<float>(kContextScale);
  const float lo = static_cast<float>(std::log(kSigmaMin * kContextScale));
  const float hi = static_cast<float>(std::log(kSigmaMax * kContextScale));
  return ScalarGaussian{mu_n * (1.0f / s), std::exp(std::clamp(log_sigma_n, lo, hi)) * (1.0f / s)};
}

// Causal taps of an odd k x k mask, as (row offset, column offset).
std::vector<std::pair<int, int>> causal_taps(int k, MaskType type) {
  const auto mask = causal_mask(k, k, type);
  std::vector<std::pair<int, int>> taps;
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b)
      if (mask[a * k + b]) taps.emplace_back(a, b);
  return taps;
}

}  // namespace

TopLevelCursor::TopLevelCursor(const TopLevelMaskedNet<float>& net, int height, int width)
    : net_(net),
      height_(height),
      width_(width),
      values_(static_cast<std::size_t>(height) * width, 0.0f),
      hidden_(static_cast<std::size_t>(height) * width * TopLevelMaskedNet<float>::kHidden, 0.0f) {}

void TopLevelCursor::set(int i, int j, float value) {
  values_[static_cast<std::size_t>(i) * width_ + j] = value * static_cast<float>(kContextScale);
}

ScalarGaussian TopLevelCursor::at(int i, int j) {
  constexpr int hidden = TopLevelMaskedNet<float>::kHidden;
  static const auto taps_a = causal_taps(5, MaskType::kA);
  static const auto taps_b = causal_taps(3, MaskType::kB);
  const Shape sa = net_.a1.weight.shape();
  const auto wa = net_.a1.weight.data();
  const auto ba = net_.a1.bias.data();
  float* h1 = &hidden_[(static_cast<std::size_t>(i) * width_ + j) * hidden];
  for (int c = 0; c < hidden; ++c) {
    float acc = ba[c];
    for (const auto& [a, b] : taps_a) {
      const int ii = i + a - 2, jj = j + b - 2;
      if (ii < 0 || jj < 0 || jj >= width_) continue;
      acc += wa[sa.index(c, 0, a, b)] * values_[static_cast<std::size_t>(ii) * width_ + jj];
    }
    h1[c] = std::tanh(acc);
  }
  const Shape sb = net_.b1.weight.shape();
  const auto wb = net_.b1.weight.data();
  const auto bb = net_.b1.bias.data();
  std::array<float, hidden> h2{};
  for (int c = 0; c < hidden; ++c) {
    float acc = bb[c];
    for (const auto& [a, b] : taps_b) {
      const int ii = i + a - 1, jj = j + b - 1;
      if (ii < 0 || jj < 0 || jj >= width_) continue;
      const float* src = &hidden_[(static_cast<std::size_t>(ii) * width_ + jj) * hidden];
      for (int k = 0; k < hidden; ++k) acc += wb[sb.index(c, k, a, b)] * src[k];
    }
    h2[c] = std::tanh(acc);
  }
  const auto w2 = net_.b2.weight.data();
  const auto b2 = net_.b2.bias.data();
  float out[2] = {b2[0], b2[1]};
  for (int r = 0; r < 2; ++r)
    for (int k = 0; k < hidden; ++k) out[r] += w2[r * hidden + k] * h2[k];
  return scalar_params(out[0], out[1]);
}

InterIntraCursor::InterIntraCursor(const InterIntraNet<float>& net, int orientation, const Tensor<float>& right)
    : net_(net),
      o_(orientation),
      height_(right.shape().h),
      width_(right.shape().w),
      right_(right),
      values_(static_cast<std::size_t>(height_) * width_, 0.0f) {
  if (right.shape().n != 1 || right.shape().c != InterIntraNet<float>::kRight) {
    throw ConfigError("inter-intra cursor expects a single 243-channel feature map");
  }
}

void InterIntraCursor::set(int i, int j, float value) {
  values_[static_cast<std::size_t>(i) * width_ + j] = value * static_cast<float>(kContextScale);
}

ScalarGaussian InterIntraCursor::at(int i, int j) {
  constexpr int nl = InterIntraNet<float>::kLeft;
  constexpr int nf = InterIntraNet<float>::kFused;
  constexpr int k = InterIntraNet<float>::kLeftKernel;
  static const auto taps = causal_taps(k, MaskType::kA);
  std::array<float, nf> f{};
  const Conv2d<float>& left = net_.left[o_];
  const Shape sl = left.weight.shape();
  const auto wl = left.weight.data();
  const auto bl = left.bias.data();
  for (int c = 0; c < nl; ++c) {
    float acc = bl[c];
    for (const auto& [a, b] : taps) {
      const int ii = i + a - k / 2, jj = j + b - k / 2;
      if (ii < 0 || jj < 0 || jj >= width_) continue;
      acc += wl[sl.index(c, 0, a, b)] * values_[static_cast<std::size_t>(ii) * width_ + jj];
    }
    f[c] = std::tanh(acc);
  }
  for (int c = 0; c < nl; ++c) f[nl + c] = right_.at(0, nl * o_ + c, i, j);
  auto dense = [](const Conv2d<float>& layer, const float* in, float* out, int n_in, int n_out, bool act) {
    const auto w = layer.weight.data();
    const auto b = layer.bias.data();
    for (int r = 0; r < n_out; ++r) {
      float acc = b[r];
      const float* row = &w[static_cast<std::size_t>(r) * n_in];
      for (int c = 0; c < n_in; ++c) acc += row[c] * in[c];
      out[r] = act ? std::tanh(acc) : acc;
    }
  };
  std::array<float, nf> h1{}, h2{};
  float out[2];
  dense(net_.pen1[o_], f.data(), h1.data(), nf, nf, true);
  dense(net_.pen2[o_], h1.data(), h2.data(), nf, nf, true);
  dense(net_.pen3[o_], h2.data(), out, nf, 2, false);
  return scalar_params(out[0], out[1]);
}

#define LWC_INSTANTIATE(T)                                                                                   \
  template GaussianParams<T> gaussian_params_from_raw(const Tensor<T>&, int);                                \
  template Tensor<T> discretized_gaussian_likelihood(const Tensor<T>&, const GaussianParams<T>&);            \
  template Tensor<T> rate_bits(const Tensor<T>&);                                                            \
  template struct FactorizedDensity<T>;                                                                      \
  template struct InterContextNet<T>;                                                                        \
  template struct InterIntraNet<T>;                                                                          \
  template struct TopLevelMaskedNet<T>;                                                                      \
  template struct PhaseNets<T>;                                                                              \
  template Tensor<T> phase_component(const Tensor<T>&, int);                                                 \
  template Tensor<T> phase_merge(const std::array<Tensor<T>, 4>&);                                           \
  template Tensor<T> orientation_triple(const SubbandPyramid<T>&, int);                                      \
  template struct ChannelEntropyModel<T>;                                                                    \
  template ChannelEntropyModel<T> make_channel_entropy_model<T>(EntropyKind, int, std::uint64_t);            \
  template GaussianParams<T> iscem_params(const ChannelEntropyModel<T>&, const SubbandPyramid<T>&, int);     \
  template GaussianParams<T> iiscem_params(const ChannelEntropyModel<T>&, const SubbandPyramid<T>&, int);    \
  template GaussianParams<T> toplevel_masked_params(const ChannelEntropyModel<T>&, const SubbandPyramid<T>&, \
                                                    int);                                                    \
  template std::array<GaussianParams<T>, 3> ipiscem_params(const ChannelEntropyModel<T>&,                    \
                                                           const SubbandPyramid<T>&, int, int);

LWC_INSTANTIATE(float)
LWC_INSTANTIATE(double)

#undef LWC_INSTANTIATE

}  // namespace lwc
