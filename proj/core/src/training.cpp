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

#include "lwc/training.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "lwc/errors.hpp"

namespace lwc {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename N>
N parse_number(const std::string& key, const std::string& value) {
  N out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError("'" + key + "' expects a number, got '" + value + "'");
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string csv_double(double v, int digits) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

template <typename T>
double plane_mse(const std::array<Tensor<T>, 3>& a, const std::array<Tensor<T>, 3>& b) {
  double se = 0.0;
  std::size_t n = 0;
  for (int c = 0; c < 3; ++c) {
    const auto x = a[c].data();
    const auto y = b[c].data();
    for (std::size_t k = 0; k < x.size(); ++k) se += (static_cast<double>(x[k]) - y[k]) * (static_cast<double>(x[k]) - y[k]);
    n += x.size();
  }
  return se / n;
}

}  // namespace

bool TrainConfig::frozen(const std::string& parameter) const {
  return std::any_of(freeze.begin(), freeze.end(),
                     [&](const std::string& prefix) { return parameter.rfind(prefix, 0) == 0; });
}

void TrainConfig::validate() const {
  if (codec.levels < 2 || codec.levels > kMaxLevels) throw ConfigError("levels must be in 2..6");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be finite and >= 0");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (steps < 0) throw ConfigError("steps must be >= 0");
  if (window < 1) throw ConfigError("window must be >= 1");
  if (plateau_patience < 1) throw ConfigError("plateau_patience must be >= 1");
  if (!(plateau_factor > 0.0 && plateau_factor < 1.0)) throw ConfigError("plateau_factor must be in (0, 1)");
  if (!(min_learning_rate >= 0.0)) throw ConfigError("min_learning_rate must be >= 0");
  if (checkpoint_every < 0) throw ConfigError("checkpoint_every must be >= 0");
  const int m = 1 << codec.levels;
  if (patch_size < m || patch_size % m != 0) {
    throw ConfigError("patch_size " + std::to_string(patch_size) + " is not a positive multiple of " +
                      std::to_string(m));
  }
}

TrainConfig parse_train_config(std::string_view text) {
  TrainConfig c;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = line;
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '"') quoted = !quoted;
      if (s[i] == '#' && !quoted) {
        s.resize(i);
        break;
      }
    }
    s = trim(s);
    if (s.empty() || s.front() == '[') continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(std::string_view(s).substr(0, eq));
    std::string value = trim(std::string_view(s).substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);

    if (key == "filters") {
      c.codec.filters = parse_filter_kind(value);
    } else if (key == "entropy") {
      c.codec.entropy = parse_entropy_kind(value);
    } else if (key == "levels") {
      c.codec.levels = parse_number<int>(key, value);
    } else if (key == "lambda") {
      c.lambda = parse_number<double>(key, value);
    } else if (key == "learning_rate") {
      c.learning_rate = parse_number<double>(key, value);
    } else if (key == "batch_size") {
      c.batch_size = parse_number<int>(key, value);
    } else if (key == "patch_size") {
      c.patch_size = parse_number<int>(key, value);
    } else if (key == "steps") {
      c.steps = parse_number<int>(key, value);
    } else if (key == "seed") {
      c.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "window") {
      c.window = parse_number<int>(key, value);
    } else if (key == "plateau_patience") {
      c.plateau_patience = parse_number<int>(key, value);
    } else if (key == "plateau_factor") {
      c.plateau_factor = parse_number<double>(key, value);
    } else if (key == "min_learning_rate") {
      c.min_learning_rate = parse_number<double>(key, value);
    } else if (key == "checkpoint_every") {
      c.checkpoint_every = parse_number<int>(key, value);
    } else if (key == "corpus") {
      c.corpus = value;
    } else if (key == "freeze") {
      c.freeze.clear();
      std::istringstream items(value);
      for (std::string item; std::getline(items, item, ',');) {
        item = trim(item);
        if (!item.empty()) c.freeze.push_back(item);
      }
    } else {
      throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  TrainConfig c = parse_train_config(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  if (!c.corpus.empty() && c.corpus.is_relative()) c.corpus = path.parent_path() / c.corpus;
  return c;
}

std::string format_train_config(const TrainConfig& c) {
  std::ostringstream os;
  os << "filters = \"" << to_string(c.codec.filters) << "\"\n";
  os << "entropy = \"" << to_string(c.codec.entropy) << "\"\n";
  os << "levels = " << c.codec.levels << "\n";
  os << "lambda = " << format_double(c.lambda) << "\n";
  os << "learning_rate = " << format_double(c.learning_rate) << "\n";
  os << "batch_size = " << c.batch_size << "\n";
  os << "patch_size = " << c.patch_size << "\n";
  os << "steps = " << c.steps << "\n";
  os << "seed = " << c.seed << "\n";
  os << "window = " << c.window << "\n";
  os << "plateau_patience = " << c.plateau_patience << "\n";
  os << "plateau_factor = " << format_double(c.plateau_factor) << "\n";
  os << "min_learning_rate = " << format_double(c.min_learning_rate) << "\n";
  os << "checkpoint_every = " << c.checkpoint_every << "\n";
  os << "corpus = \"" << c.corpus.generic_string() << "\"\n";
  if (!c.freeze.empty()) {
    os << "freeze = \"";
    for (std::size_t k = 0; k < c.freeze.size(); ++k) os << (k ? ", " : "") << c.freeze[k];
    os << "\"\n";
  }
  return os.str();
}

template <typename T>
Tensor<T> rd_loss(const std::array<Tensor<T>, 3>& original, const std::array<Tensor<T>, 3>& reconstructed,
                  const Tensor<T>& rate_bits, double lambda) {
  const Shape& s = original[0].shape();
  const T pixels = static_cast<T>(s.n) * s.h * s.w;
  Tensor<T> se = sum(square(sub(reconstructed[0], original[0])));
  for (int c = 1; c < 3; ++c) se = add(se, sum(square(sub(reconstructed[c], original[c]))));
  const Tensor<T> distortion = scale(se, static_cast<T>(lambda) / (3 * pixels));
  return add(scale(rate_bits, T(1) / pixels), distortion);
}

std::vector<NamedImage> load_image_folder(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> paths;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && is_image_path(e.path())) paths.push_back(e.path());
  }
  std::sort(paths.begin(), paths.end());
  std::vector<NamedImage> out;
  for (const auto& p : paths) out.push_back({p.stem().string(), read_image(p)});
  if (out.empty()) throw IoError("no readable images in " + dir.string());
  return out;
}

PatchSampler::PatchSampler(std::vector<RgbImage> images, int patch_size, std::uint64_t seed)
    : images_(std::move(images)), patch_(patch_size), rng_(seed) {
  if (images_.empty()) throw ConfigError("patch sampler needs at least one image");
  for (const auto& img : images_) {
    if (img.width < patch_ || img.height < patch_) {
      throw ConfigError("patch size " + std::to_string(patch_) + " exceeds a " + std::to_string(img.width) + "x" +
                        std::to_string(img.height) + " corpus image");
    }
  }
}

PatchSampler::Draw PatchSampler::next_draw() {
  Draw d;
  d.image = std::uniform_int_distribution<int>(0, static_cast<int>(images_.size()) - 1)(rng_);
  const RgbImage& img = images_[d.image];
  d.top = std::uniform_int_distribution<int>(0, img.height - patch_)(rng_);
  d.left = std::uniform_int_distribution<int>(0, img.width - patch_)(rng_);
  return d;
}

template <typename T>
std::array<Tensor<T>, 3> PatchSampler::next_batch(int n) {
  std::array<Tensor<T>, 3> out;
  for (auto& p : out) p = Tensor<T>(Shape{n, 1, patch_, patch_});
  const std::size_t plane = static_cast<std::size_t>(patch_) * patch_;
  for (int k = 0; k < n; ++k) {
    const Draw d = next_draw();
    const RgbImage& img = images_[d.image];
    for (int c = 0; c < 3; ++c) {
      auto dst = out[c].mutable_data().subspan(k * plane, plane);
      for (int i = 0; i < patch_; ++i)
        for (int j = 0; j < patch_; ++j) dst[i * patch_ + j] = static_cast<T>(img.at(d.top + i, d.left + j, c));
    }
  }
  return out;
}

PlateauScheduler::PlateauScheduler(double learning_rate, double factor, int patience, double min_learning_rate)
    : lr_(learning_rate),
      factor_(factor),
      patience_(patience),
      min_lr_(min_learning_rate),
      best_(std::numeric_limits<double>::infinity()) {}

bool PlateauScheduler::observe(double value) {
  if (value < best_ * (1.0 - 1e-4) || !std::isfinite(best_)) {
    best_ = value;
    bad_ = 0;
    return false;
  }
  if (++bad_ < patience_) return false;
  bad_ = 0;
  const double next = std::max(lr_ * factor_, min_lr_);
  const bool changed = next < lr_;
  lr_ = next;
  return changed;
}

namespace {

void write_checkpoint(const std::filesystem::path& path, const CodecSystem<float>& system, const TrainConfig& config,
                      int step) {
  Checkpoint ckpt = to_checkpoint(system);
  ckpt.meta["lambda"] = format_double(config.lambda);
  ckpt.meta["steps"] = std::to_string(step);
  save_checkpoint(path, ckpt);
}

}  // namespace

TrainResult train(const TrainConfig& config, CodecSystem<float> system, PatchSampler& sampler,
                  const TrainOutput& output) {
  config.validate();
  if (!(system.config == config.codec)) throw ConfigError("system does not match the training configuration");
  if (sampler.patch_size() != config.patch_size) throw ConfigError("sampler patch size differs from the config");

  ParamList<float> params;
  for (auto& p : system.parameters()) {
    if (!config.frozen(p.first)) params.push_back(p);
  }
  if (params.empty()) throw ConfigError("every parameter is frozen");
  set_requires_grad(params, true);
  AdamOptions adam;
  adam.learning_rate = config.learning_rate;
  AdamState<float> state = make_adam_state(params, adam);
  PlateauScheduler scheduler(config.learning_rate, config.plateau_factor, config.plateau_patience,
                             config.min_learning_rate);
  std::mt19937_64 noise_rng(config.seed ^ 0x6e6f697365ull);

  std::ofstream csv;
  if (!output.directory.empty()) {
    std::filesystem::create_directories(output.directory);
    csv.open(output.directory / "loss.csv");
    if (!csv) throw IoError("cannot write " + (output.directory / "loss.csv").string());
    csv << "step,loss,bpp,mse,learning_rate\n";
  }

  TrainResult result;
  double window_sum = 0.0;
  int window_count = 0;
  for (int step = 0; step < config.steps; ++step) {
    const auto batch = sampler.next_batch<float>(config.batch_size);
    const ForwardPass<float> fwd = run_system(system, batch, QuantizerMode::kNoise, &noise_rng);
    const Tensor<float> loss = rd_loss(batch, fwd.rgb, fwd.rate_bits, config.lambda);
    const double pixels = static_cast<double>(config.batch_size) * config.patch_size * config.patch_size;

    TrainStep rec;
    rec.step = step;
    rec.loss = loss.item();
    rec.bpp = fwd.rate_bits.item() / pixels;
    rec.mse = plane_mse(batch, fwd.rgb);
    rec.learning_rate = state.options.learning_rate;
    if (!std::isfinite(rec.loss)) throw ConfigError("training diverged at step " + std::to_string(step));

    backward(loss);
    adam_step(params, state);
    zero_grads(params);

    result.trace.push_back(rec);
    if (csv) {
      csv << rec.step << "," << format_double(rec.loss) << "," << format_double(rec.bpp) << ","
          << format_double(rec.mse) << "," << format_double(rec.learning_rate) << "\n";
    }

    window_sum += rec.loss;
    if (++window_count == config.window) {
      const double smoothed = window_sum / window_count;
      if (scheduler.observe(smoothed)) state.options.learning_rate = scheduler.learning_rate();
      if (output.log) {
        *output.log << "step " << step + 1 << "  loss " << format_double(smoothed) << "  lr "
                    << format_double(state.options.learning_rate) << "\n";
      }
      window_sum = 0.0;
      window_count = 0;
    }
    if (!output.directory.empty() && config.checkpoint_every > 0 && (step + 1) % config.checkpoint_every == 0) {
      write_checkpoint(output.directory / ("step_" + std::to_string(step + 1) + ".lwck"), system, config, step + 1);
    }
  }

  set_requires_grad(params, false);
  result.checkpoint = to_checkpoint(system);
  result.checkpoint.meta["lambda"] = format_double(config.lambda);
  result.checkpoint.meta["steps"] = std::to_string(config.steps);
  if (!output.directory.empty()) {
    save_checkpoint(output.directory / "final.lwck", result.checkpoint);
    std::ofstream(output.directory / "train.toml") << format_train_config(config);
  }
  return result;
}

TrainResult train(const TrainConfig& config, const TrainOutput& output) {
  config.validate();
  if (config.corpus.empty()) throw ConfigError("training config has no corpus");
  std::vector<RgbImage> images;
  for (auto& n : load_image_folder(config.corpus)) images.push_back(std::move(n.image));
  PatchSampler sampler(std::move(images), config.patch_size, config.seed);
  return train(config, make_system<float>(config.codec, config.seed), sampler, output);
}

double heldout_rd_loss(const CodecSystem<float>& system, const std::vector<RgbImage>& images, double lambda) {
  if (images.empty()) throw ConfigError("no held-out images");
  NoGradGuard no_grad;
  const int m = 1 << system.config.levels;
  double total = 0.0;
  for (const RgbImage& img : images) {
    const auto planes = rgb_planes(pad_to_multiple(img, m));
    const ForwardPass<float> fwd = run_system(system, planes, QuantizerMode::kRound, nullptr);
    total += rd_loss(planes, fwd.rgb, fwd.rate_bits, lambda).item();
  }
  return total / images.size();
}

std::vector<RdPoint> evaluate(const std::vector<NamedImage>& images, const Codec& codec) {
  std::vector<RdPoint> out(images.size());
  std::vector<std::exception_ptr> errors(images.size());
  std::atomic<std::size_t> next{0};
  const int bands = band_count(codec.config().levels);
  auto worker = [&] {
    for (std::size_t k = next++; k < images.size(); k = next++) {
      try {
        const RgbImage& img = images[k].image;
        const EncodeResult enc = codec.encode(img);
        const DecodeResult dec = codec.decode(enc.bytes);
        RdPoint& p = out[k];
        p.image = images[k].name;
        p.bpp = enc.bpp;
        p.psnr_db = psnr(img, dec.image);
        p.band_bits.assign(bands, 0.0);
        for (std::size_t c = 0; c < enc.stream.chunks.size(); ++c) {
          p.band_bits[c % bands] += 8.0 * enc.stream.chunks[c].size();
        }
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const unsigned threads =
      std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), static_cast<unsigned>(images.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

void write_eval_csv(std::ostream& os, const std::vector<RdPoint>& points, int levels) {
  const int bands = band_count(levels);
  os << "image,bpp,psnr_db";
  for (int b = 0; b < bands; ++b) os << ",bits_" << band_name(levels, b);
  os << "\n";
  std::vector<double> mean(bands + 2, 0.0);
  for (const RdPoint& p : points) {
    os << p.image << "," << csv_double(p.bpp, 6) << "," << csv_double(p.psnr_db, 4);
    mean[0] += p.bpp;
    mean[1] += p.psnr_db;
    for (int b = 0; b < bands; ++b) {
      os << "," << csv_double(p.band_bits[b], 0);
      mean[b + 2] += p.band_bits[b];
    }
    os << "\n";
  }
  if (points.empty()) return;
  for (double& v : mean) v /= points.size();
  os << "mean," << csv_double(mean[0], 6) << "," << csv_double(mean[1], 4);
  for (int b = 0; b < bands; ++b) os << "," << csv_double(mean[b + 2], 1);
  os << "\n";
}

std::vector<RdCurvePoint> rd_curve(const std::filesystem::path& checkpoints, const std::vector<NamedImage>& images) {
  if (!std::filesystem::is_directory(checkpoints)) throw IoError("not a directory: " + checkpoints.string());
  std::vector<std::filesystem::path> paths;
  for (const auto& e : std::filesystem::directory_iterator(checkpoints)) {
    if (e.is_regular_file() && e.path().extension() == ".lwck") paths.push_back(e.path());
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) throw IoError("no .lwck checkpoints in " + checkpoints.string());

  std::vector<RdCurvePoint> out;
  for (const auto& path : paths) {
    const Checkpoint ckpt = load_checkpoint(path);
    const Codec codec = Codec::from_checkpoint(ckpt);
    const auto points = evaluate(images, codec);
    RdCurvePoint r;
    r.checkpoint = path.filename().string();
    r.config = to_string(codec.config());
    r.lambda = std::numeric_limits<double>::quiet_NaN();
    if (auto it = ckpt.meta.find("lambda"); it != ckpt.meta.end()) r.lambda = std::strtod(it->second.c_str(), nullptr);
    for (const auto& p : points) {
      r.bpp += p.bpp / points.size();
      r.psnr_db += p.psnr_db / points.size();
    }
    out.push_back(r);
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.bpp < b.bpp; });
  return out;
}

void write_rdcurve_csv(std::ostream& os, const std::vector<RdCurvePoint>& points) {
  os << "checkpoint,config,lambda,bpp,psnr_db\n";
  for (const auto& p : points) {
    os << p.checkpoint << "," << p.config << "," << (std::isnan(p.lambda) ? std::string() : format_double(p.lambda))
       << "," << csv_double(p.bpp, 6) << "," << csv_double(p.psnr_db, 4) << "\n";
  }
}

template Tensor<float> rd_loss<float>(const std::array<Tensor<float>, 3>&, const std::array<Tensor<float>, 3>&,
                                      const Tensor<float>&, double);
template Tensor<double> rd_loss<double>(const std::array<Tensor<double>, 3>&, const std::array<Tensor<double>, 3>&,
                                        const Tensor<double>&, double);
template std::array<Tensor<float>, 3> PatchSampler::next_batch<float>(int);
template std::array<Tensor<double>, 3> PatchSampler::next_batch<double>(int);

}  // namespace lwc
