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
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "lwc/codec.hpp"

namespace lwc {

/// Training run settings. Text form is one `key = value` per line; `#` starts
/// a comment, strings may be quoted and `[section]` lines are ignored.
///
///   filters, entropy, levels, lambda, learning_rate, batch_size, patch_size,
///   steps, seed, window, plateau_patience, plateau_factor, min_learning_rate,
///   checkpoint_every, corpus, freeze
///
/// `freeze` is a comma-separated list of parameter name prefixes (for example
/// "dwt, scale") that keep their values during training.
struct TrainConfig {
  CodecConfig codec;
  double lambda = 0.01;
  double learning_rate = 1e-4;
  int batch_size = 8;
  int patch_size = 256;
  int steps = 1000;
  std::uint64_t seed = 1;
  /// Loss smoothing window in steps; the scheduler sees one value per window.
  int window = 100;
  int plateau_patience = 10;
  double plateau_factor = 0.5;
  double min_learning_rate = 1e-6;
  /// Write a checkpoint every this many steps; 0 writes only the final one.
  int checkpoint_every = 0;
  std::filesystem::path corpus;
  std::vector<std::string> freeze;

  bool frozen(const std::string& parameter) const;
  /// Throws ConfigError on out-of-range values or a patch size that is not a
  /// multiple of 2^levels.
  void validate() const;
};

TrainConfig parse_train_config(std::string_view text);
TrainConfig load_train_config(const std::filesystem::path& path);
std::string format_train_config(const TrainConfig& config);

/// R / num_pixels + lambda * MSE, with MSE over the three RGB planes on the
/// 0..255 scale. num_pixels is N * H * W of the batch.
template <typename T>
Tensor<T> rd_loss(const std::array<Tensor<T>, 3>& original, const std::array<Tensor<T>, 3>& reconstructed,
                  const Tensor<T>& rate_bits, double lambda);

struct NamedImage {
  std::string name;
  RgbImage image;
};

/// Every readable raster directly inside `dir`, sorted by file name. Throws
/// IoError if there are none.
std::vector<NamedImage> load_image_folder(const std::filesystem::path& dir);

/// Uniform random image, then uniform random crop position.
class PatchSampler {
 public:
  struct Draw {
    int image = 0;
    int top = 0;
    int left = 0;
  };

  /// Throws ConfigError on an empty corpus or a patch larger than any image.
  PatchSampler(std::vector<RgbImage> images, int patch_size, std::uint64_t seed);

  Draw next_draw();
  /// RGB planes of shape (n, 1, patch, patch) on the 0..255 scale.
  template <typename T>
  std::array<Tensor<T>, 3> next_batch(int n);

  int patch_size() const { return patch_; }
  std::size_t image_count() const { return images_.size(); }

 private:
  std::vector<RgbImage> images_;
  int patch_ = 0;
  std::mt19937_64 rng_;
};

/// Multiplies the learning rate by `factor` once `patience` consecutive
/// values fail to improve on the best one by a relative 1e-4.
class PlateauScheduler {
 public:
  PlateauScheduler(double learning_rate, double factor, int patience, double min_learning_rate);

  /// Returns true when this value triggered a reduction.
  bool observe(double value);
  double learning_rate() const { return lr_; }

 private:
  double lr_;
  double factor_;
  int patience_;
  double min_lr_;
  double best_;
  int bad_ = 0;
};

struct TrainStep {
  int step = 0;
  double loss = 0.0;
  double bpp = 0.0;  // noise-mode rate estimate per pixel
  double mse = 0.0;
  double learning_rate = 0.0;
};

struct TrainOutput {
  /// Receives loss.csv and checkpoints when non-empty.
  std::filesystem::path directory;
  /// Progress lines, one per window.
  std::ostream* log = nullptr;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<TrainStep> trace;
};

/// Adam on all parameters of `system`, patches from `sampler`, noise-mode
/// quantization. Files written to output.directory:
///   loss.csv             step,loss,bpp,mse,learning_rate
///   step_<n>.lwck        every checkpoint_every steps
///   final.lwck
TrainResult train(const TrainConfig& config, CodecSystem<float> system, PatchSampler& sampler,
                  const TrainOutput& output = {});
/// Builds the system from config.codec and the sampler from config.corpus.
TrainResult train(const TrainConfig& config, const TrainOutput& output = {});

/// Round-mode loss of `system` on whole images, averaged over images.
double heldout_rd_loss(const CodecSystem<float>& system, const std::vector<RgbImage>& images, double lambda);

struct RdPoint {
  std::string image;
  double bpp = 0.0;
  double psnr_db = 0.0;
  /// Coded bits per band summed over the color channels, in coding order.
  std::vector<double> band_bits;
};

/// Real encode and decode of every image, in parallel across images.
std::vector<RdPoint> evaluate(const std::vector<NamedImage>& images, const Codec& codec);
/// Header: image,bpp,psnr_db,bits_LL,bits_LH<L>,bits_HL<L>,bits_HH<L>,...,bits_HH1.
/// The last row, image "mean", averages the columns.
void write_eval_csv(std::ostream& os, const std::vector<RdPoint>& points, int levels);

struct RdCurvePoint {
  std::string checkpoint;
  std::string config;
  double lambda = 0.0;  // NaN when the checkpoint does not record it
  double bpp = 0.0;
  double psnr_db = 0.0;
};

/// Evaluates every .lwck file in `checkpoints`, sorted by mean bpp.
std::vector<RdCurvePoint> rd_curve(const std::filesystem::path& checkpoints, const std::vector<NamedImage>& images);
/// Header: checkpoint,config,lambda,bpp,psnr_db
void write_rdcurve_csv(std::ostream& os, const std::vector<RdCurvePoint>& points);

}  // namespace lwc
