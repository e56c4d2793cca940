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

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "lwc/checkpoint.hpp"
#include "lwc/codec.hpp"
#include "lwc/errors.hpp"
#include "lwc/image.hpp"
#include "lwc/training.hpp"

namespace fs = std::filesystem;

namespace {

std::ofstream open_csv(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw lwc::IoError("cannot write " + path.string());
  return os;
}

int run_encode(const fs::path& input, const fs::path& checkpoint, const fs::path& output) {
  const lwc::Codec codec = lwc::Codec::from_checkpoint(lwc::load_checkpoint(checkpoint));
  const lwc::RgbImage img = lwc::read_image(input);
  const lwc::EncodeResult enc = codec.encode(img);
  lwc::write_file(output, enc.bytes);
  std::printf("%s: %dx%d -> %zu bytes, %.4f bpp, %.3f dB\n", output.string().c_str(), img.width, img.height,
              enc.bytes.size(), enc.bpp, lwc::psnr(img, enc.reconstruction));
  return 0;
}

int run_decode(const fs::path& input, const fs::path& checkpoint, const fs::path& output) {
  const lwc::Codec codec = lwc::Codec::from_checkpoint(lwc::load_checkpoint(checkpoint));
  const lwc::DecodeResult dec = codec.decode(lwc::read_file(input));
  lwc::write_image(output, dec.image);
  std::printf("%s: %dx%d\n", output.string().c_str(), dec.image.width, dec.image.height);
  return 0;
}

int run_inspect(const fs::path& input) {
  std::cout << lwc::describe_stream(lwc::parse_stream(lwc::read_file(input)));
  return 0;
}

int run_init(const std::string& filters, const std::string& entropy, int levels, std::uint64_t seed,
             const fs::path& output) {
  const lwc::CodecConfig config{lwc::parse_filter_kind(filters), lwc::parse_entropy_kind(entropy), levels};
  lwc::save_checkpoint(output, lwc::to_checkpoint(lwc::make_system<float>(config, seed)));
  std::printf("%s: untrained %s\n", output.string().c_str(), lwc::to_string(config).c_str());
  return 0;
}

int run_train(const fs::path& config_path, const fs::path& out) {
  const lwc::TrainConfig config = lwc::load_train_config(config_path);
  const lwc::TrainResult result = lwc::train(config, lwc::TrainOutput{out, &std::cout});
  std::printf("%s: %zu steps, final loss %.5f\n", (out / "final.lwck").string().c_str(), result.trace.size(),
              result.trace.empty() ? 0.0 : result.trace.back().loss);
  return 0;
}

int run_eval(const fs::path& dataset, const fs::path& checkpoint, const fs::path& csv) {
  const lwc::Checkpoint ckpt = lwc::load_checkpoint(checkpoint);
  const lwc::Codec codec = lwc::Codec::from_checkpoint(ckpt);
  const auto points = lwc::evaluate(lwc::load_image_folder(dataset), codec);
  std::ofstream os = open_csv(csv);
  lwc::write_eval_csv(os, points, codec.config().levels);
  double bpp = 0.0, db = 0.0;
  for (const auto& p : points) {
    bpp += p.bpp / points.size();
    db += p.psnr_db / points.size();
  }
  std::printf("%zu images: mean %.4f bpp, %.3f dB\n", points.size(), bpp, db);
  return 0;
}

int run_rdcurve(const fs::path& checkpoints, const fs::path& dataset, const fs::path& csv) {
  const auto curve = lwc::rd_curve(checkpoints, lwc::load_image_folder(dataset));
  std::ofstream os = open_csv(csv);
  lwc::write_rdcurve_csv(os, curve);
  for (const auto& p : curve) {
    std::printf("%-24s %-14s %.4f bpp  %.3f dB\n", p.checkpoint.c_str(), p.config.c_str(), p.bpp, p.psnr_db);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learned wavelet image codec"};
  app.require_subcommand(1);

  fs::path input, output, checkpoint, config, out, dataset, csv, checkpoints;

  auto* encode = app.add_subcommand("encode", "Compress a PPM or PNG image");
  encode->add_option("--input", input, "Raster image")->required()->check(CLI::ExistingFile);
  encode->add_option("--checkpoint", checkpoint, "Trained checkpoint (.lwck)")->required()->check(CLI::ExistingFile);
  encode->add_option("--output", output, "Bitstream to write")->required();

  auto* decode = app.add_subcommand("decode", "Decompress a bitstream");
  decode->add_option("--input", input, "Bitstream")->required()->check(CLI::ExistingFile);
  decode->add_option("--checkpoint", checkpoint, "Checkpoint the stream was written with")
      ->required()
      ->check(CLI::ExistingFile);
  decode->add_option("--output", output, "Raster image to write (.ppm or .png)")->required();

  auto* inspect = app.add_subcommand("inspect", "Print the header and per-subband chunk sizes");
  inspect->add_option("bitstream", input)->required()->check(CLI::ExistingFile);

  std::string filters = "cdf97", entropy = "fem";
  int levels = 4;
  std::uint64_t seed = 1;
  auto* init = app.add_subcommand("init", "Write an untrained checkpoint");
  init->add_option("--filters", filters, "cdf97 or llb")->capture_default_str();
  init->add_option("--entropy", entropy, "fem, iscem, iiscem or ipiscem")->capture_default_str();
  init->add_option("--levels", levels)->capture_default_str()->check(CLI::Range(2, 6));
  init->add_option("--seed", seed)->capture_default_str();
  init->add_option("--output", output)->required();

  auto* train = app.add_subcommand("train", "Train a codec on a folder of images");
  train->add_option("--config", config, "Training settings")->required()->check(CLI::ExistingFile);
  train->add_option("--out", out, "Output directory")->required();

  auto* eval = app.add_subcommand("eval", "Encode and decode a dataset, write per-image results");
  eval->add_option("--dataset", dataset)->required()->check(CLI::ExistingDirectory);
  eval->add_option("--checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  eval->add_option("--csv", csv)->required();

  auto* rdcurve = app.add_subcommand("rdcurve", "Evaluate every checkpoint in a folder");
  rdcurve->add_option("--checkpoints", checkpoints)->required()->check(CLI::ExistingDirectory);
  rdcurve->add_option("--dataset", dataset)->required()->check(CLI::ExistingDirectory);
  rdcurve->add_option("--csv", csv)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*encode) return run_encode(input, checkpoint, output);
    if (*decode) return run_decode(input, checkpoint, output);
    if (*inspect) return run_inspect(input);
    if (*init) return run_init(filters, entropy, levels, seed, output);
    if (*train) return run_train(config, out);
    if (*eval) return run_eval(dataset, checkpoint, csv);
    if (*rdcurve) return run_rdcurve(checkpoints, dataset, csv);
  } catch (const lwc::DecodeError& e) {
    std::fprintf(stderr, "lwc: decode error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "lwc: %s\n", e.what());
    return 2;
  }
  return 1;
}
