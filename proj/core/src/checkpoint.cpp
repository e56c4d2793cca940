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

#include "lwc/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "byte_io.hpp"
#include "lwc/errors.hpp"

namespace lwc {

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt) {
  ByteWriter out;
  out.bytes({reinterpret_cast<const std::uint8_t*>("LWCK"), 4});
  out.u32(kCheckpointVersion);
  out.u32(static_cast<std::uint32_t>(ckpt.meta.size()));
  for (const auto& [key, value] : ckpt.meta) {
    out.str(key);
    out.str(value);
  }
  out.u32(static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& [name, t] : ckpt.tensors) {
    out.str(name);
    const Shape s = t.shape();
    for (int d : {s.n, s.c, s.h, s.w}) out.u32(static_cast<std::uint32_t>(d));
    for (float v : t.data()) out.u32(std::bit_cast<std::uint32_t>(v));
  }
  return out.take();
}

Checkpoint parse_checkpoint(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes, "checkpoint");
  const auto magic = in.bytes(4);
  if (std::memcmp(magic.data(), "LWCK", 4) != 0) throw DecodeError("checkpoint: bad magic");
  const std::uint32_t version = in.u32();
  if (version != kCheckpointVersion) {
    throw DecodeError("checkpoint: unsupported version " + std::to_string(version));
  }
  Checkpoint ckpt;
  const std::uint32_t meta = in.u32();
  for (std::uint32_t i = 0; i < meta; ++i) {
    std::string key = in.str();
    ckpt.meta[key] = in.str();
  }
  const std::uint32_t count = in.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = in.str();
    Shape s;
    s.n = static_cast<int>(in.u32());
    s.c = static_cast<int>(in.u32());
    s.h = static_cast<int>(in.u32());
    s.w = static_cast<int>(in.u32());
    if (s.n < 0 || s.c < 0 || s.h < 0 || s.w < 0 || s.numel() > in.remaining() / 4) {
      throw DecodeError("checkpoint: bad shape for " + name);
    }
    std::vector<float> v(s.numel());
    for (auto& x : v) x = std::bit_cast<float>(in.u32());
    ckpt.tensors.emplace(std::move(name), Tensor<float>(s, std::move(v)));
  }
  if (in.remaining() != 0) throw DecodeError("checkpoint: trailing bytes");
  return ckpt;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("write failed for " + path.string());
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_file(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return parse_checkpoint(read_file(path));
}

std::uint64_t checkpoint_hash(const Checkpoint& ckpt) {
  return fnv1a64(serialize_checkpoint(ckpt));
}

template <typename T>
void store_params(const ParamList<T>& params, Checkpoint& ckpt) {
  for (const auto& [name, p] : params) {
    std::vector<float> v(p.data().begin(), p.data().end());
    ckpt.tensors.insert_or_assign(name, Tensor<float>(p.shape(), std::move(v)));
  }
}

template <typename T>
void restore_params(const Checkpoint& ckpt, ParamList<T>& params) {
  for (auto& [name, p] : params) {
    auto it = ckpt.tensors.find(name);
    if (it == ckpt.tensors.end()) throw ConfigError("checkpoint lacks parameter " + name);
    if (it->second.shape() != p.shape()) {
      throw ConfigError("checkpoint shape " + it->second.shape().str() + " for " + name +
                        " does not match model shape " + p.shape().str());
    }
    auto dst = p.mutable_data();
    auto src = it->second.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = static_cast<T>(src[i]);
  }
}

template void store_params(const ParamList<float>&, Checkpoint&);
template void store_params(const ParamList<double>&, Checkpoint&);
template void restore_params(const Checkpoint&, ParamList<float>&);
template void restore_params(const Checkpoint&, ParamList<double>&);

}  // namespace lwc
