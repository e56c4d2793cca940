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
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lwc/nn.hpp"
#include "lwc/tensor.hpp"

namespace lwc {

// Checkpoint container, all integers little-endian:
//
//   "LWCK"          4 bytes magic
//   u32 version     currently 1
//   u32 meta_count  then meta_count x { u32 len, key bytes, u32 len, value bytes }
//   u32 tensors     then tensors x { u32 len, name bytes, i32 n, c, h, w,
//                                    n*c*h*w float32 values }
//
// Entries are written sorted by key/name so identical models serialize to
// identical bytes.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::map<std::string, std::string> meta;
  std::map<std::string, Tensor<float>> tensors;
};

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);
/// Hash of the serialized form; what bitstreams record.
std::uint64_t checkpoint_hash(const Checkpoint& ckpt);

/// Snapshot of a parameter list (values are narrowed to float).
template <typename T>
void store_params(const ParamList<T>& params, Checkpoint& ckpt);

/// Copies every listed parameter from the checkpoint; missing names or shape
/// mismatches are configuration errors.
template <typename T>
void restore_params(const Checkpoint& ckpt, ParamList<T>& params);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace lwc
