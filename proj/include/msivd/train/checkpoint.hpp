// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "msivd/autograd/params.hpp"

namespace msivd::train {

inline constexpr std::string_view kCheckpointMagic = "MSIVDCKP";
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct StoredTensor {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<float> values;
  bool operator==(const StoredTensor&) const = default;
};

/// Container layout: 8-byte magic, u32 version, u64 header length (both
/// little-endian), JSON header with config, metrics and a tensor directory of
/// byte offsets, then the raw little-endian float32 payload.
struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json metrics = nlohmann::json::array();
  std::vector<StoredTensor> tensors;

  const StoredTensor& tensor(std::string_view name) const;
  bool operator==(const Checkpoint&) const = default;
};

std::string serialize_checkpoint(const Checkpoint& ckp);
/// Throws ParseError on bad magic, unsupported version or truncation.
Checkpoint parse_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckp);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Copies parameter values into stored tensors, names prefixed.
void store_params(Checkpoint& ckp, const std::string& prefix, const ad::ParamList<float>& params);
/// Writes stored values back into `params`. Throws ShapeError naming the
/// first tensor that is missing or shaped differently.
void restore_params(const Checkpoint& ckp, const std::string& prefix, ad::ParamList<float>& params);

}  // namespace msivd::train
