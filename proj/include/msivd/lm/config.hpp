// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

#include "msivd/lm/tokenizer.hpp"

namespace msivd {

enum class Profile { desk, paper };

std::string_view to_string(Profile p);
Profile parse_profile(std::string_view name);

}  // namespace msivd

namespace msivd::lm {

struct TransformerConfig {
  Profile profile = Profile::desk;
  std::size_t d_model = 64;
  std::size_t n_layers = 2;
  std::size_t n_heads = 4;
  std::size_t context_window = 1024;
  std::size_t vocab_size = kVocabSize;
  std::size_t lora_rank = 8;
  double lora_alpha = 16.0;
  double lora_init_std = 0.02;
  double init_std = 0.02;
  double head_init_std = 0.125;
  std::uint64_t seed = 1;

  static TransformerConfig desk();
  /// Dimensions of the full-size model; used for bookkeeping, never allocated.
  static TransformerConfig paper();
  static TransformerConfig for_profile(Profile p);

  std::size_t head_dim() const { return d_model / n_heads; }
  std::size_t mlp_hidden() const { return 4 * d_model; }
  double lora_scale() const { return lora_alpha / static_cast<double>(lora_rank); }

  /// Throws UsageError on inconsistent dimensions.
  void validate() const;

  bool operator==(const TransformerConfig&) const = default;
};

void to_json(nlohmann::json& j, const TransformerConfig& c);
void from_json(const nlohmann::json& j, TransformerConfig& c);

}  // namespace msivd::lm
