// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#include "msivd/lm/tokenizer.hpp"

#include <array>

#include "msivd/common/error.hpp"

namespace msivd::lm {

std::vector<int> Tokenizer::encode(std::string_view text) const {
  std::vector<int> ids;
  ids.reserve(text.size());
  for (unsigned char c : text) ids.push_back(c);
  return ids;
}

std::string_view Tokenizer::special_text(int id) {
  static constexpr std::array<std::string_view, 8> names{
      "<|pad|>", "<|bos|>", "<|eos|>", "<|system|>", "<|student|>", "<|teacher|>", "<|yes|>", "<|no|>"};
  if (!is_special(id)) throw Error("token " + std::to_string(id) + " is not a special token");
  return names[static_cast<std::size_t>(id - 256)];
}

std::string Tokenizer::decode(std::span<const int> ids) const {
  std::string out;
  out.reserve(ids.size());
  for (int id : ids) {
    if (id >= 0 && id < 256) {
      out += static_cast<char>(id);
    } else if (is_special(id)) {
      out += special_text(id);
    } else {
      throw Error("token id " + std::to_string(id) + " outside the vocabulary");
    }
  }
  return out;
}

}  // namespace msivd::lm
