// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace msivd::lm {

/// Byte-level vocabulary: ids 0..255 are raw bytes, followed by reserved
/// specials that byte encoding never produces.
namespace token {
inline constexpr int pad = 256;
inline constexpr int bos = 257;
inline constexpr int eos = 258;
inline constexpr int system = 259;
inline constexpr int student = 260;
inline constexpr int teacher = 261;
inline constexpr int yes = 262;
inline constexpr int no = 263;
}  // namespace token

inline constexpr int kVocabSize = 264;

class Tokenizer {
 public:
  std::vector<int> encode(std::string_view text) const;
  /// Bytes decode verbatim; specials render as their marker text.
  std::string decode(std::span<const int> ids) const;
  static bool is_special(int id) { return id >= 256 && id < kVocabSize; }
  static std::string_view special_text(int id);
  int vocab_size() const { return kVocabSize; }
};

}  // namespace msivd::lm
