// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include <json.hpp>

#include "msivd/common/error.hpp"

namespace msivd {

/// Calls `on_record(json, line_number)` for every non-blank line. Malformed
/// lines and exceptions thrown by the callback surface as ParseError carrying
/// the 1-based line number.
template <typename Fn>
void for_each_jsonl(std::string_view text, Fn&& on_record) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    const auto line = text.substr(start, nl - start);
    const std::size_t offset = start;
    start = nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError("line " + std::to_string(line_no) + ": malformed JSON: " + e.what(),
                       offset + (e.byte > 0 ? e.byte - 1 : 0), line_no, e.byte);
    }
    try {
      on_record(j, line_no);
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what(), offset, line_no);
    }
  }
}

}  // namespace msivd
