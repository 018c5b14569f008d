// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#include "msivd/common/date.hpp"

#include <charconv>
#include <cstdio>

#include "msivd/common/error.hpp"

namespace msivd {

Date::Date(int year, unsigned month, unsigned day)
    : ymd_(std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}) {
  if (!ymd_.ok()) {
    throw Error("invalid calendar date " + std::to_string(year) + "-" + std::to_string(month) +
                "-" + std::to_string(day));
  }
}

Date Date::parse(std::string_view text) {
  auto fail = [&] { return ParseError("unparseable date '" + std::string(text) + "'", 0); };
  if (text.size() < 10 || text[4] != '-' || text[7] != '-') throw fail();
  int y = 0;
  unsigned m = 0, d = 0;
  auto num = [&](std::size_t pos, std::size_t len, auto& out) {
    auto [p, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, out);
    return ec == std::errc{} && p == text.data() + pos + len;
  };
  if (!num(0, 4, y) || !num(5, 2, m) || !num(8, 2, d)) throw fail();
  if (text.size() > 10 && text[10] != 'T' && text[10] != ' ') throw fail();
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                  std::chrono::day{d}};
  if (!ymd.ok()) throw fail();
  return Date(ymd);
}

std::string Date::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year(), month(), day());
  return buf;
}

}  // namespace msivd
