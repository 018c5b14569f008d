// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#include "msivd/corpus/cwe.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <utility>

#include "msivd/common/error.hpp"

namespace msivd::corpus {

std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::low: return "low";
    case Severity::medium: return "medium";
    case Severity::high: return "high";
    case Severity::critical: return "critical";
  }
  return "?";
}

std::string_view to_string(AttackComplexity c) {
  return c == AttackComplexity::low ? "low" : "high";
}

std::string_view to_string(CweCategory c) {
  switch (c) {
    case CweCategory::BufferError: return "BufferError";
    case CweCategory::InputValidationError: return "InputValidationError";
    case CweCategory::ResourceError: return "ResourceError";
    case CweCategory::PrivilegeEscalation: return "PrivilegeEscalation";
    case CweCategory::ValueError: return "ValueError";
    case CweCategory::Other: return "Other";
  }
  return "?";
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::optional<Severity> parse_severity(std::string_view text) {
  const auto t = lower(text);
  if (t == "low") return Severity::low;
  if (t == "medium") return Severity::medium;
  if (t == "high") return Severity::high;
  if (t == "critical") return Severity::critical;
  return std::nullopt;
}

std::optional<AttackComplexity> parse_attack_complexity(std::string_view text) {
  const auto t = lower(text);
  if (t == "low") return AttackComplexity::low;
  if (t == "high") return AttackComplexity::high;
  return std::nullopt;
}

CweCategory parse_category(std::string_view text) {
  for (auto c : kAllCategories)
    if (to_string(c) == text) return c;
  throw ParseError("unknown CWE category '" + std::string(text) + "'", 0);
}

CweCategory classify_cwe(std::string_view cwe_id) {
  static constexpr std::array<std::pair<int, CweCategory>, 10> table{{
      {125, CweCategory::BufferError},
      {787, CweCategory::BufferError},
      {134, CweCategory::InputValidationError},
      {89, CweCategory::InputValidationError},
      {415, CweCategory::ResourceError},
      {404, CweCategory::ResourceError},
      {264, CweCategory::PrivilegeEscalation},
      {255, CweCategory::PrivilegeEscalation},
      {190, CweCategory::ValueError},
      {369, CweCategory::ValueError},
  }};
  auto t = lower(cwe_id);
  const auto first = t.find_first_not_of(" \t");
  const auto last = t.find_last_not_of(" \t");
  if (first == std::string::npos) return CweCategory::Other;
  t = t.substr(first, last - first + 1);
  if (!t.starts_with("cwe-") || t.size() == 4) return CweCategory::Other;
  const std::string_view digits(t.data() + 4, t.size() - 4);
  if (!std::all_of(digits.begin(), digits.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }) ||
      digits.size() > 6)
    return CweCategory::Other;
  const int number = std::stoi(std::string(digits));
  for (auto [id, cat] : table)
    if (id == number) return cat;
  return CweCategory::Other;
}

std::vector<CodeSample> filter_by_category(std::span<const CodeSample> samples,
                                           CweCategory category) {
  std::vector<CodeSample> out;
  std::copy_if(samples.begin(), samples.end(), std::back_inserter(out),
               [&](const CodeSample& s) { return s.cwe_category == category; });
  return out;
}

}  // namespace msivd::corpus
