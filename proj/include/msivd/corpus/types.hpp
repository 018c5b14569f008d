// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "msivd/common/date.hpp"

namespace msivd::corpus {

enum class Severity { low, medium, high, critical };
enum class AttackComplexity { low, high };

enum class CweCategory {
  BufferError,
  InputValidationError,
  ResourceError,
  PrivilegeEscalation,
  ValueError,
  Other,
};

inline constexpr CweCategory kAllCategories[] = {
    CweCategory::BufferError,         CweCategory::InputValidationError,
    CweCategory::ResourceError,       CweCategory::PrivilegeEscalation,
    CweCategory::ValueError,          CweCategory::Other};

std::string_view to_string(Severity s);
std::string_view to_string(AttackComplexity c);
std::string_view to_string(CweCategory c);
std::optional<Severity> parse_severity(std::string_view text);
std::optional<AttackComplexity> parse_attack_complexity(std::string_view text);
CweCategory parse_category(std::string_view text);

/// Inclusive 1-based line range.
struct LineRange {
  int start = 0;
  int end = 0;
  bool operator==(const LineRange&) const = default;
};

struct FilePatch {
  std::string path;
  std::string pre_code;
  std::string post_code;
  std::vector<LineRange> changed_lines;  // in pre_code; derived from a diff when empty
};

struct Reference {
  std::string url;
  std::vector<std::string> tags;
};

struct VulnerabilityRecord {
  std::string cve_id;
  std::string cwe_id;
  std::string description;
  std::optional<double> exploitability_score;
  std::optional<Severity> severity;
  std::optional<AttackComplexity> attack_complexity;
  Date fix_commit_date;
  std::vector<Reference> references;
  std::vector<FilePatch> file_patches;

  std::vector<std::string> patch_links() const;
};

struct CodeSample {
  std::string sample_id;
  std::string code;
  bool label = false;
  std::string cwe_id;
  CweCategory cwe_category = CweCategory::Other;
  std::string description;
  std::optional<int> vuln_line_start;
  std::optional<int> vuln_line_end;
  std::optional<std::string> fix_code;
  Date origin_date;

  bool operator==(const CodeSample&) const = default;
};

/// Line count of a text; a trailing newline does not open a new line.
std::size_t count_lines(std::string_view text);
std::vector<std::string_view> split_lines(std::string_view text);

}  // namespace msivd::corpus
