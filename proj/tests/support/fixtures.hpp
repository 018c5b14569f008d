// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "msivd/common/io.hpp"
#include "msivd/corpus/samples.hpp"

namespace msivd::testing {

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(MSIVD_TEST_DATA_DIR) / name;
}

inline std::string data_file(const std::string& name) { return read_file(data_path(name)); }

struct ExclusionCase {
  std::string name;
  std::string expected;  // a DropReason name or "keep"
  std::string verdict;
};

/// Runs each rule fixture through sample extraction and the exclusion filters.
inline std::vector<ExclusionCase> run_exclusion_fixtures() {
  const auto doc = nlohmann::json::parse(data_file("exclusion_rules.json"));
  std::vector<ExclusionCase> out;
  for (const auto& c : doc) {
    corpus::VulnerabilityRecord rec;
    rec.cve_id = "CVE-0000-" + c["name"].get<std::string>();
    rec.cwe_id = "CWE-20";
    rec.description = "fixture";
    rec.file_patches.push_back(
        {"f.c", c["pre_code"].get<std::string>(), c["post_code"].get<std::string>(), {}});
    const auto batch = corpus::split_into_file_samples(rec);
    const auto drop = corpus::apply_exclusion_filters(batch.samples.at(0), batch.changed_fractions.at(0));
    out.push_back({c["name"].get<std::string>(), c["expected"].get<std::string>(),
                   drop ? std::string(corpus::to_string(*drop)) : "keep"});
  }
  return out;
}

}  // namespace msivd::testing
