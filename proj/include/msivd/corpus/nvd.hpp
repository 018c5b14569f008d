// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "msivd/corpus/types.hpp"

namespace msivd::corpus {

struct SkipNote {
  std::string id;      // CVE id or "#<index>" when the id itself is missing
  std::string reason;
};

struct NvdParseResult {
  std::vector<VulnerabilityRecord> records;
  std::vector<SkipNote> skipped;
};

/// Reads either an NVD API v2 document ({"vulnerabilities": [{"cve": ...}]})
/// or the fixture format (a top-level array of flat records; see
/// schemas/nvd_fixture.schema.json). v2 entries may carry the fixture keys
/// "fix_commit_date" and "file_patches" beside "cve".
///
/// Entries without any reference URL are dropped; entries missing a mandatory
/// field (id, description, date) are skipped with a note. Malformed JSON
/// raises ParseError carrying the byte offset.
NvdParseResult parse_nvd_dump(std::string_view bytes);

/// True for links that point at a single commit (GitHub/GitLab "/commit/",
/// cgit "commit/?id=", gitweb "a=commit").
bool is_commit_url(std::string_view url);

/// Records with at least one commit link tagged "Patch"; order preserved.
std::vector<VulnerabilityRecord> filter_patch_records(std::span<const VulnerabilityRecord> records);

}  // namespace msivd::corpus
