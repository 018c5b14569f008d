// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "msivd/corpus/types.hpp"

namespace msivd::corpus {

/// Maps a CWE id ("CWE-125", case-insensitive, surrounding space ignored) to
/// its vulnerability category. Unlisted ids are Other.
CweCategory classify_cwe(std::string_view cwe_id);

std::vector<CodeSample> filter_by_category(std::span<const CodeSample> samples,
                                           CweCategory category);

}  // namespace msivd::corpus
