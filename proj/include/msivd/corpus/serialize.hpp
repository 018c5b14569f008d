// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "msivd/corpus/split.hpp"
#include "msivd/corpus/types.hpp"

namespace msivd::corpus {

/// Keys in declaration order; absent optionals are written as null.
nlohmann::ordered_json sample_to_json(const CodeSample& sample);
/// Throws ParseError on missing keys, wrong types or a broken line-range invariant.
CodeSample sample_from_json(const nlohmann::json& j);

/// One object per line, LF-terminated.
std::string write_samples_jsonl(std::span<const CodeSample> samples);
std::vector<CodeSample> read_samples_jsonl(std::string_view text);

using SplitAssignment = std::map<std::string, SplitName>;

SplitAssignment assignment_of(const Split& split);
/// Object mapping sample_id to "train", "eval" or "test", keys sorted.
std::string write_splits_json(const SplitAssignment& assignment);
SplitAssignment read_splits_json(std::string_view text);

/// Rebuilds a Split from a sample pool and an assignment, keeping pool order.
/// Throws when the assignment names an unknown sample.
Split apply_assignment(std::span<const CodeSample> pool, const SplitAssignment& assignment);

}  // namespace msivd::corpus
