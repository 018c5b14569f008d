// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "msivd/common/date.hpp"
#include "msivd/corpus/types.hpp"

namespace msivd::corpus {

enum class SplitName { Train, Eval, Test };
std::string_view to_string(SplitName s);
SplitName parse_split_name(std::string_view text);

struct SplitSpec {
  std::array<double, 3> ratios{0.8, 0.1, 0.1};  // train, eval, test
  Date cutoff_date{2023, 1, 1};
  std::uint64_t seed = 0;
  /// When false the cutoff is ignored and all samples share one pool.
  bool temporal = true;

  /// Throws UsageError unless ratios are non-negative and sum to 1.
  void validate() const;
};

struct Split {
  std::vector<CodeSample> train;
  std::vector<CodeSample> eval;
  std::vector<CodeSample> test;

  const std::vector<CodeSample>& operator[](SplitName s) const;
  std::size_t size() const { return train.size() + eval.size() + test.size(); }
};

/// Largest-remainder apportionment of `total` items by `ratios`.
std::array<std::size_t, 3> split_targets(std::size_t total, const std::array<double, 3>& ratios);

/// Train draws from samples dated before the cutoff, eval and test from those
/// on or after it. The largest total whose targets fit both pools is used;
/// leftover samples are not assigned. Each list keeps input order.
Split make_split(std::span<const CodeSample> samples, const SplitSpec& split_spec);

}  // namespace msivd::corpus
