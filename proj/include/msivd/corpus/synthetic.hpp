// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "msivd/common/date.hpp"
#include "msivd/corpus/types.hpp"

namespace msivd::corpus {

/// Generator for a separable mini-C corpus. A sample is vulnerable when a
/// length read by a source call reaches the sink call unmasked; safe samples
/// mask it with `% 16` or `& 15` first. Some vulnerable samples mask an
/// unrelated variable instead, so the surface pattern alone is not enough.
struct SyntheticOptions {
  std::size_t count = 200;
  double positive_share = 0.5;
  /// Share of samples dated before `cutoff`; the rest fall on or after it.
  double early_share = 0.8;
  double decoy_share = 0.3;
  Date cutoff{2023, 1, 1};
  std::uint64_t seed = 7;
};

std::vector<CodeSample> make_synthetic_corpus(const SyntheticOptions& options = {});

}  // namespace msivd::corpus
