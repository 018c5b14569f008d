// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "msivd/common/rng.hpp"
#include "msivd/corpus/nvd.hpp"
#include "msivd/corpus/types.hpp"

namespace msivd::corpus {

/// Line-level comparison of a file before and after its fix.
struct LineDiff {
  std::size_t pre_lines = 0;
  std::size_t added = 0;
  std::size_t removed = 0;
  LineRange pre_range;   // changed region in the pre-change file (empty file: {0, 0})
  LineRange post_range;  // matching region in the post-change file
  std::string post_hunk; // post-change text of that region

  /// (added + removed) / pre-change lines; 0 for an empty file.
  double changed_fraction() const;
};

LineDiff diff_lines(std::string_view pre, std::string_view post);

struct WindowOptions {
  std::size_t max_tokens = 2048;  // one token per byte
  std::uint64_t seed = 0;
  bool cpp_only = false;
};

/// Contiguous line window of at most `max_tokens` bytes containing `focus`
/// when it fits. Surrounding context is split before/after by a random
/// fraction drawn from `rng`.
LineRange choose_window(std::span<const std::string_view> lines, LineRange focus,
                        std::size_t max_tokens, Rng& rng);

bool is_c_family_path(std::string_view path);

struct SampleBatch {
  std::vector<CodeSample> samples;
  std::vector<double> changed_fractions;  // parallel to samples
  std::vector<SkipNote> skipped;
};

/// One positive sample per changed file, windowed around the change. Throws
/// when the record has no file patches.
SampleBatch split_into_file_samples(const VulnerabilityRecord& record,
                                    const WindowOptions& options = {});

/// Post-fix code of one patch as a negative sample. Throws on a bad index.
CodeSample make_negative_sample(const VulnerabilityRecord& record, std::size_t patch_index,
                                const WindowOptions& options = {});

enum class DropReason { Incomplete, NoChange, MassRewrite, TooShort };
std::string_view to_string(DropReason r);

struct ExclusionOptions {
  /// Samples are whole functions; enables the Incomplete rule, which would
  /// reject nearly every arbitrary window.
  bool function_level = true;
  double max_changed_fraction = 0.7;
  std::size_t min_lines = 5;
};

/// nullopt keeps the sample.
std::optional<DropReason> apply_exclusion_filters(const CodeSample& sample, double changed_fraction,
                                                  const ExclusionOptions& options = {});

/// Negative share of the two preset mixes.
inline constexpr double kBigVulNegativeShare = 0.94;
inline constexpr double kPreciseBugsNegativeShare = 0.80;

/// Downsamples whichever class is in excess so negatives make up
/// `negative_share` of the result. Input order is preserved.
std::vector<CodeSample> mix_classes(std::span<const CodeSample> samples, double negative_share,
                                    std::uint64_t seed);

}  // namespace msivd::corpus
