// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "msivd/dfa/cfg.hpp"
#include "msivd/dfa/reaching.hpp"

namespace msivd::dfa {

/// Bucketed encoding of the definitions reaching each node.
///
/// A definition falls into bucket (slot, kind): slot is the rank of its
/// variable by first definition, modulo `var_slots`; kind is 0 for a plain
/// assignment (or parameter) and 1 for a call result. Each bucket owns
/// min(top_k, width / buckets) columns and counts its reaching definitions in
/// thermometer code, so counts above that cap saturate. Unused trailing
/// columns stay zero.
struct FeatureConfig {
  std::size_t width = 32;
  std::size_t var_slots = 4;
  std::size_t top_k = 4;

  static constexpr std::size_t kKinds = 2;
  std::size_t buckets() const { return var_slots * kKinds; }
  std::size_t columns_per_bucket() const;
};

struct NodeFeatures {
  std::size_t width = 0;
  std::vector<float> values;  // row-major [nodes x width]

  std::size_t rows() const { return width ? values.size() / width : 0; }
  const float* row(std::size_t n) const { return values.data() + n * width; }
};

NodeFeatures build_node_features(const ControlFlowGraph& cfg, const ReachSets& reach,
                                 const FeatureConfig& config = {});

/// Parse, analyse and encode in one call.
NodeFeatures features_for_source(std::string_view source, const FeatureConfig& config = {});

}  // namespace msivd::dfa
