// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#include "msivd/dfa/features.hpp"

#include <algorithm>
#include <map>

#include "msivd/common/error.hpp"
#include "msivd/dfa/parser.hpp"

namespace msivd::dfa {

std::size_t FeatureConfig::columns_per_bucket() const {
  return std::min(top_k, width / buckets());
}

NodeFeatures build_node_features(const ControlFlowGraph& cfg, const ReachSets& reach,
                                 const FeatureConfig& config) {
  if (config.var_slots == 0 || config.top_k == 0) throw Error("feature config needs slots and top_k");
  if (config.width < config.buckets()) {
    throw Error("feature width " + std::to_string(config.width) + " is smaller than the " +
                std::to_string(config.buckets()) + " buckets");
  }
  std::map<std::string, std::size_t> slot_of;
  std::vector<std::size_t> bucket_of(reach.definitions.size());
  for (const auto& d : reach.definitions) {
    auto [it, fresh] = slot_of.try_emplace(d.variable, slot_of.size());
    const std::size_t slot = it->second % config.var_slots;
    const bool is_call = cfg.nodes[static_cast<std::size_t>(d.node)].kind == NodeKind::call;
    bucket_of[static_cast<std::size_t>(d.def_id)] = slot * FeatureConfig::kKinds + (is_call ? 1 : 0);
  }

  const std::size_t cols = config.columns_per_bucket();
  NodeFeatures f;
  f.width = config.width;
  f.values.assign(cfg.size() * config.width, 0.0f);
  std::vector<std::size_t> count(config.buckets());
  for (std::size_t n = 0; n < cfg.size(); ++n) {
    std::fill(count.begin(), count.end(), 0);
    for (int id : members(reach.in[n])) ++count[bucket_of[static_cast<std::size_t>(id)]];
    float* row = f.values.data() + n * config.width;
    for (std::size_t b = 0; b < count.size(); ++b) {
      const std::size_t lit = std::min(count[b], cols);
      for (std::size_t j = 0; j < lit; ++j) row[b * cols + j] = 1.0f;
    }
  }
  return f;
}

NodeFeatures features_for_source(std::string_view source, const FeatureConfig& config) {
  const auto cfg = parse_mini_c(source);
  return build_node_features(cfg, reaching_definitions(cfg), config);
}

}  // namespace msivd::dfa
