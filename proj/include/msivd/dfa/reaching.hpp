// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "msivd/dfa/cfg.hpp"

namespace msivd::dfa {

/// Set of def_ids, one bit per definition of the analysed graph.
using DefSet = boost::dynamic_bitset<>;

struct GenKill {
  std::vector<DefSet> gen;
  std::vector<DefSet> kill;
};

struct ReachSets {
  std::vector<Definition> definitions;
  std::vector<DefSet> in;
  std::vector<DefSet> out;
};

GenKill gen_kill(const ControlFlowGraph& cfg, std::span<const Definition> defs);

/// Forward may-analysis to the least fixpoint. FIFO worklist seeded in node-id
/// order.
ReachSets reaching_definitions(const ControlFlowGraph& cfg);

/// Same analysis, always popping the pending node with the smallest
/// `priority[node]`. Any permutation converges to the same fixpoint.
ReachSets reaching_definitions(const ControlFlowGraph& cfg, std::span<const int> priority);

/// True when one more sweep of the transfer equations changes nothing.
bool is_fixpoint(const ControlFlowGraph& cfg, const ReachSets& reach);

/// Def ids in a set, ascending.
std::vector<int> members(const DefSet& set);

}  // namespace msivd::dfa
