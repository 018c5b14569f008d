// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#include "msivd/dfa/cfg.hpp"

#include <queue>

#include "msivd/common/error.hpp"

namespace msivd::dfa {

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::assign: return "assign";
    case NodeKind::branch: return "branch";
    case NodeKind::loop_head: return "loop-head";
    case NodeKind::call: return "call";
    case NodeKind::ret: return "return";
    case NodeKind::entry: return "entry";
    case NodeKind::exit: return "exit";
  }
  return "?";
}

std::vector<std::vector<int>> ControlFlowGraph::successors() const {
  std::vector<std::vector<int>> out(nodes.size());
  for (auto [a, b] : edges) out[static_cast<std::size_t>(a)].push_back(b);
  return out;
}

std::vector<std::vector<int>> ControlFlowGraph::predecessors() const {
  std::vector<std::vector<int>> out(nodes.size());
  for (auto [a, b] : edges) out[static_cast<std::size_t>(b)].push_back(a);
  return out;
}

void ControlFlowGraph::validate() const {
  const int n = static_cast<int>(nodes.size());
  if (n < 2) throw Error("cfg needs at least entry and exit nodes");
  if (entry < 0 || entry >= n || exit < 0 || exit >= n || entry == exit)
    throw Error("cfg entry/exit ids out of range");
  for (int i = 0; i < n; ++i) {
    if (nodes[static_cast<std::size_t>(i)].id != i) throw Error("cfg node ids are not dense");
  }
  for (auto [a, b] : edges) {
    if (a < 0 || a >= n || b < 0 || b >= n)
      throw Error("cfg edge " + std::to_string(a) + "->" + std::to_string(b) + " out of range");
    if (b == entry) throw Error("cfg entry has a predecessor");
    if (a == exit) throw Error("cfg exit has a successor");
  }
  const auto succ = successors();
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::queue<int> q;
  q.push(entry);
  seen[static_cast<std::size_t>(entry)] = true;
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int v : succ[static_cast<std::size_t>(u)]) {
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = true;
        q.push(v);
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    if (!seen[static_cast<std::size_t>(i)] && i != exit)
      throw Error("cfg node " + std::to_string(i) + " unreachable from entry");
  }
}

std::vector<Definition> collect_definitions(const ControlFlowGraph& cfg) {
  std::vector<Definition> defs;
  for (const auto& node : cfg.nodes) {
    if (node.defines) {
      defs.push_back({static_cast<int>(defs.size()), *node.defines, node.id});
    }
  }
  return defs;
}

}  // namespace msivd::dfa
