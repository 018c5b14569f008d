// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace msivd::dfa {

enum class NodeKind { assign, branch, loop_head, call, ret, entry, exit };

std::string_view to_string(NodeKind kind);

struct CfgNode {
  int id = 0;
  NodeKind kind = NodeKind::assign;
  std::optional<std::string> defines;  // variable written by this statement
  std::vector<std::string> tags;       // "api:name", "const:42", "op:+", "param"
  int line = 0;                        // 1-based source line, 0 for entry/exit
  std::string text;
};

/// Statement-level control flow graph of one function. Node ids are dense and
/// follow source order, with entry first and exit last.
struct ControlFlowGraph {
  std::vector<CfgNode> nodes;
  std::vector<std::pair<int, int>> edges;
  int entry = 0;
  int exit = 0;

  std::size_t size() const { return nodes.size(); }
  std::vector<std::vector<int>> successors() const;
  std::vector<std::vector<int>> predecessors() const;

  /// Throws msivd::Error unless: one entry without predecessors, one exit
  /// without successors, valid edge endpoints, every node reachable from entry.
  void validate() const;
};

struct Definition {
  int def_id = 0;
  std::string variable;
  int node = 0;
};

/// Every definition in the graph, numbered by node order.
std::vector<Definition> collect_definitions(const ControlFlowGraph& cfg);

}  // namespace msivd::dfa
