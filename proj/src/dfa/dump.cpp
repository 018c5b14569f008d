// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#include "msivd/dfa/dump.hpp"

#include <sstream>

#include <json.hpp>

namespace msivd::dfa {
namespace {

std::string dot_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out;
}

}  // namespace

std::string to_dot(const ControlFlowGraph& cfg) {
  std::ostringstream os;
  os << "digraph cfg {\n  node [shape=box, fontname=monospace];\n";
  for (const auto& n : cfg.nodes) {
    os << "  n" << n.id << " [label=\"" << n.id << ": " << to_string(n.kind);
    if (!n.text.empty() && n.kind != NodeKind::entry && n.kind != NodeKind::exit)
      os << "\\n" << dot_escape(n.text);
    os << "\"];\n";
  }
  for (auto [a, b] : cfg.edges) os << "  n" << a << " -> n" << b << ";\n";
  os << "}\n";
  return os.str();
}

std::string reach_to_json(const ControlFlowGraph& cfg, const ReachSets& reach) {
  nlohmann::json doc;
  doc["definitions"] = nlohmann::json::array();
  for (const auto& d : reach.definitions)
    doc["definitions"].push_back({{"id", d.def_id}, {"variable", d.variable}, {"node", d.node}});
  doc["nodes"] = nlohmann::json::array();
  for (const auto& n : cfg.nodes) {
    const auto i = static_cast<std::size_t>(n.id);
    doc["nodes"].push_back({{"id", n.id},
                            {"kind", std::string(to_string(n.kind))},
                            {"line", n.line},
                            {"text", n.text},
                            {"in", members(reach.in[i])},
                            {"out", members(reach.out[i])}});
  }
  return doc.dump(2) + "\n";
}

}  // namespace msivd::dfa
