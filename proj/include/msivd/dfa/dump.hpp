// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "msivd/dfa/cfg.hpp"
#include "msivd/dfa/reaching.hpp"

namespace msivd::dfa {

/// Graphviz rendering of the CFG, one box per statement.
std::string to_dot(const ControlFlowGraph& cfg);

/// {"definitions": [{id, variable, node}], "nodes": [{id, kind, line, text, in, out}]}
std::string reach_to_json(const ControlFlowGraph& cfg, const ReachSets& reach);

}  // namespace msivd::dfa
