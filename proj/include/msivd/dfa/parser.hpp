// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string_view>

#include "msivd/common/error.hpp"
#include "msivd/dfa/cfg.hpp"

namespace msivd::dfa {

/// A construct outside the mini-C subset (pointers, casts, arrays, for/switch,
/// preprocessor lines, ...). Raised instead of silently skipping code.
class UnsupportedConstruct : public ParseError {
 public:
  using ParseError::ParseError;
};

/// Parses a mini-C function body (or a bare statement list) into a CFG.
///
/// Accepted grammar:
///   unit      := function | stmt*
///   function  := type IDENT '(' params ')' block
///   stmt      := ';' | block | decl | IDENT assign-op expr ';' | IDENT ('++'|'--') ';'
///              | call ';' | 'if' '(' expr ')' stmt ['else' stmt]
///              | 'while' '(' expr ')' stmt | 'return' [expr] ';'
///   expr      := binary/unary arithmetic, comparison and logic over
///                identifiers, integer/char/string literals and calls
///
/// Statements after a `return` that no path reaches are dropped. Syntax errors
/// carry a 1-based line and column.
ControlFlowGraph parse_mini_c(std::string_view source);

}  // namespace msivd::dfa
