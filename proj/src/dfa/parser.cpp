// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#include "msivd/dfa/parser.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <queue>
#include <set>

namespace msivd::dfa {
namespace {

enum class Tok { ident, number, string, chr, punct, end };

struct Token {
  Tok kind = Tok::end;
  std::string text;
  std::size_t offset = 0;
  int line = 1;
  int column = 1;
};

constexpr std::array<std::string_view, 15> kTypeWords{
    "int",    "char",   "long",  "short", "unsigned", "signed", "float", "double",
    "void",   "bool",   "const", "size_t", "static",  "uint8_t", "int64_t"};

constexpr std::array<std::string_view, 14> kUnsupportedWords{
    "for",   "do",      "switch", "case",   "goto",   "break",  "continue",
    "struct", "union",  "enum",   "typedef", "sizeof", "default", "volatile"};

bool is_type_word(std::string_view w) {
  if (std::find(kTypeWords.begin(), kTypeWords.end(), w) != kTypeWords.end()) return true;
  return w.size() > 2 && w.ends_with("_t");
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space_and_comments();
      Token t;
      t.offset = pos_;
      t.line = line_;
      t.column = col_;
      if (pos_ >= src_.size()) {
        out.push_back(t);
        return out;
      }
      const char c = src_[pos_];
      if (c == '#') {
        throw UnsupportedConstruct(where(t) + "unsupported construct: preprocessor directive",
                                   t.offset, t.line, t.column);
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        t.kind = Tok::ident;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
          t.text += advance();
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        t.kind = Tok::number;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
          t.text += advance();
      } else if (c == '"' || c == '\'') {
        t.kind = c == '"' ? Tok::string : Tok::chr;
        t.text += advance();
        while (pos_ < src_.size() && src_[pos_] != c) {
          if (src_[pos_] == '\n') break;
          if (src_[pos_] == '\\' && pos_ + 1 < src_.size()) t.text += advance();
          t.text += advance();
        }
        if (pos_ >= src_.size() || src_[pos_] != c) {
          throw ParseError(where(t) + "unterminated literal", t.offset, t.line, t.column);
        }
        t.text += advance();
      } else {
        t.kind = Tok::punct;
        static constexpr std::array<std::string_view, 22> multi{
            "<<=", ">>=", "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=",
            "-=",  "*=",  "/=", "%=", "&=", "|=", "^=", "<<", ">>", "->", "::"};
        std::string_view rest = src_.substr(pos_);
        std::size_t len = 1;
        for (auto m : multi) {
          if (rest.starts_with(m)) {
            len = m.size();
            break;
          }
        }
        for (std::size_t i = 0; i < len; ++i) t.text += advance();
        static constexpr std::string_view known = "+-*/%<>=!&|^~(){};,?:[].";
        if (len == 1 && known.find(t.text[0]) == std::string_view::npos) {
          throw ParseError(where(t) + "unexpected character '" + t.text + "'", t.offset, t.line,
                           t.column);
        }
      }
      out.push_back(std::move(t));
    }
  }

  static std::string where(const Token& t) {
    return std::to_string(t.line) + ":" + std::to_string(t.column) + ": ";
  }

 private:
  char advance() {
    const char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_space_and_comments() {
    while (pos_ < src_.size()) {
      if (std::isspace(static_cast<unsigned char>(src_[pos_]))) {
        advance();
      } else if (src_.substr(pos_).starts_with("//")) {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (src_.substr(pos_).starts_with("/*")) {
        advance();
        advance();
        while (pos_ < src_.size() && !src_.substr(pos_).starts_with("*/")) advance();
        if (pos_ < src_.size()) {
          advance();
          advance();
        }
      } else {
        break;
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

constexpr int kExitPlaceholder = -1;

class Parser {
 public:
  Parser(std::string_view src, std::vector<Token> toks) : src_(src), toks_(std::move(toks)) {}

  ControlFlowGraph run() {
    add_node(NodeKind::entry, std::nullopt, {}, 0, "entry");
    std::vector<int> preds{0};
    if (looks_like_function()) {
      preds = function(preds);
      if (peek().kind != Tok::end) fail(peek(), "expected end of input after function body");
    } else {
      while (peek().kind != Tok::end) preds = statement(preds);
    }
    for (int p : preds) edges_.emplace_back(p, kExitPlaceholder);
    return finish();
  }

 private:
  // ---- token helpers --------------------------------------------------------
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool is(std::string_view text, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return (t.kind == Tok::punct || t.kind == Tok::ident) && t.text == text;
  }
  bool accept(std::string_view text) {
    if (!is(text)) return false;
    next();
    return true;
  }
  const Token& expect(std::string_view text) {
    if (!is(text)) fail(peek(), "expected '" + std::string(text) + "'");
    return next();
  }
  std::string expect_ident() {
    if (peek().kind != Tok::ident) fail(peek(), "expected identifier");
    check_word(peek());
    return next().text;
  }
  [[noreturn]] void fail(const Token& t, const std::string& msg) const {
    const std::string found = t.kind == Tok::end ? "end of input" : "'" + t.text + "'";
    throw ParseError(Lexer::where(t) + msg + ", found " + found, t.offset,
                     static_cast<std::size_t>(t.line), static_cast<std::size_t>(t.column));
  }
  [[noreturn]] void unsupported(const Token& t, const std::string& what) const {
    throw UnsupportedConstruct(Lexer::where(t) + "unsupported construct: " + what, t.offset,
                               static_cast<std::size_t>(t.line),
                               static_cast<std::size_t>(t.column));
  }
  void check_word(const Token& t) const {
    if (t.kind != Tok::ident) return;
    if (std::find(kUnsupportedWords.begin(), kUnsupportedWords.end(), t.text) !=
        kUnsupportedWords.end())
      unsupported(t, "'" + t.text + "'");
  }

  // ---- graph building -------------------------------------------------------
  int add_node(NodeKind kind, std::optional<std::string> defines, std::vector<std::string> tags,
               int line, std::string text) {
    CfgNode n;
    n.id = static_cast<int>(nodes_.size());
    n.kind = kind;
    n.defines = std::move(defines);
    n.tags = std::move(tags);
    n.line = line;
    n.text = std::move(text);
    nodes_.push_back(std::move(n));
    return nodes_.back().id;
  }
  void link(const std::vector<int>& preds, int to) {
    for (int p : preds) edges_.emplace_back(p, to);
  }
  std::string slice(std::size_t from_tok, std::size_t to_tok) const {
    const std::size_t a = toks_[from_tok].offset;
    const std::size_t b = to_tok < toks_.size() ? toks_[to_tok].offset : src_.size();
    std::string s(src_.substr(a, b > a ? b - a : 0));
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    return s;
  }

  // ---- grammar --------------------------------------------------------------
  bool looks_like_function() const {
    std::size_t i = 0;
    if (peek().kind != Tok::ident || !is_type_word(peek().text)) return false;
    while (peek(i).kind == Tok::ident && is_type_word(peek(i).text)) ++i;
    return peek(i).kind == Tok::ident && is("(", i + 1);
  }

  std::vector<int> function(std::vector<int> preds) {
    while (peek().kind == Tok::ident && is_type_word(peek().text)) next();
    if (is("*")) unsupported(peek(), "pointer type");
    expect_ident();
    expect("(");
    if (is("void") && is(")", 1)) next();
    if (!is(")")) {
      do {
        const std::size_t start = pos_;
        if (peek().kind != Tok::ident || !is_type_word(peek().text))
          fail(peek(), "expected parameter type");
        while (peek().kind == Tok::ident && is_type_word(peek().text)) next();
        if (is("*") || is("&")) unsupported(peek(), "pointer parameter");
        const Token& name_tok = peek();
        const std::string name = expect_ident();
        if (is("[")) unsupported(peek(), "array parameter");
        const int id = add_node(NodeKind::assign, name, {"param"}, name_tok.line, slice(start, pos_));
        link(preds, id);
        preds = {id};
      } while (accept(","));
    }
    expect(")");
    if (!is("{")) fail(peek(), "expected function body");
    return statement(preds);
  }

  std::vector<int> statement(std::vector<int> preds) {
    const Token& t = peek();
    check_word(t);
    if (t.kind == Tok::end) fail(t, "expected statement");
    if (accept(";")) return preds;
    if (accept("{")) {
      while (!is("}")) {
        if (peek().kind == Tok::end) fail(peek(), "expected '}'");
        preds = statement(preds);
      }
      next();
      return preds;
    }
    if (is("if")) return if_statement(preds);
    if (is("while")) return while_statement(preds);
    if (is("return")) return return_statement(preds);
    if (is("else")) fail(t, "'else' without 'if'");
    if (t.kind == Tok::ident && is_type_word(t.text)) return declaration(preds);
    return expression_statement(preds);
  }

  std::vector<int> if_statement(std::vector<int> preds) {
    const std::size_t start = pos_;
    const int line = next().line;
    expect("(");
    ExprInfo cond;
    expression(cond);
    expect(")");
    const int branch =
        add_node(NodeKind::branch, std::nullopt, cond.tags(), line, slice(start, pos_));
    link(preds, branch);
    std::vector<int> out = statement({branch});
    if (accept("else")) {
      auto other = statement({branch});
      out.insert(out.end(), other.begin(), other.end());
    } else {
      out.push_back(branch);
    }
    return out;
  }

  std::vector<int> while_statement(std::vector<int> preds) {
    const std::size_t start = pos_;
    const int line = next().line;
    expect("(");
    ExprInfo cond;
    expression(cond);
    expect(")");
    const int head =
        add_node(NodeKind::loop_head, std::nullopt, cond.tags(), line, slice(start, pos_));
    link(preds, head);
    auto body_exits = statement({head});
    link(body_exits, head);
    return {head};
  }

  std::vector<int> return_statement(std::vector<int> preds) {
    const std::size_t start = pos_;
    const int line = next().line;
    ExprInfo value;
    if (!is(";")) expression(value);
    expect(";");
    const int id = add_node(NodeKind::ret, std::nullopt, value.tags(), line, slice(start, pos_));
    link(preds, id);
    edges_.emplace_back(id, kExitPlaceholder);
    return {};
  }

  std::vector<int> declaration(std::vector<int> preds) {
    while (peek().kind == Tok::ident && is_type_word(peek().text)) next();
    do {
      if (is("*")) unsupported(peek(), "pointer declaration");
      const std::size_t start = pos_;
      const Token& name_tok = peek();
      const std::string name = expect_ident();
      if (is("[")) unsupported(peek(), "array declaration");
      if (is("(")) unsupported(peek(), "nested function declaration");
      if (accept("=")) {
        ExprInfo rhs;
        expression(rhs);
        const NodeKind kind = rhs.calls.empty() ? NodeKind::assign : NodeKind::call;
        const int id = add_node(kind, name, rhs.tags(), name_tok.line, slice(start, pos_));
        link(preds, id);
        preds = {id};
      }
    } while (accept(","));
    expect(";");
    return preds;
  }

  std::vector<int> expression_statement(std::vector<int> preds) {
    const std::size_t start = pos_;
    const Token& first = peek();
    if (is("*")) unsupported(first, "pointer dereference");
    if (is("++") || is("--")) {
      const std::string op = next().text;
      const std::string name = expect_ident();
      expect(";");
      const int id = add_node(NodeKind::assign, name, {"op:" + op}, first.line, slice(start, pos_));
      link(preds, id);
      return {id};
    }
    if (first.kind != Tok::ident) fail(first, "expected statement");
    if (is("(", 1)) {
      ExprInfo call;
      expression(call);
      expect(";");
      const int id = add_node(NodeKind::call, std::nullopt, call.tags(), first.line, slice(start, pos_));
      link(preds, id);
      return {id};
    }
    const std::string name = expect_ident();
    if (is("[")) unsupported(peek(), "array subscript");
    if (is("->") || is(".")) unsupported(peek(), "member access");
    ExprInfo rhs;
    if (is("++") || is("--")) {
      rhs.ops.insert(next().text);
    } else {
      static constexpr std::array<std::string_view, 11> assign_ops{
          "=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>="};
      const Token& op = peek();
      if (op.kind != Tok::punct ||
          std::find(assign_ops.begin(), assign_ops.end(), op.text) == assign_ops.end())
        fail(op, "expected assignment");
      next();
      if (op.text != "=") rhs.ops.insert(op.text.substr(0, op.text.size() - 1));
      expression(rhs);
    }
    expect(";");
    const NodeKind kind = rhs.calls.empty() ? NodeKind::assign : NodeKind::call;
    const int id = add_node(kind, name, rhs.tags(), first.line, slice(start, pos_));
    link(preds, id);
    return {id};
  }

  // ---- expressions ----------------------------------------------------------
  struct ExprInfo {
    std::vector<std::string> calls;
    std::set<std::string> consts;
    std::set<std::string> ops;
    std::vector<std::string> tags() const {
      std::vector<std::string> out;
      for (const auto& c : calls) out.push_back("api:" + c);
      for (const auto& c : consts) out.push_back("const:" + c);
      for (const auto& o : ops) out.push_back("op:" + o);
      return out;
    }
  };

  static int precedence(std::string_view op) {
    if (op == "||") return 1;
    if (op == "&&") return 2;
    if (op == "|") return 3;
    if (op == "^") return 4;
    if (op == "&") return 5;
    if (op == "==" || op == "!=") return 6;
    if (op == "<" || op == ">" || op == "<=" || op == ">=") return 7;
    if (op == "<<" || op == ">>") return 8;
    if (op == "+" || op == "-") return 9;
    if (op == "*" || op == "/" || op == "%") return 10;
    return 0;
  }

  void expression(ExprInfo& info, int min_prec = 1) {
    unary(info);
    for (;;) {
      const Token& t = peek();
      if (t.kind != Tok::punct) return;
      if (t.text == "?") unsupported(t, "conditional operator");
      if (t.text == "=" || (t.text.size() >= 2 && t.text.back() == '=' && precedence(t.text) == 0 &&
                            t.text != "==" && t.text != "!="))
        unsupported(t, "assignment inside an expression");
      const int p = precedence(t.text);
      if (p == 0 || p < min_prec) return;
      info.ops.insert(next().text);
      expression(info, p + 1);
    }
  }

  void unary(ExprInfo& info) {
    const Token& t = peek();
    if (t.kind == Tok::punct) {
      if (t.text == "*") unsupported(t, "pointer dereference");
      if (t.text == "&") unsupported(t, "address-of operator");
      if (t.text == "++" || t.text == "--") unsupported(t, "increment inside an expression");
      if (t.text == "!" || t.text == "-" || t.text == "~" || t.text == "+") {
        info.ops.insert(next().text);
        unary(info);
        return;
      }
      if (t.text == "(") {
        if (peek(1).kind == Tok::ident && is_type_word(peek(1).text) && is(")", 2))
          unsupported(t, "cast");
        if (peek(1).kind == Tok::ident && is_type_word(peek(1).text)) unsupported(t, "cast");
        next();
        expression(info);
        expect(")");
        return;
      }
    }
    primary(info);
  }

  void primary(ExprInfo& info) {
    const Token& t = peek();
    check_word(t);
    switch (t.kind) {
      case Tok::number:
      case Tok::chr:
        info.consts.insert(next().text);
        break;
      case Tok::string:
        info.consts.insert("str");
        next();
        break;
      case Tok::ident: {
        const std::string name = next().text;
        if (accept("(")) {
          info.calls.push_back(name);
          if (!is(")")) {
            do {
              expression(info);
            } while (accept(","));
          }
          expect(")");
        }
        break;
      }
      default:
        fail(t, "expected expression");
    }
    if (is("[")) unsupported(peek(), "array subscript");
    if (is("->") || is(".")) unsupported(peek(), "member access");
    if (is("++") || is("--")) unsupported(peek(), "increment inside an expression");
  }

  // ---- finalization ---------------------------------------------------------
  ControlFlowGraph finish() {
    const int exit_id = add_node(NodeKind::exit, std::nullopt, {}, 0, "exit");
    for (auto& e : edges_)
      if (e.second == kExitPlaceholder) e.second = exit_id;

    // Keep only nodes reachable from entry; ids stay in source order.
    const std::size_t n = nodes_.size();
    std::vector<std::vector<int>> succ(n);
    for (auto [a, b] : edges_) succ[static_cast<std::size_t>(a)].push_back(b);
    std::vector<bool> seen(n, false);
    std::queue<int> q;
    q.push(0);
    seen[0] = true;
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v : succ[static_cast<std::size_t>(u)])
        if (!seen[static_cast<std::size_t>(v)]) {
          seen[static_cast<std::size_t>(v)] = true;
          q.push(v);
        }
    }
    // The exit always stays, even after an infinite loop.
    seen[static_cast<std::size_t>(exit_id)] = true;

    std::vector<int> remap(n, -1);
    ControlFlowGraph cfg;
    for (std::size_t i = 0; i < n; ++i) {
      if (!seen[i]) continue;
      remap[i] = static_cast<int>(cfg.nodes.size());
      CfgNode node = nodes_[i];
      node.id = remap[i];
      cfg.nodes.push_back(std::move(node));
    }
    std::set<std::pair<int, int>> unique;
    for (auto [a, b] : edges_) {
      const int ra = remap[static_cast<std::size_t>(a)], rb = remap[static_cast<std::size_t>(b)];
      if (ra >= 0 && rb >= 0) unique.emplace(ra, rb);
    }
    cfg.edges.assign(unique.begin(), unique.end());
    cfg.entry = 0;
    cfg.exit = static_cast<int>(cfg.nodes.size()) - 1;
    return cfg;
  }

  std::string_view src_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<CfgNode> nodes_;
  std::vector<std::pair<int, int>> edges_;
};

}  // namespace

ControlFlowGraph parse_mini_c(std::string_view source) {
  Lexer lexer(source);
  Parser parser(source, lexer.run());
  return parser.run();
}

}  // namespace msivd::dfa
