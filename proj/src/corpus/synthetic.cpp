// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#include "msivd/corpus/synthetic.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <string>
#include <string_view>

#include "msivd/common/error.hpp"
#include "msivd/common/rng.hpp"

namespace msivd::corpus {

namespace {

constexpr std::array<std::string_view, 6> kFunctions{"parse_hdr", "read_pkt", "load_chunk",
                                                    "handle_msg", "fill_block", "decode_rec"};
constexpr std::array<std::string_view, 4> kSources{"read_len", "get_size", "recv_count", "next_field"};
constexpr std::array<std::string_view, 3> kSinks{"copy_buf", "write_blk", "move_bytes"};
constexpr std::array<std::string_view, 4> kLengths{"n", "len", "size", "cnt"};
constexpr std::array<std::string_view, 3> kParams{"a", "off", "base"};
constexpr std::array<std::string_view, 3> kLocals{"k", "t", "pos"};
constexpr std::array<std::string_view, 2> kMasks{" % 16", " & 15"};

template <typename A>
std::string pick(Rng& rng, const A& options) {
  return std::string(options[rng.below(options.size())]);
}

struct Program {
  std::string code;
  int sink_line = 0;
  std::string sanitized_fix;
};

Program generate(Rng& rng, bool vulnerable, bool decoy) {
  const std::string fn = pick(rng, kFunctions);
  const std::string src = pick(rng, kSources);
  const std::string sink = pick(rng, kSinks);
  const std::string len = pick(rng, kLengths);
  const std::string param = pick(rng, kParams);
  const std::string local = pick(rng, kLocals);
  const std::string mask = pick(rng, kMasks);

  std::vector<std::string> lines;
  lines.push_back("int " + fn + "(int " + param + ") {");
  lines.push_back("  int " + len + " = " + src + "();");
  lines.push_back("  int " + local + " = " + param + " + " + std::to_string(1 + rng.below(9)) + ";");
  switch (rng.below(3)) {
    case 0: lines.push_back("  " + local + " = " + local + " * 2;"); break;
    case 1: lines.push_back("  if (" + param + " > 4) { " + local + " = " + local + " - 1; }"); break;
    default: break;
  }
  const std::string guard = "  " + len + " = " + len + mask + ";";
  if (!vulnerable) lines.push_back(guard);
  if (vulnerable && decoy) lines.push_back("  " + local + " = " + local + mask + ";");
  lines.push_back("  " + sink + "(" + local + ", " + len + ");");
  Program p;
  p.sink_line = static_cast<int>(lines.size());
  p.sanitized_fix = guard.substr(2) + "\n" + lines.back().substr(2) + "\n";
  lines.push_back("  return " + local + ";");
  lines.push_back("}");
  for (const auto& l : lines) p.code += l + "\n";
  return p;
}

Date shifted(const Date& d, long days) {
  const auto base = std::chrono::sys_days(
      std::chrono::year{d.year()} / std::chrono::month{d.month()} / std::chrono::day{d.day()});
  return Date(std::chrono::year_month_day(base + std::chrono::days{days}));
}

}  // namespace

std::vector<CodeSample> make_synthetic_corpus(const SyntheticOptions& options) {
  if (options.count == 0) throw UsageError("synthetic corpus needs at least one sample");
  Rng rng(options.seed);
  const auto positives = static_cast<std::size_t>(std::llround(options.positive_share * static_cast<double>(options.count)));
  const auto early = static_cast<std::size_t>(std::llround(options.early_share * static_cast<double>(options.count)));

  // Stratify dates so both periods see the same class balance.
  std::vector<bool> labels(options.count), is_early(options.count);
  for (std::size_t i = 0; i < options.count; ++i) labels[i] = i < positives;
  std::vector<std::size_t> pos_idx, neg_idx;
  for (std::size_t i = 0; i < options.count; ++i) (labels[i] ? pos_idx : neg_idx).push_back(i);
  rng.shuffle(pos_idx);
  rng.shuffle(neg_idx);
  const auto early_pos = static_cast<std::size_t>(
      std::llround(static_cast<double>(early) * static_cast<double>(positives) / static_cast<double>(options.count)));
  for (std::size_t k = 0; k < pos_idx.size(); ++k) is_early[pos_idx[k]] = k < early_pos;
  for (std::size_t k = 0; k < neg_idx.size(); ++k) is_early[neg_idx[k]] = k < early - std::min(early, early_pos);

  std::vector<CodeSample> out;
  out.reserve(options.count);
  for (std::size_t i = 0; i < options.count; ++i) {
    const bool vulnerable = labels[i];
    const bool decoy = vulnerable && rng.uniform() < options.decoy_share;
    const auto prog = generate(rng, vulnerable, decoy);
    CodeSample s;
    s.sample_id = "SYN-" + std::to_string(1000 + i) + (vulnerable ? ":0" : ":0:neg");
    s.code = prog.code;
    s.label = vulnerable;
    s.cwe_id = "CWE-787";
    s.cwe_category = CweCategory::BufferError;
    s.description = "Unchecked length reaches a buffer copy.";
    if (vulnerable) {
      s.vuln_line_start = prog.sink_line;
      s.vuln_line_end = prog.sink_line;
      s.fix_code = prog.sanitized_fix;
    }
    s.origin_date = is_early[i] ? shifted(options.cutoff, -1 - static_cast<long>(rng.below(730)))
                                : shifted(options.cutoff, static_cast<long>(rng.below(365)));
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace msivd::corpus
