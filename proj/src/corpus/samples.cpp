// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#include "msivd/corpus/samples.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "msivd/common/error.hpp"
#include "msivd/common/rng.hpp"
#include "msivd/corpus/cwe.hpp"

namespace msivd::corpus {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

std::size_t count_lines(std::string_view text) { return split_lines(text).size(); }

std::vector<std::string> VulnerabilityRecord::patch_links() const {
  std::vector<std::string> out;
  for (const auto& r : references)
    if (std::find(r.tags.begin(), r.tags.end(), "Patch") != r.tags.end()) out.push_back(r.url);
  return out;
}

double LineDiff::changed_fraction() const {
  return pre_lines == 0 ? 0.0 : static_cast<double>(added + removed) / static_cast<double>(pre_lines);
}

namespace {

constexpr std::size_t kMaxLcsCells = 16'000'000;

std::size_t lcs_length(std::span<const std::string_view> a, std::span<const std::string_view> b) {
  if (a.empty() || b.empty()) return 0;
  if (a.size() * b.size() > kMaxLcsCells) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string join_lines(std::span<const std::string_view> lines, std::size_t from, std::size_t to) {
  std::string out;
  for (std::size_t i = from; i < to; ++i) {
    out += lines[i];
    out += '\n';
  }
  return out;
}

std::size_t line_cost(std::string_view line) { return line.size() + 1; }

LineRange merged(std::span<const LineRange> ranges) {
  LineRange r{ranges.front().start, ranges.front().end};
  for (const auto& x : ranges) {
    r.start = std::min(r.start, x.start);
    r.end = std::max(r.end, x.end);
  }
  return r;
}

LineRange clamp_focus(LineRange r, std::size_t n) {
  const int last = static_cast<int>(std::max<std::size_t>(n, 1));
  r.start = std::clamp(r.start, 1, last);
  r.end = std::clamp(r.end, r.start, last);
  return r;
}

std::uint64_t window_seed(const WindowOptions& o, std::string_view key) {
  return mix_seed(o.seed, hash_string(key));
}

}  // namespace

LineDiff diff_lines(std::string_view pre, std::string_view post) {
  const auto a = split_lines(pre);
  const auto b = split_lines(post);
  std::size_t prefix = 0;
  while (prefix < a.size() && prefix < b.size() && a[prefix] == b[prefix]) ++prefix;
  std::size_t suffix = 0;
  while (suffix < a.size() - prefix && suffix < b.size() - prefix &&
         a[a.size() - 1 - suffix] == b[b.size() - 1 - suffix])
    ++suffix;
  const std::span<const std::string_view> mid_a(a.data() + prefix, a.size() - prefix - suffix);
  const std::span<const std::string_view> mid_b(b.data() + prefix, b.size() - prefix - suffix);
  const std::size_t common = lcs_length(mid_a, mid_b);

  LineDiff d;
  d.pre_lines = a.size();
  d.removed = mid_a.size() - common;
  d.added = mid_b.size() - common;
  const int p = static_cast<int>(prefix);
  if (mid_a.empty()) {
    // Pure insertion: point at the line before the inserted code.
    d.pre_range = {std::max(1, p), std::max(1, p)};
  } else {
    d.pre_range = {p + 1, p + static_cast<int>(mid_a.size())};
  }
  if (a.empty()) d.pre_range = {0, 0};
  d.post_range = mid_b.empty() ? LineRange{std::max(1, p), std::max(1, p)}
                               : LineRange{p + 1, p + static_cast<int>(mid_b.size())};
  d.post_hunk = join_lines(b, prefix, b.size() - suffix);
  return d;
}

LineRange choose_window(std::span<const std::string_view> lines, LineRange focus,
                        std::size_t max_tokens, Rng& rng) {
  const std::size_t n = lines.size();
  if (n == 0) return {0, 0};
  focus = clamp_focus(focus, n);
  std::size_t lo = static_cast<std::size_t>(focus.start) - 1;  // 0-based inclusive
  std::size_t hi = static_cast<std::size_t>(focus.end);        // exclusive
  std::size_t used = 0;
  for (std::size_t i = lo; i < hi; ++i) used += line_cost(lines[i]);
  if (used > max_tokens) {
    // The change alone overflows: keep its head.
    used = 0;
    hi = lo;
    while (hi < n && used + line_cost(lines[hi]) <= max_tokens) used += line_cost(lines[hi++]);
    if (hi == lo) hi = lo + 1;
    return {static_cast<int>(lo) + 1, static_cast<int>(hi)};
  }
  const std::size_t spare = max_tokens - used;
  const auto before_budget = static_cast<std::size_t>(std::floor(rng.uniform() * static_cast<double>(spare)));
  while (lo > 0 && used + line_cost(lines[lo - 1]) <= (max_tokens - spare) + before_budget) {
    --lo;
    used += line_cost(lines[lo]);
  }
  while (hi < n && used + line_cost(lines[hi]) <= max_tokens) used += line_cost(lines[hi++]);
  while (lo > 0 && used + line_cost(lines[lo - 1]) <= max_tokens) used += line_cost(lines[--lo]);
  return {static_cast<int>(lo) + 1, static_cast<int>(hi)};
}

bool is_c_family_path(std::string_view path) {
  static constexpr std::array<std::string_view, 11> exts{
      ".c", ".h", ".cc", ".cpp", ".cxx", ".c++", ".hh", ".hpp", ".hxx", ".h++", ".inl"};
  const auto dot = path.rfind('.');
  if (dot == std::string_view::npos) return false;
  std::string ext(path.substr(dot));
  for (auto& ch : ext) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return std::find(exts.begin(), exts.end(), ext) != exts.end();
}

SampleBatch split_into_file_samples(const VulnerabilityRecord& record, const WindowOptions& options) {
  if (record.file_patches.empty())
    throw Error(record.cve_id + ": record has no file patches");
  SampleBatch out;
  for (std::size_t i = 0; i < record.file_patches.size(); ++i) {
    const auto& fp = record.file_patches[i];
    const std::string id = record.cve_id + ":" + std::to_string(i);
    if (fp.pre_code.empty()) {
      out.skipped.push_back({id, "file patch '" + fp.path + "' has no pre-change code"});
      continue;
    }
    if (options.cpp_only && !is_c_family_path(fp.path)) {
      out.skipped.push_back({id, "file '" + fp.path + "' is not C/C++"});
      continue;
    }
    const auto diff = diff_lines(fp.pre_code, fp.post_code);
    const auto lines = split_lines(fp.pre_code);
    const LineRange focus =
        clamp_focus(fp.changed_lines.empty() ? diff.pre_range : merged(fp.changed_lines), lines.size());
    Rng rng(window_seed(options, id));
    const auto win = choose_window(lines, focus, options.max_tokens, rng);

    CodeSample s;
    s.sample_id = id;
    s.code = join_lines(lines, static_cast<std::size_t>(win.start) - 1, static_cast<std::size_t>(win.end));
    s.label = true;
    s.cwe_id = record.cwe_id;
    s.cwe_category = classify_cwe(record.cwe_id);
    s.description = record.description;
    s.vuln_line_start = std::max(focus.start, win.start) - win.start + 1;
    s.vuln_line_end = std::min(focus.end, win.end) - win.start + 1;
    s.fix_code = diff.post_hunk;
    s.origin_date = record.fix_commit_date;
    out.samples.push_back(std::move(s));
    out.changed_fractions.push_back(diff.changed_fraction());
  }
  return out;
}

CodeSample make_negative_sample(const VulnerabilityRecord& record, std::size_t patch_index,
                                const WindowOptions& options) {
  if (patch_index >= record.file_patches.size())
    throw Error(record.cve_id + ": patch index " + std::to_string(patch_index) + " out of range (" +
                std::to_string(record.file_patches.size()) + " patches)");
  const auto& fp = record.file_patches[patch_index];
  if (fp.post_code.empty())
    throw Error(record.cve_id + ": patch " + std::to_string(patch_index) + " has no post-fix code");
  const std::string id = record.cve_id + ":" + std::to_string(patch_index) + ":neg";
  const auto diff = diff_lines(fp.pre_code, fp.post_code);
  const auto lines = split_lines(fp.post_code);
  Rng rng(window_seed(options, id));
  const auto win = choose_window(lines, diff.post_range, options.max_tokens, rng);

  CodeSample s;
  s.sample_id = id;
  s.code = join_lines(lines, static_cast<std::size_t>(win.start) - 1, static_cast<std::size_t>(win.end));
  s.label = false;
  s.cwe_id = record.cwe_id;
  s.cwe_category = classify_cwe(record.cwe_id);
  s.description = record.description;
  s.origin_date = record.fix_commit_date;
  return s;
}

std::string_view to_string(DropReason r) {
  switch (r) {
    case DropReason::Incomplete: return "Incomplete";
    case DropReason::NoChange: return "NoChange";
    case DropReason::MassRewrite: return "MassRewrite";
    case DropReason::TooShort: return "TooShort";
  }
  return "?";
}

std::optional<DropReason> apply_exclusion_filters(const CodeSample& sample, double changed_fraction,
                                                  const ExclusionOptions& options) {
  if (options.function_level) {
    std::string_view code = sample.code;
    while (!code.empty() && std::isspace(static_cast<unsigned char>(code.back()))) code.remove_suffix(1);
    if (code.ends_with(");") || !code.ends_with("}")) return DropReason::Incomplete;
  }
  if (sample.label && changed_fraction <= 0.0) return DropReason::NoChange;
  if (sample.label && changed_fraction > options.max_changed_fraction) return DropReason::MassRewrite;
  if (count_lines(sample.code) < options.min_lines) return DropReason::TooShort;
  return std::nullopt;
}

std::vector<CodeSample> mix_classes(std::span<const CodeSample> samples, double negative_share,
                                    std::uint64_t seed) {
  if (!(negative_share > 0.0 && negative_share < 1.0))
    throw UsageError("negative share must lie strictly between 0 and 1");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < samples.size(); ++i) (samples[i].label ? pos : neg).push_back(i);
  const double p = static_cast<double>(pos.size()), n = static_cast<double>(neg.size());
  std::size_t keep_pos = pos.size(), keep_neg = neg.size();
  if (n / std::max(1.0, n + p) > negative_share) {
    keep_neg = static_cast<std::size_t>(std::llround(p * negative_share / (1.0 - negative_share)));
  } else {
    keep_pos = static_cast<std::size_t>(std::llround(n * (1.0 - negative_share) / negative_share));
  }
  Rng rng(seed);
  rng.shuffle(pos);
  rng.shuffle(neg);
  pos.resize(std::min(keep_pos, pos.size()));
  neg.resize(std::min(keep_neg, neg.size()));
  std::vector<std::size_t> kept(pos);
  kept.insert(kept.end(), neg.begin(), neg.end());
  std::sort(kept.begin(), kept.end());
  std::vector<CodeSample> out;
  out.reserve(kept.size());
  for (auto i : kept) out.push_back(samples[i]);
  return out;
}

}  // namespace msivd::corpus
