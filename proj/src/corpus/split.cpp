// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#include "msivd/corpus/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "msivd/common/error.hpp"
#include "msivd/common/rng.hpp"

namespace msivd::corpus {

std::string_view to_string(SplitName s) {
  switch (s) {
    case SplitName::Train: return "train";
    case SplitName::Eval: return "eval";
    case SplitName::Test: return "test";
  }
  return "?";
}

SplitName parse_split_name(std::string_view text) {
  if (text == "train") return SplitName::Train;
  if (text == "eval") return SplitName::Eval;
  if (text == "test") return SplitName::Test;
  throw ParseError("unknown split '" + std::string(text) + "'", 0);
}

void SplitSpec::validate() const {
  double total = 0;
  for (double r : ratios) {
    if (!(r >= 0.0)) throw UsageError("split ratios must be non-negative");
    total += r;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw UsageError("split ratios must sum to 1 (got " + std::to_string(total) + ")");
}

const std::vector<CodeSample>& Split::operator[](SplitName s) const {
  switch (s) {
    case SplitName::Train: return train;
    case SplitName::Eval: return eval;
    case SplitName::Test: return test;
  }
  return train;
}

std::array<std::size_t, 3> split_targets(std::size_t total, const std::array<double, 3>& ratios) {
  std::array<std::size_t, 3> out{};
  std::array<double, 3> rem{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double exact = ratios[i] * static_cast<double>(total);
    out[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    rem[i] = exact - static_cast<double>(out[i]);
    assigned += out[i];
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return rem[a] > rem[b]; });
  for (std::size_t k = 0; assigned < total && k < 3; ++k, ++assigned) ++out[order[k]];
  return out;
}

namespace {

std::string counts_message(std::size_t before, std::size_t after, const SplitSpec& split_spec) {
  return std::to_string(before) + " samples before " + split_spec.cutoff_date.to_string() + ", " +
         std::to_string(after) + " on or after";
}

std::vector<std::size_t> shuffled(std::vector<std::size_t> idx, Rng& rng) {
  rng.shuffle(idx);
  return idx;
}

}  // namespace

Split make_split(std::span<const CodeSample> samples, const SplitSpec& split_spec) {
  split_spec.validate();
  std::vector<std::size_t> early, late;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!split_spec.temporal || samples[i].origin_date < split_spec.cutoff_date)
      early.push_back(i);
    else
      late.push_back(i);
  }

  std::array<std::size_t, 3> targets{};
  if (split_spec.temporal) {
    std::size_t m = samples.size();
    for (;; --m) {
      targets = split_targets(m, split_spec.ratios);
      if (targets[0] <= early.size() && targets[1] + targets[2] <= late.size()) break;
      if (m == 0) break;
    }
  } else {
    targets = split_targets(samples.size(), split_spec.ratios);
  }
  for (std::size_t k = 0; k < 3; ++k) {
    if (split_spec.ratios[k] > 0.0 && targets[k] == 0)
      throw Error("cannot build a non-empty " + std::string(to_string(static_cast<SplitName>(k))) +
                  " split: " + counts_message(early.size(), late.size(), split_spec));
  }

  Rng rng(split_spec.seed);
  std::vector<std::size_t> train_idx, eval_idx, test_idx;
  if (split_spec.temporal) {
    const auto a = shuffled(early, rng);
    const auto b = shuffled(late, rng);
    train_idx.assign(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(targets[0]));
    eval_idx.assign(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(targets[1]));
    test_idx.assign(b.begin() + static_cast<std::ptrdiff_t>(targets[1]),
                    b.begin() + static_cast<std::ptrdiff_t>(targets[1] + targets[2]));
  } else {
    const auto a = shuffled(early, rng);
    auto it = a.begin();
    train_idx.assign(it, it + static_cast<std::ptrdiff_t>(targets[0]));
    it += static_cast<std::ptrdiff_t>(targets[0]);
    eval_idx.assign(it, it + static_cast<std::ptrdiff_t>(targets[1]));
    it += static_cast<std::ptrdiff_t>(targets[1]);
    test_idx.assign(it, it + static_cast<std::ptrdiff_t>(targets[2]));
  }

  auto gather = [&](std::vector<std::size_t> idx) {
    std::sort(idx.begin(), idx.end());
    std::vector<CodeSample> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(samples[i]);
    return out;
  };
  return Split{gather(train_idx), gather(eval_idx), gather(test_idx)};
}

}  // namespace msivd::corpus
