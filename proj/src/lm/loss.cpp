// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#include "msivd/lm/loss.hpp"

#include <algorithm>
#include <map>

#include "msivd/common/error.hpp"

namespace msivd::lm {

using ad::BasicTensor;

std::string_view to_string(TaskGrouping g) {
  return g == TaskGrouping::per_round ? "per-round" : "detection-explanation";
}

TaskGrouping parse_task_grouping(std::string_view name) {
  if (name == "per-round") return TaskGrouping::per_round;
  if (name == "detection-explanation") return TaskGrouping::detection_explanation;
  throw UsageError("unknown task grouping '" + std::string(name) +
                   "' (expected per-round or detection-explanation)");
}

std::vector<std::string> task_names(TaskGrouping g) {
  if (g == TaskGrouping::per_round) return {"existence", "description", "localization"};
  return {"detection", "explanation"};
}

std::size_t task_of_round(TaskGrouping g, std::size_t round) {
  if (round > 2) throw Error("dialogue round " + std::to_string(round + 1) + " has no task");
  if (g == TaskGrouping::per_round) return round;
  return round == 0 ? 0 : 1;
}

template <typename T>
BasicTensor<T> combine_task_terms(std::span<const TaskTerm<T>> terms) {
  if (terms.empty()) throw Error("multitask loss needs at least one task");
  std::vector<std::string> order;
  std::map<std::string, std::pair<BasicTensor<T>, std::size_t>> pooled;
  for (const auto& t : terms) {
    auto it = pooled.find(t.task);
    if (it == pooled.end()) {
      order.push_back(t.task);
      pooled.emplace(t.task, std::pair{t.nll_sum, t.tokens});
    } else {
      it->second.first = ad::add(it->second.first, t.nll_sum);
      it->second.second += t.tokens;
    }
  }
  BasicTensor<T> total;
  for (const auto& name : order) {
    const auto& [nll, count] = pooled.at(name);
    if (count == 0) throw Error("task '" + name + "' has no loss tokens");
    auto task_mean = ad::scale(nll, static_cast<T>(1.0 / static_cast<double>(count)));
    total = total.defined() ? ad::add(total, task_mean) : task_mean;
  }
  return ad::scale(total, static_cast<T>(1.0 / static_cast<double>(order.size())));
}

template <typename T>
std::vector<TaskTerm<T>> sequence_task_terms(const Transformer<T>& model, const TaskSequence& seq,
                                             std::span<const std::string> tasks) {
  if (seq.task_masks.size() != tasks.size())
    throw Error("sequence carries " + std::to_string(seq.task_masks.size()) + " masks for " +
                std::to_string(tasks.size()) + " tasks");
  const std::size_t n = seq.tokens.size();
  for (const auto& m : seq.task_masks)
    if (m.size() != n) throw ShapeError("loss mask length does not match the token count");
  std::vector<int> rows;
  for (std::size_t i = 1; i < n; ++i) {
    const bool any = std::any_of(seq.task_masks.begin(), seq.task_masks.end(),
                                 [&](const ad::Mask& m) { return m[i] != 0; });
    if (any) rows.push_back(static_cast<int>(i - 1));
  }
  std::vector<TaskTerm<T>> terms;
  if (rows.empty()) return terms;

  const auto hidden = model.hidden_states(seq.tokens);
  const auto logits = model.lm_head(ad::gather_rows<T>(hidden, rows));
  std::vector<int> targets(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    targets[r] = seq.tokens[static_cast<std::size_t>(rows[r]) + 1];
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    ad::Mask mask(rows.size());
    std::size_t count = 0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      mask[r] = seq.task_masks[t][static_cast<std::size_t>(rows[r]) + 1];
      count += mask[r] ? 1 : 0;
    }
    if (count == 0) continue;
    terms.push_back({tasks[t], ad::nll_sum<T>(logits, targets, mask), count});
  }
  return terms;
}

template <typename T>
BasicTensor<T> multitask_loss(const Transformer<T>& model, std::span<const TaskSequence> batch,
                              std::span<const std::string> tasks) {
  std::vector<TaskTerm<T>> terms;
  for (const auto& seq : batch) {
    auto more = sequence_task_terms(model, seq, tasks);
    terms.insert(terms.end(), more.begin(), more.end());
  }
  for (const auto& name : tasks) {
    const bool present = std::any_of(terms.begin(), terms.end(),
                                     [&](const TaskTerm<T>& t) { return t.task == name; });
    if (!present) throw Error("task '" + name + "' has no loss tokens in the batch");
  }
  return combine_task_terms<T>(terms);
}

#define MSIVD_INSTANTIATE_LOSS(T)                                                              \
  template BasicTensor<T> combine_task_terms(std::span<const TaskTerm<T>>);                   \
  template std::vector<TaskTerm<T>> sequence_task_terms(const Transformer<T>&,                 \
                                                        const TaskSequence&,                   \
                                                        std::span<const std::string>);         \
  template BasicTensor<T> multitask_loss(const Transformer<T>&, std::span<const TaskSequence>, \
                                         std::span<const std::string>);

MSIVD_INSTANTIATE_LOSS(float)
MSIVD_INSTANTIATE_LOSS(double)

}  // namespace msivd::lm
