// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "msivd/autograd/ops.hpp"
#include "msivd/lm/transformer.hpp"

namespace msivd::lm {

/// How dialogue rounds map to loss tasks: one task per round, or round 1 as
/// detection and rounds 2-3 as explanation.
enum class TaskGrouping { per_round, detection_explanation };

std::string_view to_string(TaskGrouping g);
TaskGrouping parse_task_grouping(std::string_view name);
std::vector<std::string> task_names(TaskGrouping g);
/// Task index for a 0-based dialogue round.
std::size_t task_of_round(TaskGrouping g, std::size_t round);

/// Token stream with one loss mask per task. A true mask entry at position i
/// asks the model to predict token i from the prefix before it, so entry 0
/// never contributes.
struct TaskSequence {
  std::vector<int> tokens;
  std::vector<ad::Mask> task_masks;
};

/// Summed token NLL of one task over some samples, with its token count.
template <typename T>
struct TaskTerm {
  std::string task;
  ad::BasicTensor<T> nll_sum;
  std::size_t tokens = 0;
};

/// Mean over distinct tasks of (summed NLL / token count). Terms sharing a
/// task name are pooled first. Throws naming any task with zero tokens.
template <typename T>
ad::BasicTensor<T> combine_task_terms(std::span<const TaskTerm<T>> terms);

/// Per-task NLL terms for one sequence (one forward pass). Only tasks with at
/// least one masked token are returned.
template <typename T>
std::vector<TaskTerm<T>> sequence_task_terms(const Transformer<T>& model, const TaskSequence& seq,
                                             std::span<const std::string> tasks);

/// Task-averaged loss over a batch. Every task listed in `tasks` must have at
/// least one masked token somewhere in the batch.
template <typename T>
ad::BasicTensor<T> multitask_loss(const Transformer<T>& model, std::span<const TaskSequence> batch,
                                  std::span<const std::string> tasks);

}  // namespace msivd::lm
