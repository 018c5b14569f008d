// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "msivd/autograd/ops.hpp"
#include "msivd/corpus/types.hpp"
#include "msivd/lm/loss.hpp"
#include "msivd/lm/tokenizer.hpp"

namespace msivd::dialogue {

inline constexpr std::string_view kSystemPrompt =
    "You are an expert in detecting and locating programming security vulnerabilities, and can "
    "help answer vulnerability questions";
inline constexpr std::string_view kNegativeAnswer = "The code does not have a security vulnerability.";

std::string detection_question(std::string_view code);
std::string detection_answer(std::string_view cwe_id);
inline constexpr std::string_view kDescriptionQuestion = "What is the description of the vulnerablity?";
std::string description_answer(std::string_view description);
inline constexpr std::string_view kLocationQuestion =
    "Locate the lines that are vulnerable and should be repaired.";
std::string location_answer(int start, int end, std::string_view fix);

struct DialogueRound {
  std::string student;
  std::string teacher;
  bool operator==(const DialogueRound&) const = default;
};

struct DialogueRecord {
  std::string sample_id;
  std::string system;
  std::vector<DialogueRound> rounds;
  bool label = false;
  bool operator==(const DialogueRecord&) const = default;
};

/// Three rounds: detection with CWE type, description, lines with fix.
/// Throws naming the first missing field.
DialogueRecord build_dialogue(const corpus::CodeSample& sample);
/// One round answered with kNegativeAnswer. Throws for a vulnerable sample.
DialogueRecord build_negative_dialogue(const corpus::CodeSample& sample);
DialogueRecord dialogue_for(const corpus::CodeSample& sample);

/// Teacher text as written, or only the yes/no label token in round 1.
enum class AnswerStyle { full, label_only };

struct RenderOptions {
  std::size_t up_to_round = 0;  // 0 renders every round
  std::size_t context_window = 2048;
  AnswerStyle answers = AnswerStyle::full;
};

/// Half-open token range of one teacher answer.
struct TeacherSpan {
  std::size_t round = 0;
  std::size_t begin = 0;
  std::size_t end = 0;
  bool operator==(const TeacherSpan&) const = default;
};

struct RenderedDialogue {
  std::vector<int> token_ids;
  ad::Mask loss_mask;
  std::vector<std::size_t> round_boundaries;  // index of each surviving round's student marker
  std::vector<TeacherSpan> teacher_spans;
  std::size_t dropped_left = 0;
};

/// `<|system|>` system `<|student|>` s1 `<|teacher|>` t1 ... with the mask
/// true exactly on teacher answer tokens. Streams longer than the window lose
/// tokens on the left. Throws when the final answer alone exceeds the window
/// or up_to_round is out of range.
RenderedDialogue render(const DialogueRecord& dialogue, const lm::Tokenizer& tokenizer,
                        const RenderOptions& options = {});

/// Tokens of the round-1 question ending with the teacher marker, left-truncated
/// to `context_window`. The next token is the model's answer.
std::vector<int> render_prompt(std::string_view code, const lm::Tokenizer& tokenizer,
                               std::size_t context_window);

/// First answer token for a vulnerable and a safe verdict.
struct VerdictTokens {
  int vulnerable;
  int safe;
};
VerdictTokens verdict_tokens(AnswerStyle style);

/// Splits the loss mask by task: each teacher span goes to the task of its round.
lm::TaskSequence to_task_sequence(const RenderedDialogue& rendered, lm::TaskGrouping grouping);

/// One object per line with keys sample_id, system, rounds, label.
std::string write_jsonl(std::span<const DialogueRecord> records);
/// Throws ParseError carrying the 1-based line of a malformed record.
std::vector<DialogueRecord> parse_jsonl(std::string_view text);

}  // namespace msivd::dialogue
