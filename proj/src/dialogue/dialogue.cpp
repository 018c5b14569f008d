// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#include "msivd/dialogue/dialogue.hpp"

#include <json.hpp>

#include "msivd/common/error.hpp"
#include "msivd/common/jsonl.hpp"

namespace msivd::dialogue {

using nlohmann::json;

std::string detection_question(std::string_view code) {
  return "Does the following code have any security vulnerabilities: " + std::string(code);
}

std::string detection_answer(std::string_view cwe_id) {
  return "Yes. The following code has a vulnerability type " + std::string(cwe_id) + ".";
}

std::string description_answer(std::string_view description) {
  return "The vulnerability is: " + std::string(description);
}

std::string location_answer(int start, int end, std::string_view fix) {
  return "The code is vulnerable at lines " + std::to_string(start) + "-" + std::to_string(end) +
         ", with the following fix: " + std::string(fix);
}

DialogueRecord build_dialogue(const corpus::CodeSample& s) {
  if (!s.label) throw Error(s.sample_id + ": multi-round dialogue needs a vulnerable sample");
  if (s.cwe_id.empty()) throw Error(s.sample_id + ": missing field 'cwe_id'");
  if (s.description.empty()) throw Error(s.sample_id + ": missing field 'description'");
  if (!s.vuln_line_start || !s.vuln_line_end)
    throw Error(s.sample_id + ": missing field 'vuln_line_start'");
  if (!s.fix_code) throw Error(s.sample_id + ": missing field 'fix_code'");
  DialogueRecord d;
  d.sample_id = s.sample_id;
  d.system = std::string(kSystemPrompt);
  d.label = true;
  d.rounds.push_back({detection_question(s.code), detection_answer(s.cwe_id)});
  d.rounds.push_back({std::string(kDescriptionQuestion), description_answer(s.description)});
  d.rounds.push_back({std::string(kLocationQuestion),
                      location_answer(*s.vuln_line_start, *s.vuln_line_end, *s.fix_code)});
  return d;
}

DialogueRecord build_negative_dialogue(const corpus::CodeSample& s) {
  if (s.label) throw Error(s.sample_id + ": single-round negative dialogue needs a safe sample");
  DialogueRecord d;
  d.sample_id = s.sample_id;
  d.system = std::string(kSystemPrompt);
  d.label = false;
  d.rounds.push_back({detection_question(s.code), std::string(kNegativeAnswer)});
  return d;
}

DialogueRecord dialogue_for(const corpus::CodeSample& s) {
  return s.label ? build_dialogue(s) : build_negative_dialogue(s);
}

VerdictTokens verdict_tokens(AnswerStyle style) {
  if (style == AnswerStyle::label_only) return {lm::token::yes, lm::token::no};
  return {static_cast<unsigned char>(detection_answer("")[0]),
          static_cast<unsigned char>(kNegativeAnswer[0])};
}

RenderedDialogue render(const DialogueRecord& d, const lm::Tokenizer& tok, const RenderOptions& o) {
  const std::size_t rounds = o.up_to_round == 0 ? d.rounds.size() : o.up_to_round;
  if (d.rounds.empty() || rounds < 1 || rounds > d.rounds.size())
    throw UsageError(d.sample_id + ": up_to_round " + std::to_string(o.up_to_round) + " outside 1.." +
                     std::to_string(d.rounds.size()));
  if (o.answers == AnswerStyle::label_only && rounds != 1)
    throw UsageError(d.sample_id + ": label-only answers cover round 1 only");

  RenderedDialogue r;
  auto append = [&](std::span<const int> ids, bool loss) {
    r.token_ids.insert(r.token_ids.end(), ids.begin(), ids.end());
    r.loss_mask.insert(r.loss_mask.end(), ids.size(), loss ? 1 : 0);
  };
  const int sys = lm::token::system, stu = lm::token::student, tea = lm::token::teacher;
  append({&sys, 1}, false);
  append(tok.encode(d.system), false);
  for (std::size_t k = 0; k < rounds; ++k) {
    const auto& round = d.rounds[k];
    if (round.teacher.empty()) throw Error(d.sample_id + ": round " + std::to_string(k + 1) + " has no answer");
    r.round_boundaries.push_back(r.token_ids.size());
    append({&stu, 1}, false);
    append(tok.encode(round.student), false);
    append({&tea, 1}, false);
    std::vector<int> answer;
    if (o.answers == AnswerStyle::label_only)
      answer = {d.label ? lm::token::yes : lm::token::no};
    else
      answer = tok.encode(round.teacher);
    r.teacher_spans.push_back({k, r.token_ids.size(), r.token_ids.size() + answer.size()});
    append(answer, true);
  }

  const auto& last = r.teacher_spans.back();
  if (last.end - last.begin > o.context_window)
    throw Error(d.sample_id + ": final answer of " + std::to_string(last.end - last.begin) +
                " tokens exceeds the context window of " + std::to_string(o.context_window));
  if (r.token_ids.size() > o.context_window) {
    const std::size_t drop = r.token_ids.size() - o.context_window;
    r.dropped_left = drop;
    r.token_ids.erase(r.token_ids.begin(), r.token_ids.begin() + static_cast<std::ptrdiff_t>(drop));
    r.loss_mask.erase(r.loss_mask.begin(), r.loss_mask.begin() + static_cast<std::ptrdiff_t>(drop));
    std::vector<std::size_t> bounds;
    for (auto b : r.round_boundaries)
      if (b >= drop) bounds.push_back(b - drop);
    r.round_boundaries = std::move(bounds);
    std::vector<TeacherSpan> spans;
    for (auto s : r.teacher_spans) {
      if (s.end <= drop) continue;
      spans.push_back({s.round, s.begin > drop ? s.begin - drop : 0, s.end - drop});
    }
    r.teacher_spans = std::move(spans);
  }
  return r;
}

std::vector<int> render_prompt(std::string_view code, const lm::Tokenizer& tok, std::size_t context_window) {
  if (context_window == 0) throw UsageError("context window must be positive");
  std::vector<int> ids{lm::token::system};
  const auto sys = tok.encode(kSystemPrompt);
  ids.insert(ids.end(), sys.begin(), sys.end());
  ids.push_back(lm::token::student);
  const auto q = tok.encode(detection_question(code));
  ids.insert(ids.end(), q.begin(), q.end());
  ids.push_back(lm::token::teacher);
  if (ids.size() > context_window)
    ids.erase(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(ids.size() - context_window));
  return ids;
}

lm::TaskSequence to_task_sequence(const RenderedDialogue& r, lm::TaskGrouping grouping) {
  lm::TaskSequence seq;
  seq.tokens = r.token_ids;
  seq.task_masks.assign(lm::task_names(grouping).size(), ad::Mask(r.token_ids.size(), 0));
  for (const auto& span : r.teacher_spans) {
    auto& mask = seq.task_masks[lm::task_of_round(grouping, span.round)];
    for (std::size_t i = span.begin; i < span.end; ++i) mask[i] = r.loss_mask[i];
  }
  return seq;
}

std::string write_jsonl(std::span<const DialogueRecord> records) {
  std::string out;
  for (const auto& d : records) {
    nlohmann::ordered_json j;
    j["sample_id"] = d.sample_id;
    j["system"] = d.system;
    j["rounds"] = nlohmann::ordered_json::array();
    for (const auto& r : d.rounds) j["rounds"].push_back({{"student", r.student}, {"teacher", r.teacher}});
    j["label"] = d.label;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<DialogueRecord> parse_jsonl(std::string_view text) {
  std::vector<DialogueRecord> out;
  for_each_jsonl(text, [&](const json& j, std::size_t) {
    DialogueRecord d;
    d.sample_id = j.at("sample_id").get<std::string>();
    d.system = j.at("system").get<std::string>();
    d.label = j.at("label").get<bool>();
    for (const auto& r : j.at("rounds"))
      d.rounds.push_back({r.at("student").get<std::string>(), r.at("teacher").get<std::string>()});
    const std::size_t expected = d.label ? 3 : 1;
    if (d.rounds.size() != expected)
      throw Error(d.sample_id + ": expected " + std::to_string(expected) + " rounds, found " +
                  std::to_string(d.rounds.size()));
    for (const auto& r : d.rounds)
      if (r.teacher.empty()) throw Error(d.sample_id + ": empty teacher answer");
    out.push_back(std::move(d));
  });
  return out;
}

}  // namespace msivd::dialogue
