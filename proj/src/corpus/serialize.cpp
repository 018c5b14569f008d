// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#include "msivd/corpus/serialize.hpp"

#include <set>

#include "msivd/common/error.hpp"
#include "msivd/common/jsonl.hpp"

namespace msivd::corpus {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

template <typename T>
ordered_json optional_json(const std::optional<T>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

const json& required(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(std::string("missing key '") + key + "'", 0);
  return *it;
}

template <typename T>
std::optional<T> optional_field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

}  // namespace

ordered_json sample_to_json(const CodeSample& s) {
  ordered_json j;
  j["sample_id"] = s.sample_id;
  j["code"] = s.code;
  j["label"] = s.label;
  j["cwe_id"] = s.cwe_id;
  j["cwe_category"] = to_string(s.cwe_category);
  j["description"] = s.description;
  j["vuln_line_start"] = optional_json(s.vuln_line_start);
  j["vuln_line_end"] = optional_json(s.vuln_line_end);
  j["fix_code"] = optional_json(s.fix_code);
  j["origin_date"] = s.origin_date.to_string();
  return j;
}

CodeSample sample_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("sample is not a JSON object", 0);
  CodeSample s;
  try {
    s.sample_id = required(j, "sample_id").get<std::string>();
    s.code = required(j, "code").get<std::string>();
    s.label = required(j, "label").get<bool>();
    s.cwe_id = required(j, "cwe_id").get<std::string>();
    s.cwe_category = parse_category(required(j, "cwe_category").get<std::string>());
    s.description = required(j, "description").get<std::string>();
    s.vuln_line_start = optional_field<int>(j, "vuln_line_start");
    s.vuln_line_end = optional_field<int>(j, "vuln_line_end");
    s.fix_code = optional_field<std::string>(j, "fix_code");
    s.origin_date = Date::parse(required(j, "origin_date").get<std::string>());
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad sample field: ") + e.what(), 0);
  }
  if (s.sample_id.empty()) throw ParseError("empty sample_id", 0);
  const auto lines = static_cast<int>(count_lines(s.code));
  if (lines < 1) throw ParseError(s.sample_id + ": code is empty", 0);
  if (s.label) {
    if (!s.vuln_line_start || !s.vuln_line_end)
      throw ParseError(s.sample_id + ": vulnerable sample without line range", 0);
    if (*s.vuln_line_start < 1 || *s.vuln_line_start > *s.vuln_line_end || *s.vuln_line_end > lines)
      throw ParseError(s.sample_id + ": line range outside code", 0);
  }
  return s;
}

std::string write_samples_jsonl(std::span<const CodeSample> samples) {
  std::string out;
  for (const auto& s : samples) {
    out += sample_to_json(s).dump();
    out += '\n';
  }
  return out;
}

std::vector<CodeSample> read_samples_jsonl(std::string_view text) {
  std::vector<CodeSample> out;
  for_each_jsonl(text, [&](const json& j, std::size_t) { out.push_back(sample_from_json(j)); });
  return out;
}

SplitAssignment assignment_of(const Split& split) {
  SplitAssignment a;
  for (auto name : {SplitName::Train, SplitName::Eval, SplitName::Test})
    for (const auto& s : split[name]) a[s.sample_id] = name;
  return a;
}

std::string write_splits_json(const SplitAssignment& assignment) {
  json j = json::object();
  for (const auto& [id, name] : assignment) j[id] = to_string(name);
  return j.dump(2) + "\n";
}

SplitAssignment read_splits_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed splits file: ") + e.what(), e.byte);
  }
  if (!j.is_object()) throw ParseError("splits file must be a JSON object", 0);
  SplitAssignment a;
  for (const auto& [id, v] : j.items()) {
    if (!v.is_string()) throw ParseError("split of '" + id + "' is not a string", 0);
    a[id] = parse_split_name(v.get<std::string>());
  }
  return a;
}

Split apply_assignment(std::span<const CodeSample> pool, const SplitAssignment& assignment) {
  Split split;
  std::set<std::string> seen;
  for (const auto& s : pool) {
    auto it = assignment.find(s.sample_id);
    if (it == assignment.end()) continue;
    seen.insert(s.sample_id);
    switch (it->second) {
      case SplitName::Train: split.train.push_back(s); break;
      case SplitName::Eval: split.eval.push_back(s); break;
      case SplitName::Test: split.test.push_back(s); break;
    }
  }
  for (const auto& [id, _] : assignment)
    if (!seen.count(id)) throw Error("split assignment names unknown sample '" + id + "'");
  return split;
}

}  // namespace msivd::corpus
