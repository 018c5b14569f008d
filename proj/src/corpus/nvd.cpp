// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#include "msivd/corpus/nvd.hpp"

#include <algorithm>

#include <json.hpp>

#include "msivd/common/error.hpp"

namespace msivd::corpus {

using nlohmann::json;

namespace {

std::string english(const json& list) {
  if (!list.is_array()) return {};
  for (const auto& d : list)
    if (d.value("lang", "") == "en" && d.contains("value")) return d["value"].get<std::string>();
  for (const auto& d : list)
    if (d.contains("value")) return d["value"].get<std::string>();
  return {};
}

std::vector<Reference> read_references(const json& refs) {
  std::vector<Reference> out;
  if (!refs.is_array()) return out;
  for (const auto& r : refs) {
    if (!r.contains("url") || !r["url"].is_string()) continue;
    Reference ref{r["url"].get<std::string>(), {}};
    if (r.contains("tags") && r["tags"].is_array())
      for (const auto& t : r["tags"]) ref.tags.push_back(t.get<std::string>());
    out.push_back(std::move(ref));
  }
  return out;
}

std::vector<FilePatch> read_patches(const json& j) {
  std::vector<FilePatch> out;
  if (!j.is_array()) return out;
  for (const auto& p : j) {
    FilePatch fp;
    fp.path = p.value("path", "");
    fp.pre_code = p.value("pre_code", "");
    fp.post_code = p.value("post_code", "");
    if (p.contains("changed_lines"))
      for (const auto& r : p["changed_lines"])
        fp.changed_lines.push_back({r.at(0).get<int>(), r.at(1).get<int>()});
    out.push_back(std::move(fp));
  }
  return out;
}

std::optional<Date> try_date(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) return std::nullopt;
  try {
    return Date::parse(j[key].get<std::string>());
  } catch (const ParseError&) {
    return std::nullopt;
  }
}

// Fills the metric fields from the newest CVSS block present.
void read_metrics(const json& metrics, VulnerabilityRecord& rec) {
  for (const char* key : {"cvssMetricV31", "cvssMetricV30", "cvssMetricV2"}) {
    if (!metrics.contains(key) || !metrics[key].is_array() || metrics[key].empty()) continue;
    const auto& m = metrics[key][0];
    if (m.contains("exploitabilityScore")) rec.exploitability_score = m["exploitabilityScore"].get<double>();
    const auto& data = m.contains("cvssData") ? m["cvssData"] : json::object();
    if (data.contains("baseSeverity")) rec.severity = parse_severity(data["baseSeverity"].get<std::string>());
    else if (m.contains("baseSeverity")) rec.severity = parse_severity(m["baseSeverity"].get<std::string>());
    if (data.contains("attackComplexity"))
      rec.attack_complexity = parse_attack_complexity(data["attackComplexity"].get<std::string>());
    else if (data.contains("accessComplexity"))
      rec.attack_complexity = parse_attack_complexity(data["accessComplexity"].get<std::string>());
    return;
  }
}

std::string first_cwe(const json& weaknesses) {
  if (!weaknesses.is_array()) return {};
  for (const auto& w : weaknesses) {
    const auto v = english(w.value("description", json::array()));
    if (v.starts_with("CWE-")) return v;
  }
  return {};
}

void finish(VulnerabilityRecord rec, const std::string& label, NvdParseResult& out) {
  if (rec.references.empty()) {
    out.skipped.push_back({label, "no reference URL"});
    return;
  }
  if (rec.cwe_id.empty()) rec.cwe_id = "CWE-unknown";
  out.records.push_back(std::move(rec));
}

void parse_v2_entry(const json& entry, std::size_t index, NvdParseResult& out) {
  const json& cve = entry.contains("cve") ? entry["cve"] : entry;
  const std::string id = cve.value("id", "");
  const std::string label = id.empty() ? "#" + std::to_string(index) : id;
  if (id.empty()) return out.skipped.push_back({label, "missing field 'id'"});
  VulnerabilityRecord rec;
  rec.cve_id = id;
  rec.description = english(cve.value("descriptions", json::array()));
  if (rec.description.empty()) return out.skipped.push_back({label, "missing field 'descriptions'"});
  auto date = try_date(entry, "fix_commit_date");
  if (!date) date = try_date(cve, "published");
  if (!date) return out.skipped.push_back({label, "missing or unparseable date"});
  rec.fix_commit_date = *date;
  rec.cwe_id = first_cwe(cve.value("weaknesses", json::array()));
  read_metrics(cve.value("metrics", json::object()), rec);
  rec.references = read_references(cve.value("references", json::array()));
  rec.file_patches = read_patches(entry.value("file_patches", json::array()));
  finish(std::move(rec), label, out);
}

void parse_fixture_entry(const json& e, std::size_t index, NvdParseResult& out) {
  const std::string id = e.value("cve_id", "");
  const std::string label = id.empty() ? "#" + std::to_string(index) : id;
  if (id.empty()) return out.skipped.push_back({label, "missing field 'cve_id'"});
  VulnerabilityRecord rec;
  rec.cve_id = id;
  rec.description = e.value("description", "");
  if (rec.description.empty()) return out.skipped.push_back({label, "missing field 'description'"});
  auto date = try_date(e, "fix_commit_date");
  if (!date) return out.skipped.push_back({label, "missing or unparseable 'fix_commit_date'"});
  rec.fix_commit_date = *date;
  rec.cwe_id = e.contains("cwe_id") && e["cwe_id"].is_string() ? e["cwe_id"].get<std::string>() : "";
  if (e.contains("exploitability_score") && e["exploitability_score"].is_number())
    rec.exploitability_score = e["exploitability_score"].get<double>();
  if (e.contains("severity") && e["severity"].is_string())
    rec.severity = parse_severity(e["severity"].get<std::string>());
  if (e.contains("attack_complexity") && e["attack_complexity"].is_string())
    rec.attack_complexity = parse_attack_complexity(e["attack_complexity"].get<std::string>());
  rec.references = read_references(e.value("references", json::array()));
  rec.file_patches = read_patches(e.value("file_patches", json::array()));
  finish(std::move(rec), label, out);
}

}  // namespace

NvdParseResult parse_nvd_dump(std::string_view bytes) {
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw ParseError("malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what(), e.byte);
  }
  NvdParseResult out;
  try {
    if (doc.is_array()) {
      for (std::size_t i = 0; i < doc.size(); ++i) {
        if (!doc[i].is_object()) {
          out.skipped.push_back({"#" + std::to_string(i), "entry is not an object"});
          continue;
        }
        parse_fixture_entry(doc[i], i, out);
      }
    } else if (doc.is_object() && doc.contains("vulnerabilities")) {
      const auto& list = doc["vulnerabilities"];
      if (!list.is_array()) throw ParseError("'vulnerabilities' is not an array", 0);
      for (std::size_t i = 0; i < list.size(); ++i) parse_v2_entry(list[i], i, out);
    } else {
      throw ParseError("expected a fixture array or an object with 'vulnerabilities'", 0);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("unexpected value type: ") + e.what(), 0);
  }
  return out;
}

bool is_commit_url(std::string_view url) {
  return url.find("/commit/") != std::string_view::npos ||
         url.find("/commits/") != std::string_view::npos ||
         url.find("a=commit") != std::string_view::npos;
}

std::vector<VulnerabilityRecord> filter_patch_records(std::span<const VulnerabilityRecord> records) {
  std::vector<VulnerabilityRecord> out;
  for (const auto& r : records) {
    const bool keep = std::any_of(r.references.begin(), r.references.end(), [](const Reference& ref) {
      return is_commit_url(ref.url) &&
             std::find(ref.tags.begin(), ref.tags.end(), "Patch") != ref.tags.end();
    });
    if (keep) out.push_back(r);
  }
  return out;
}

}  // namespace msivd::corpus
