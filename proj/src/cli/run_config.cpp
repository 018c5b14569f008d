// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#include "msivd/cli/run_config.hpp"

#include <algorithm>
#include <iterator>

#include "msivd/common/io.hpp"

namespace msivd::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return v.dump();
  throw CLI::ConfigError("config values must be strings, numbers, booleans or arrays of them");
}

CLI::ConfigItem item_of(const std::vector<std::string>& parents, const std::string& name, const json& value) {
  CLI::ConfigItem item;
  item.parents = parents;
  item.name = name;
  if (value.is_array()) {
    for (const auto& v : value) item.inputs.push_back(scalar_text(v));
  } else {
    item.inputs.push_back(scalar_text(value));
  }
  return item;
}

// Numbers, booleans and arrays keep their JSON type; anything else stays text.
ordered_json typed(const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  const auto parsed = ordered_json::parse(text, nullptr, false);
  if (!parsed.is_discarded() && (parsed.is_number() || parsed.is_array())) return parsed;
  return text;
}

ordered_json typed(const std::vector<std::string>& results) {
  if (results.size() == 1) return typed(results.front());
  auto out = ordered_json::array();
  for (const auto& r : results) out.push_back(typed(r));
  return out;
}

std::string long_name(const CLI::Option& opt) {
  const auto& names = opt.get_lnames();
  return names.empty() ? opt.get_name() : names.front();
}

}  // namespace

std::string JsonConfig::to_config(const CLI::App* app, bool default_also, bool, std::string) const {
  ordered_json out = ordered_json::object();
  for (const auto* opt : app->get_options()) {
    const auto name = long_name(*opt);
    if (name == "help" || name == "config" || !opt->get_configurable()) continue;
    if (opt->count() > 0) {
      out[name] = typed(opt->results());
    } else if (default_also && !opt->get_default_str().empty()) {
      out[name] = typed(opt->get_default_str());
    }
  }
  return out.dump(2) + "\n";
}

std::vector<CLI::ConfigItem> JsonConfig::from_config(std::istream& input) const {
  const std::string text(std::istreambuf_iterator<char>(input), {});
  const auto doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw CLI::ConfigError("config file is not valid JSON");
  if (!doc.is_object()) throw CLI::ConfigError("config file must hold a JSON object");

  // CLI11 keeps the first value it sees for an option, so section entries go first.
  std::vector<CLI::ConfigItem> items;
  for (const auto& [key, value] : doc.items()) {
    if (!value.is_object()) continue;
    if (std::find(sections_.begin(), sections_.end(), key) == sections_.end())
      throw CLI::ConfigError("config section '" + key + "' names no subcommand");
    for (const auto& [name, v] : value.items())
      if (!v.is_null()) items.push_back(item_of({key}, name, v));
  }
  for (const auto& [key, value] : doc.items()) {
    if (value.is_object() || value.is_null()) continue;
    items.push_back(item_of({}, key, value));
    for (const auto& section : sections_) items.push_back(item_of({section}, key, value));
  }
  return items;
}

RunConfig RunConfig::capture(const CLI::App& command, const std::string& config_file) {
  RunConfig run;
  run.command = command.get_name();
  run.config_file = config_file;
  for (const auto* opt : command.get_options()) {
    const auto name = long_name(*opt);
    if (name == "help") continue;
    if (opt->count() > 0) {
      run.options[name] = typed(opt->results());
    } else if (opt->get_expected_max() == 0) {
      run.options[name] = false;
    } else {
      run.options[name] = opt->get_default_str().empty() ? ordered_json(nullptr) : typed(opt->get_default_str());
    }
  }
  return run;
}

ordered_json RunConfig::to_json() const {
  ordered_json j;
  j["command"] = command;
  j["options"] = options;
  j["config_file"] = config_file.empty() ? ordered_json(nullptr) : ordered_json(config_file);
  return j;
}

void write_provenance(const std::filesystem::path& artifact, const RunConfig& run) {
  write_file(provenance_path(artifact), run.to_json().dump(2) + "\n");
}

}  // namespace msivd::cli
