// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

namespace msivd::cli {

/// Reads JSON run configs for CLI11. Top-level scalars and arrays apply to
/// every subcommand; an object keyed by a subcommand name applies to that
/// subcommand and wins over top-level values. Flags on the command line win
/// over both.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(std::vector<std::string> sections) : sections_(std::move(sections)) {}

  std::string to_config(const CLI::App* app, bool default_also, bool write_description,
                        std::string prefix) const override;
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override;

 private:
  std::vector<std::string> sections_;
};

/// Settings that produced an artifact: the subcommand, every option value
/// after merging file and flags, and the config file used, if any.
struct RunConfig {
  std::string command;
  nlohmann::ordered_json options = nlohmann::ordered_json::object();
  std::string config_file;

  /// Captures every named option of `command`; unset options keep their defaults.
  static RunConfig capture(const CLI::App& command, const std::string& config_file);
  nlohmann::ordered_json to_json() const;
};

/// Writes `run` beside `artifact` as its provenance sidecar.
void write_provenance(const std::filesystem::path& artifact, const RunConfig& run);

}  // namespace msivd::cli
