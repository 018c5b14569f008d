// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace msivd {

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

/// Path of the provenance sidecar written next to an artifact ("x.jsonl" -> "x.jsonl.run.json").
std::filesystem::path provenance_path(const std::filesystem::path& artifact);

}  // namespace msivd
