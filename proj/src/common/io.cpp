// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#include "msivd/common/io.hpp"

#include <fstream>
#include <sstream>

#include "msivd/common/error.hpp"

namespace msivd {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

std::filesystem::path provenance_path(const std::filesystem::path& artifact) {
  auto p = artifact;
  p += ".run.json";
  return p;
}

}  // namespace msivd
