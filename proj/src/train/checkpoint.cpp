// Copyright 2026 The msivd Authors
// SPDX-License-Identifier: Apache-2.0

#include "msivd/train/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

#include "msivd/common/error.hpp"
#include "msivd/common/io.hpp"

namespace msivd::train {

using nlohmann::json;

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

template <typename U>
void put(std::string& out, U v) {
  char buf[sizeof(U)];
  std::memcpy(buf, &v, sizeof(U));
  out.append(buf, sizeof(U));
}

template <typename U>
U get(std::string_view bytes, std::size_t at) {
  U v;
  std::memcpy(&v, bytes.data() + at, sizeof(U));
  return v;
}

}  // namespace

const StoredTensor& Checkpoint::tensor(std::string_view name) const {
  for (const auto& t : tensors)
    if (t.name == name) return t;
  throw Error("checkpoint has no tensor '" + std::string(name) + "'");
}

std::string serialize_checkpoint(const Checkpoint& ckp) {
  json dir = json::array();
  std::size_t offset = 0;
  for (const auto& t : ckp.tensors) {
    dir.push_back({{"name", t.name}, {"shape", t.shape}, {"offset", offset}, {"count", t.values.size()}});
    offset += t.values.size() * sizeof(float);
  }
  const std::string header =
      json{{"config", ckp.config}, {"metrics", ckp.metrics}, {"tensors", dir}}.dump();
  std::string out(kCheckpointMagic);
  put<std::uint32_t>(out, ckp.version);
  put<std::uint64_t>(out, header.size());
  out += header;
  out.reserve(out.size() + offset);
  for (const auto& t : ckp.tensors)
    out.append(reinterpret_cast<const char*>(t.values.data()), t.values.size() * sizeof(float));
  return out;
}

Checkpoint parse_checkpoint(std::string_view bytes) {
  constexpr std::size_t kFixed = 8 + 4 + 8;
  if (bytes.size() < kFixed) throw ParseError("checkpoint truncated before header", bytes.size());
  if (bytes.substr(0, 8) != kCheckpointMagic) throw ParseError("not a checkpoint: bad magic bytes", 0);
  Checkpoint ckp;
  ckp.version = get<std::uint32_t>(bytes, 8);
  if (ckp.version != kCheckpointVersion)
    throw ParseError("unsupported checkpoint version " + std::to_string(ckp.version) + " (expected " +
                         std::to_string(kCheckpointVersion) + ")",
                     8);
  const auto header_len = get<std::uint64_t>(bytes, 12);
  if (header_len > bytes.size() - kFixed) throw ParseError("checkpoint header truncated", kFixed);
  json header;
  try {
    header = json::parse(bytes.substr(kFixed, header_len));
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("checkpoint header is not JSON: ") + e.what(), kFixed + e.byte);
  }
  const std::size_t payload = kFixed + header_len;
  ckp.config = header.value("config", json::object());
  ckp.metrics = header.value("metrics", json::array());
  for (const auto& d : header.at("tensors")) {
    StoredTensor t;
    t.name = d.at("name").get<std::string>();
    t.shape = d.at("shape").get<std::vector<std::size_t>>();
    const auto offset = d.at("offset").get<std::size_t>();
    const auto count = d.at("count").get<std::size_t>();
    if (payload + offset + count * sizeof(float) > bytes.size())
      throw ParseError("checkpoint payload truncated in tensor '" + t.name + "'", bytes.size());
    t.values.resize(count);
    std::memcpy(t.values.data(), bytes.data() + payload + offset, count * sizeof(float));
    ckp.tensors.push_back(std::move(t));
  }
  return ckp;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckp) {
  write_file(path, serialize_checkpoint(ckp));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return parse_checkpoint(read_file(path));
}

void store_params(Checkpoint& ckp, const std::string& prefix, const ad::ParamList<float>& params) {
  for (const auto& p : params)
    ckp.tensors.push_back({prefix + p.name, p.tensor.shape(), {p.tensor.data().begin(), p.tensor.data().end()}});
}

void restore_params(const Checkpoint& ckp, const std::string& prefix, ad::ParamList<float>& params) {
  for (auto& p : params) {
    const std::string name = prefix + p.name;
    auto it = std::find_if(ckp.tensors.begin(), ckp.tensors.end(), [&](const auto& t) { return t.name == name; });
    if (it == ckp.tensors.end()) throw ShapeError("checkpoint is missing tensor '" + name + "'");
    if (it->shape != p.tensor.shape())
      throw ShapeError("tensor '" + name + "' has shape " + ad::shape_string(it->shape) +
                       " in the checkpoint but " + ad::shape_string(p.tensor.shape()) + " in the model");
    auto dst = p.tensor.mutable_data();
    std::copy(it->values.begin(), it->values.end(), dst.begin());
  }
}

}  // namespace msivd::train
