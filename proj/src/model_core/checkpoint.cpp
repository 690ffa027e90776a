// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "dyad/model_core/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "dyad/error.hpp"
#include "dyad/kv_config.hpp"

namespace dyad::model {
namespace {

constexpr char kMagic[8] = {'D', 'Y', 'A', 'D', 'C', 'K', 'P', 'T'};

void put_le(std::ostream& out, std::uint64_t v, int bytes) {
  char buf[8];
  for (int i = 0; i < bytes; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(buf, bytes);
}

std::uint64_t get_le(std::istream& in, int bytes, const std::string& path) {
  unsigned char buf[8] = {};
  if (!in.read(reinterpret_cast<char*>(buf), bytes)) throw ValidationError(path + ": truncated checkpoint");
  std::uint64_t v = 0;
  for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | buf[i];
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const Model& model) {
  nlohmann::json header;
  header["config"] = model.config().to_kv();
  header["vocab"] = model.vocab().words();
  nlohmann::json params = nlohmann::json::array();
  for (const auto* p : model.params().all()) {
    params.push_back({{"name", p->name}, {"rows", p->value.rows()}, {"cols", p->value.cols()}});
  }
  header["params"] = params;
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint '" + path + "'");
  out.write(kMagic, 8);
  put_le(out, kCheckpointVersion, 4);
  put_le(out, text.size(), 8);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto* p : model.params().all()) {
    for (double v : p->value.data()) put_le(out, std::bit_cast<std::uint64_t>(v), 8);
  }
  if (!out) throw IoError("failed writing checkpoint '" + path + "'");
}

std::unique_ptr<Model> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path + "'");
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw ValidationError(path + ": not a checkpoint");
  const auto version = get_le(in, 4, path);
  if (version != kCheckpointVersion) {
    throw ValidationError(path + ": unsupported checkpoint version " + std::to_string(version));
  }
  const auto len = get_le(in, 8, path);
  if (len > (1u << 30)) throw ValidationError(path + ": implausible header length");
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len))) throw ValidationError(path + ": truncated header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path + ": bad checkpoint header: " + e.what());
  }
  ModelConfig cfg;
  for (const auto& e : parse_kv(header.at("config").get<std::string>(), path)) {
    if (!cfg.set(e.key, e.value)) throw ValidationError(path + ": unknown config key '" + e.key + "'");
  }
  auto model = std::make_unique<Model>(cfg, Vocabulary(header.at("vocab").get<std::vector<std::string>>()));
  const auto& listed = header.at("params");
  if (listed.size() != model->params().size()) throw ValidationError(path + ": parameter count mismatch");
  for (const auto& entry : listed) {
    auto& p = model->params().get(entry.at("name").get<std::string>());
    if (p.value.rows() != entry.at("rows").get<std::size_t>() || p.value.cols() != entry.at("cols").get<std::size_t>()) {
      throw ValidationError(path + ": shape mismatch for " + p.name);
    }
    for (double& v : p.value.data()) v = std::bit_cast<double>(get_le(in, 8, path));
    if (!p.value.all_finite()) throw ValidationError(path + ": non-finite weights in " + p.name);
  }
  return model;
}

}  // namespace dyad::model
