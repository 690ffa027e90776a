// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "dyad/stream/run_config.hpp"

#include <cstdio>
#include <sstream>

#include "dyad/error.hpp"
#include "dyad/kv_config.hpp"

namespace dyad::stream {

namespace {

std::array<std::size_t, 3> parse_split(std::string_view value) {
  std::array<std::size_t, 3> out{};
  std::size_t part = 0, begin = 0;
  for (std::size_t i = 0; i <= value.size(); ++i) {
    if (i < value.size() && value[i] != ':') continue;
    if (part == 3) throw ConfigError("split needs three ':'-separated weights, got '" + std::string(value) + "'");
    out[part++] = kv_size("split", value.substr(begin, i - begin));
    begin = i + 1;
  }
  if (part != 3) throw ConfigError("split needs three ':'-separated weights, got '" + std::string(value) + "'");
  return out;
}

}  // namespace

void RunConfig::set(std::string_view key, std::string_view value) {
  if (model.set(key, value) || train.set(key, value) || synth.set(key, value)) return;
  if (key == "dataset_size") {
    dataset_size = kv_size(key, value);
  } else if (key == "split") {
    split = parse_split(value);
  } else if (key == "data_seed") {
    data_seed = kv_u64(key, value);
  } else if (key == "temperature") {
    temperature = kv_double(key, value);
  } else if (key == "decode_seed") {
    decode_seed = kv_u64(key, value);
  } else if (key == "sample_rate") {
    sample_rate = static_cast<std::int64_t>(kv_u64(key, value));
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

void RunConfig::load_file(const std::string& path) {
  for (const auto& e : read_kv_file(path)) {
    try {
      set(e.key, e.value);
    } catch (const ConfigError& err) {
      throw ConfigError(path + ":" + std::to_string(e.line) + ": " + err.what());
    }
  }
}

void RunConfig::finalize() {
  synth.audio_tokens_per_frame = model.voice.tokens_per_frame;
  synth.audio_vocab = model.audio_vocab();
  synth.voiceprint_dim = model.voice.voiceprint_dim;
  model.validate();
  train.validate();
  synth.validate();
  if (dataset_size == 0) throw ConfigError("dataset_size must be positive");
  if (split[0] + split[1] + split[2] == 0) throw ConfigError("split weights must not all be zero");
  if (temperature < 0.0) throw ConfigError("temperature must be non-negative");
  if (sample_rate <= 0) throw ConfigError("sample_rate must be positive");
}

std::string RunConfig::to_kv() const {
  std::ostringstream os;
  os.precision(17);
  os << model.to_kv() << train.to_kv() << synth.to_kv() << "dataset_size=" << dataset_size << "\nsplit=" << split[0]
     << ':' << split[1] << ':' << split[2] << "\ndata_seed=" << data_seed << "\ntemperature=" << temperature
     << "\ndecode_seed=" << decode_seed << "\nsample_rate=" << sample_rate << "\n";
  return os.str();
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string RunConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(to_kv())));
  return buf;
}

}  // namespace dyad::stream
