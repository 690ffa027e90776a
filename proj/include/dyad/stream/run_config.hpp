// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Everything a command-line run can configure, read from one `key = value`
// file. Keys are routed to the model, training and synthetic-data configs;
// the remaining keys below belong to the run itself.

#include <array>
#include <cstdint>
#include <string>

#include "dyad/model_core/config.hpp"
#include "dyad/synth_data/synth.hpp"
#include "dyad/training/trainer.hpp"

namespace dyad::stream {

struct RunConfig {
  model::ModelConfig model;
  train::TrainConfig train;
  synth::SynthSpec synth;
  std::size_t dataset_size = 48;             // dataset_size
  std::array<std::size_t, 3> split{6, 2, 2};  // split, e.g. 6:2:2
  std::uint64_t data_seed = 1;               // data_seed
  double temperature = 0.0;                  // temperature
  std::uint64_t decode_seed = 1;             // decode_seed
  std::int64_t sample_rate = 16000;          // sample_rate

  /// Throws ConfigError for unknown keys and bad values.
  void set(std::string_view key, std::string_view value);
  /// Applies every entry of a config file; errors name the file and line.
  void load_file(const std::string& path);
  /// Copies the model's audio settings into the synth spec and validates.
  void finalize();
  /// Canonical `key=value` text covering every setting.
  std::string to_kv() const;
  /// FNV-1a 64 of to_kv(), as 16 hex digits.
  std::string hash() const;
};

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace dyad::stream
