// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Checkpoint layout: 8-byte magic "DYADCKPT", uint32 version, uint64 header
// length, a JSON header (config, vocabulary, parameter names and shapes), then
// every parameter as little-endian float64 in header order.

#include <memory>
#include <string>

#include "dyad/model_core/model.hpp"

namespace dyad::model {

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::string& path, const Model& model);
std::unique_ptr<Model> load_checkpoint(const std::string& path);

}  // namespace dyad::model
