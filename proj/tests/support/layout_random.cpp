// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "layout_random.hpp"

#include <array>

namespace dyad::testing {

using namespace dyad::layout;

SequenceLayout random_layout(std::mt19937_64& rng, std::size_t max_tokens) {
  const std::size_t n = rng() % (max_tokens + 1);
  const std::size_t n_static = n == 0 ? 0 : rng() % (n + 1);
  SequenceLayout out;
  for (std::size_t i = 0; i < n_static; ++i) out.tags.push_back({Stream::Static, Participant::None, kNoTimestamp, i});
  const auto kinds = default_order();
  std::array<std::int64_t, 4> clock{};
  for (auto& c : clock) c = static_cast<std::int64_t>(rng() % 3);
  while (out.tags.size() < n) {
    const std::size_t k = rng() % 4;
    clock[k] += static_cast<std::int64_t>(rng() % 3);  // 0 repeats a timestamp
    out.tags.push_back({kinds[k].stream, kinds[k].participant, clock[k], out.tags.size()});
  }
  return out;
}

}  // namespace dyad::testing
