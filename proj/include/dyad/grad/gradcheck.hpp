// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dyad/grad/graph.hpp"

namespace dyad::grad {

struct GradCheckOptions {
  double eps = 1e-5;
  /// 2: (f(p+h) - f(p-h)) / 2h. 4: the five-point stencil
  /// (f(p-2h) - 8 f(p-h) + 8 f(p+h) - f(p+2h)) / 12h, whose O(h^4) truncation
  /// permits a larger h and so less round-off on large losses.
  int stencil = 2;
  double tolerance = 1e-6;
  /// Relative error is |a - n| / max(|a|, |n|, abs_floor).
  double abs_floor = 1e-8;
  /// 0 = every coordinate; otherwise a seeded sample per parameter.
  std::size_t max_coords_per_param = 0;
  std::uint64_t seed = 1;
};

struct GradCheckEntry {
  std::string param;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::string worst;
  double tolerance = 0.0;
  bool passed() const { return max_rel_error <= tolerance; }
};

/// Builds a scalar loss on a fresh graph from the current parameter values.
using LossBuilder = std::function<Var(Graph&)>;

/// Central-difference check of backward() against
/// (f(p + eps) - f(p - eps)) / (2 eps) for sampled coordinates of `params`.
/// Parameter values are restored afterwards; their grad fields hold the
/// analytic gradient on return.
GradCheckReport finite_diff_check(const LossBuilder& build, std::span<Parameter* const> params,
                                  const GradCheckOptions& opts = {});

}  // namespace dyad::grad
