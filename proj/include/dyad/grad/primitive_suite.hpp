// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Finite-difference checks of every differentiable primitive. Each case feeds
// one parameter through the op and projects the output onto fixed random
// weights, so every output entry carries a distinct weight in the loss.

#include <functional>
#include <string>
#include <vector>

#include "dyad/grad/gradcheck.hpp"

namespace dyad::grad {

struct PrimitiveCheck {
  std::string name;
  std::size_t in_rows = 0, in_cols = 0;
  std::function<Var(Graph&, Var)> op;
};

const std::vector<PrimitiveCheck>& primitive_checks();

/// Every coordinate of the input, eps 1e-5, relative error floor 1e-6.
GradCheckReport run_primitive_check(const PrimitiveCheck& check, double tolerance = 1e-6);

}  // namespace dyad::grad
