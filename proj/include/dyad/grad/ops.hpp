// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Differentiable primitives. All operate on 2-D tensors; every output is
// checked for NaN/inf and a NumericError is thrown at the op that produced it.

#include <cstdint>
#include <span>
#include <vector>

#include "dyad/grad/graph.hpp"

namespace dyad::grad {

/// Row-major n x n visibility matrix; nonzero = may attend.
struct VisibilityView {
  const std::uint8_t* allowed = nullptr;
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
};

Var matmul(Var a, Var b);     // a[m,k] * b[k,n]
Var matmul_nt(Var a, Var b);  // a[m,k] * b[n,k]^T
Var transpose(Var a);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);        // elementwise
Var scale(Var a, double s);
Var add_row(Var a, Var row);  // broadcast a 1 x n row over every row of a
Var mul_row(Var a, Var row);

Var gelu(Var a);  // tanh approximation
Var sigmoid(Var a);

/// Per-row (x - mean) / sqrt(var + eps), no affine terms. A constant row maps
/// to zeros.
Var layer_norm(Var x, double eps = 1e-5);
/// layer_norm followed by gain and bias rows.
Var layer_norm_affine(Var x, Var gain, Var bias, double eps = 1e-5);

Var softmax(Var x);
/// Softmax over the visible entries of each row; hidden entries get exactly
/// zero probability and zero gradient. Every row needs at least one visible
/// entry.
Var masked_softmax(Var x, VisibilityView visible);

/// Rows of `table` selected by ids.
Var embedding(Var table, std::span<const std::int32_t> ids);

Var concat_rows(const std::vector<Var>& parts);
Var concat_cols(const std::vector<Var>& parts);
Var slice_rows(Var a, std::size_t begin, std::size_t end);
Var slice_cols(Var a, std::size_t begin, std::size_t end);
Var gather_rows(Var a, std::span<const std::size_t> rows);

Var sum(Var a);
Var mean(Var a);

/// Mean over rows of -log softmax(logits)[target].
Var cross_entropy(Var logits, std::span<const std::int32_t> targets);
/// Sum of squared differences (pred - target)^2 over all entries.
Var squared_error_sum(Var pred, Var target);

/// Non-differentiable helpers on plain tensors.
Tensor softmax_rows(const Tensor& x);
std::vector<std::int32_t> argmax_rows(const Tensor& x);

}  // namespace dyad::grad
