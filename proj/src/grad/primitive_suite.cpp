// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "dyad/grad/primitive_suite.hpp"

#include <cstdint>

#include "dyad/grad/ops.hpp"

namespace dyad::grad {
namespace {

Tensor fixed(std::size_t r, std::size_t c, std::uint64_t seed) { return normal_tensor(r, c, 1.0, seed); }

const std::uint8_t kMask[] = {1, 0, 0, 1, 1, 0, 1, 1, 1, 0, 1, 0};
const std::int32_t kIds[] = {3, 1, 3, 0};
const std::size_t kRows[] = {2, 2, 0};
const std::int32_t kTargets[] = {1, 4, 0};

std::vector<PrimitiveCheck> make_checks() {
  // Constants are drawn once here so every evaluation sees the same values.
  const Tensor m45 = fixed(4, 5, 1), m34 = fixed(3, 4, 2), m54 = fixed(5, 4, 3), n34 = fixed(3, 4, 4);
  const Tensor a34 = fixed(3, 4, 5), b34 = fixed(3, 4, 6), c34 = fixed(3, 4, 7), r14 = fixed(1, 4, 8);
  const Tensor x36 = fixed(3, 6, 9), b16 = fixed(1, 6, 10), r13 = fixed(1, 3, 11), m22 = fixed(2, 2, 12);
  const Tensor t34 = fixed(3, 4, 13);
  return {
      {"matmul_left", 3, 4, [=](Graph& g, Var x) { return matmul(x, g.constant(m45)); }},
      {"matmul_right", 4, 5, [=](Graph& g, Var x) { return matmul(g.constant(m34), x); }},
      {"matmul_nt_left", 3, 4, [=](Graph& g, Var x) { return matmul_nt(x, g.constant(m54)); }},
      {"matmul_nt_right", 5, 4, [=](Graph& g, Var x) { return matmul_nt(g.constant(n34), x); }},
      {"matmul_self", 4, 4, [](Graph&, Var x) { return matmul(x, x); }},
      {"transpose", 3, 5, [](Graph&, Var x) { return transpose(x); }},
      {"add", 3, 4, [=](Graph& g, Var x) { return add(x, g.constant(a34)); }},
      {"sub", 3, 4, [=](Graph& g, Var x) { return sub(g.constant(a34), x); }},
      {"mul", 3, 4, [=](Graph& g, Var x) { return mul(x, g.constant(b34)); }},
      {"scale", 3, 4, [](Graph&, Var x) { return scale(x, -1.7); }},
      {"add_row_row", 1, 4, [=](Graph& g, Var x) { return add_row(g.constant(c34), x); }},
      {"mul_row_row", 1, 4, [=](Graph& g, Var x) { return mul_row(g.constant(c34), x); }},
      {"mul_row_mat", 3, 4, [=](Graph& g, Var x) { return mul_row(x, g.constant(r14)); }},
      {"gelu", 3, 4, [](Graph&, Var x) { return gelu(x); }},
      {"sigmoid", 3, 4, [](Graph&, Var x) { return sigmoid(x); }},
      {"layer_norm", 3, 6, [](Graph&, Var x) { return layer_norm(x); }},
      {"layer_norm_affine_gain", 1, 6,
       [=](Graph& g, Var x) { return layer_norm_affine(g.constant(x36), x, g.constant(b16)); }},
      {"layer_norm_affine_bias", 1, 6,
       [=](Graph& g, Var x) { return layer_norm_affine(g.constant(x36), g.constant(b16), x); }},
      {"softmax", 3, 5, [](Graph&, Var x) { return softmax(x); }},
      {"masked_softmax", 3, 4, [](Graph&, Var x) { return masked_softmax(x, {kMask, 3, 4}); }},
      {"embedding", 4, 3, [](Graph&, Var x) { return embedding(x, kIds); }},
      {"concat_rows", 2, 3, [=](Graph& g, Var x) { return concat_rows({x, g.constant(r13), x}); }},
      {"concat_cols", 2, 3, [=](Graph& g, Var x) { return concat_cols({g.constant(m22), x, x}); }},
      {"slice_rows", 4, 3, [](Graph&, Var x) { return slice_rows(x, 1, 3); }},
      {"slice_cols", 3, 5, [](Graph&, Var x) { return slice_cols(x, 2, 5); }},
      {"gather_rows", 3, 3, [](Graph&, Var x) { return gather_rows(x, kRows); }},
      {"sum", 3, 4, [](Graph&, Var x) { return sum(x); }},
      {"mean", 3, 4, [](Graph&, Var x) { return mean(x); }},
      {"cross_entropy", 3, 5, [](Graph&, Var x) { return cross_entropy(x, kTargets); }},
      {"squared_error_sum", 3, 4, [=](Graph& g, Var x) { return squared_error_sum(x, g.constant(t34)); }},
  };
}

}  // namespace

const std::vector<PrimitiveCheck>& primitive_checks() {
  static const std::vector<PrimitiveCheck> checks = make_checks();
  return checks;
}

GradCheckReport run_primitive_check(const PrimitiveCheck& check, double tolerance) {
  ParameterStore store;
  Parameter& x = store.add("x", normal_tensor(check.in_rows, check.in_cols, 0.8, 1234));
  // Output shape is fixed, so the projection weights can be drawn lazily once.
  Tensor weights;
  auto build = [&](Graph& g) {
    Var y = check.op(g, g.parameter(x));
    if (weights.size() == 0) weights = normal_tensor(y.rows(), y.cols(), 1.0, 999);
    return sum(mul(y, g.constant(weights)));
  };
  Parameter* ps[] = {&x};
  GradCheckOptions opts;
  opts.eps = 1e-5;
  opts.tolerance = tolerance;
  opts.abs_floor = 1e-6;
  GradCheckReport report = finite_diff_check(build, ps, opts);
  if (!report.worst.empty()) report.worst = check.name + ": " + report.worst;
  return report;
}

}  // namespace dyad::grad
