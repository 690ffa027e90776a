// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "dyad/grad/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "dyad/error.hpp"

namespace dyad::grad {
namespace {

double evaluate(const LossBuilder& build) {
  Graph g;
  return build(g).value().item();
}

std::vector<std::size_t> pick_coords(std::size_t n, std::size_t limit, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (limit == 0 || limit >= n) return idx;
  // partial Fisher-Yates with raw engine output keeps the sample portable
  for (std::size_t i = 0; i < limit; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(limit);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

GradCheckReport finite_diff_check(const LossBuilder& build, std::span<Parameter* const> params,
                                  const GradCheckOptions& opts) {
  if (!(opts.eps > 0.0)) throw ContractError("finite_diff_check needs eps > 0");
  if (opts.stencil != 2 && opts.stencil != 4) throw ContractError("finite_diff_check stencil must be 2 or 4");
  for (Parameter* p : params) p->grad = Tensor(p->value.rows(), p->value.cols());
  {
    Graph g;
    Var loss = build(g);
    g.backward(loss);
  }

  GradCheckReport report;
  report.tolerance = opts.tolerance;
  std::mt19937_64 rng(opts.seed);
  for (Parameter* p : params) {
    if (!p->trainable) continue;
    for (std::size_t i : pick_coords(p->value.size(), opts.max_coords_per_param, rng)) {
      const double original = p->value[i];
      auto at = [&](double offset) {
        p->value[i] = original + offset;
        const double f = evaluate(build);
        p->value[i] = original;
        return f;
      };
      const double h = opts.eps;

      GradCheckEntry e;
      e.param = p->name;
      e.index = i;
      e.analytic = p->grad[i];
      if (opts.stencil == 2) {
        e.numeric = (at(h) - at(-h)) / (2.0 * h);
      } else {
        e.numeric = (at(-2 * h) - 8.0 * at(-h) + 8.0 * at(h) - at(2 * h)) / (12.0 * h);
      }
      const double abs_err = std::abs(e.analytic - e.numeric);
      const double denom = std::max({std::abs(e.analytic), std::abs(e.numeric), opts.abs_floor});
      e.rel_error = abs_err / denom;
      report.max_abs_error = std::max(report.max_abs_error, abs_err);
      if (e.rel_error > report.max_rel_error || report.entries.empty()) {
        if (e.rel_error >= report.max_rel_error) {
          report.max_rel_error = e.rel_error;
          report.worst = p->name + "[" + std::to_string(i) + "]";
        }
      }
      report.entries.push_back(std::move(e));
    }
  }
  return report;
}

}  // namespace dyad::grad
