// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "dyad/training/optimizer.hpp"

#include <cmath>
#include <numbers>

#include "dyad/error.hpp"

namespace dyad::train {

void AdamWConfig::validate() const {
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("betas must lie in [0, 1)");
  if (!(eps > 0.0)) throw ConfigError("adam eps must be positive");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight decay must be non-negative");
}

AdamW::AdamW(AdamWConfig cfg) : cfg_(cfg) { cfg_.validate(); }

void AdamW::step(const std::vector<grad::Parameter*>& params, double lr) {
  if (!std::isfinite(lr) || lr < 0.0) throw ContractError("learning rate must be finite and non-negative");
  ++steps_;
  for (grad::Parameter* p : params) {
    if (!p->trainable) continue;
    if (p->grad.size() != p->value.size()) throw DimensionError("gradient of '" + p->name + "' has the wrong size");
    auto [it, fresh] = state_.try_emplace(p->name);
    Moments& s = it->second;
    if (fresh) {
      s.m = grad::Tensor(p->value.rows(), p->value.cols());
      s.v = grad::Tensor(p->value.rows(), p->value.cols());
    }
    ++s.steps;
    const double k = static_cast<double>(s.steps);
    const double c1 = 1.0 - std::pow(cfg_.beta1, k);
    const double c2 = 1.0 - std::pow(cfg_.beta2, k);
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double g = p->grad[i];
      s.m[i] = cfg_.beta1 * s.m[i] + (1.0 - cfg_.beta1) * g;
      s.v[i] = cfg_.beta2 * s.v[i] + (1.0 - cfg_.beta2) * g * g;
      const double m_hat = s.m[i] / c1;
      const double v_hat = s.v[i] / c2;
      p->value[i] -= lr * (m_hat / (std::sqrt(v_hat) + cfg_.eps) + cfg_.weight_decay * p->value[i]);
    }
  }
}

const AdamW::Moments* AdamW::moments(const std::string& name) const {
  auto it = state_.find(name);
  return it == state_.end() ? nullptr : &it->second;
}

double lr_schedule(std::size_t step, std::size_t total_steps, std::size_t warmup_steps, double base_lr) {
  if (step > total_steps) {
    throw ContractError("lr_schedule: step " + std::to_string(step) + " beyond " + std::to_string(total_steps));
  }
  if (warmup_steps > total_steps) throw ContractError("lr_schedule: warmup longer than the run");
  if (step < warmup_steps) return base_lr * static_cast<double>(step) / static_cast<double>(warmup_steps);
  if (total_steps == warmup_steps) return step == total_steps && warmup_steps > 0 ? base_lr : 0.0;
  const double progress =
      static_cast<double>(step - warmup_steps) / static_cast<double>(total_steps - warmup_steps);
  return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

double grad_norm(const std::vector<grad::Parameter*>& params) {
  double sq = 0.0;
  for (const grad::Parameter* p : params) {
    if (!p->trainable) continue;
    for (std::size_t i = 0; i < p->grad.size(); ++i) sq += p->grad[i] * p->grad[i];
  }
  return std::sqrt(sq);
}

double clip_grad_norm(const std::vector<grad::Parameter*>& params, double max_norm) {
  const double norm = grad_norm(params);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (grad::Parameter* p : params) {
      if (!p->trainable) continue;
      for (std::size_t i = 0; i < p->grad.size(); ++i) p->grad[i] *= s;
    }
  }
  return norm;
}

}  // namespace dyad::train
