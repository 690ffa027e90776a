// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "dyad/grad/parameter.hpp"

namespace dyad::train {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-4;
  void validate() const;
};

/// Adam with decoupled weight decay:
///   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2
///   p <- p - lr (m / (1 - b1^k) / (sqrt(v / (1 - b2^k)) + eps) + wd p)
/// Only trainable parameters move; each keeps its own step count k, so a
/// parameter frozen in one phase starts its bias correction fresh later.
class AdamW {
 public:
  explicit AdamW(AdamWConfig cfg = {});

  void step(const std::vector<grad::Parameter*>& params, double lr);

  struct Moments {
    grad::Tensor m, v;
    std::size_t steps = 0;
  };
  const Moments* moments(const std::string& name) const;
  std::size_t steps_taken() const { return steps_; }

 private:
  AdamWConfig cfg_;
  std::map<std::string, Moments> state_;
  std::size_t steps_ = 0;
};

/// Linear warmup from 0 to base_lr over warmup_steps, then cosine decay to 0
/// at total_steps. Steps beyond total_steps are a ContractError.
double lr_schedule(std::size_t step, std::size_t total_steps, std::size_t warmup_steps, double base_lr);

/// Global L2 norm of trainable gradients.
double grad_norm(const std::vector<grad::Parameter*>& params);
/// Rescales trainable gradients so the global norm is at most max_norm;
/// returns the norm before clipping.
double clip_grad_norm(const std::vector<grad::Parameter*>& params, double max_norm);

}  // namespace dyad::train
