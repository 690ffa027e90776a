// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "dyad/grad/parameter.hpp"

#include <cmath>

#include "dyad/error.hpp"

namespace dyad::grad {

Parameter& ParameterStore::add(const std::string& name, Tensor value) {
  if (contains(name)) throw ContractError("duplicate parameter '" + name + "'");
  index_[name] = params_.size();
  Parameter& p = params_.emplace_back();
  p.name = name;
  p.grad = Tensor(value.rows(), value.cols());
  p.value = std::move(value);
  return p;
}

Parameter& ParameterStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("unknown parameter '" + name + "'");
  return params_[it->second];
}

const Parameter& ParameterStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractError("unknown parameter '" + name + "'");
  return params_[it->second];
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

std::vector<Parameter*> ParameterStore::all() {
  std::vector<Parameter*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(&p);
  return out;
}

std::vector<const Parameter*> ParameterStore::all() const {
  std::vector<const Parameter*> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(&p);
  return out;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) {
    if (p.grad.rows() != p.value.rows() || p.grad.cols() != p.value.cols()) {
      p.grad = Tensor(p.value.rows(), p.value.cols());
    } else {
      p.grad.fill(0.0);
    }
  }
}

void ParameterStore::set_trainable_prefixes(const std::vector<std::string>& prefixes) {
  for (auto& p : params_) {
    p.trainable = false;
    for (const auto& prefix : prefixes) {
      if (p.name.rfind(prefix, 0) == 0) p.trainable = true;
    }
  }
}

void ParameterStore::set_all_trainable(bool on) {
  for (auto& p : params_) p.trainable = on;
}

Tensor normal_tensor(std::size_t rows, std::size_t cols, double stddev, std::uint64_t seed) {
  // splitmix64 seeding, then xorshift64*
  std::uint64_t state = seed + 0x9E3779B97F4A7C15ULL;
  state = (state ^ (state >> 30)) * 0xBF58476D1CE4E5B9ULL;
  state = (state ^ (state >> 27)) * 0x94D049BB133111EBULL;
  state ^= state >> 31;
  if (state == 0) state = 0x2545F4914F6CDD1DULL;
  auto next_uniform = [&state]() {
    state ^= state >> 12;
    state ^= state << 25;
    state ^= state >> 27;
    const std::uint64_t x = state * 0x2545F4914F6CDD1DULL;
    return (static_cast<double>(x >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  };
  Tensor t(rows, cols);
  const double two_pi = 6.283185307179586476925286766559;
  for (std::size_t i = 0; i < t.size(); i += 2) {
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    t[i] = stddev * radius * std::cos(two_pi * u2);
    if (i + 1 < t.size()) t[i + 1] = stddev * radius * std::sin(two_pi * u2);
  }
  return t;
}

}  // namespace dyad::grad
