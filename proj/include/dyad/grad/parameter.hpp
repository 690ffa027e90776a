// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <vector>

#include "dyad/grad/tensor.hpp"

namespace dyad::grad {

/// A trainable weight array with its accumulated gradient.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  bool trainable = true;
};

/// Owns parameters with stable addresses; iteration follows insertion order.
class ParameterStore {
 public:
  Parameter& add(const std::string& name, Tensor value);
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;

  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;

  void zero_grad();
  /// Marks parameters trainable iff their name starts with one of the prefixes.
  void set_trainable_prefixes(const std::vector<std::string>& prefixes);
  void set_all_trainable(bool on);

 private:
  std::deque<Parameter> params_;
  std::map<std::string, std::size_t> index_;
};

/// Initializers. Gaussian draws use a local xorshift generator plus Box-Muller
/// so that weights are identical across standard libraries.
Tensor normal_tensor(std::size_t rows, std::size_t cols, double stddev, std::uint64_t seed);

}  // namespace dyad::grad
