// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Transformer building blocks shared by the core network, the vision
// decoder and the audio head. Weights live in a ParameterStore under dotted
// names; a Scope binds them to one graph.

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>

#include "dyad/grad/graph.hpp"
#include "dyad/grad/ops.hpp"
#include "dyad/grad/parameter.hpp"

namespace dyad::nn {

using grad::Graph;
using grad::ParameterStore;
using grad::Tensor;
using grad::Var;

/// Parameters bound to one graph, each bound at most once.
class Scope {
 public:
  Scope(Graph& g, ParameterStore& store) : g_(g), store_(store) {}
  Var operator()(const std::string& name);
  Graph& graph() { return g_; }
  ParameterStore& store() { return store_; }

 private:
  Graph& g_;
  ParameterStore& store_;
  std::unordered_map<std::string, Var> bound_;
};

/// Deterministic per-name seed.
std::uint64_t name_seed(std::uint64_t base, const std::string& name);

void add_linear(ParameterStore& s, const std::string& name, std::size_t in, std::size_t out, double stddev,
                std::uint64_t seed, bool bias = true);
void add_layer_norm(ParameterStore& s, const std::string& name, std::size_t d);
/// Pre-norm block: self-attention, optional cross-attention, GELU MLP.
void add_block(ParameterStore& s, const std::string& prefix, std::size_t d, std::size_t mlp_hidden, double stddev,
               std::uint64_t seed, bool cross = false);

Var linear(Scope& p, const std::string& name, Var x, bool bias = true);
Var layer_norm(Scope& p, const std::string& name, Var x);

/// Multi-head attention of queries from q_in over keys/values from kv_in.
/// `mask` is n_q x n_kv.
Var attention(Scope& p, const std::string& prefix, Var q_in, Var kv_in, grad::VisibilityView mask, std::size_t n_heads);

Var block(Scope& p, const std::string& prefix, Var x, grad::VisibilityView self_mask, std::size_t n_heads);
Var cross_block(Scope& p, const std::string& prefix, Var x, Var memory, grad::VisibilityView self_mask,
                grad::VisibilityView cross_mask, std::size_t n_heads);

/// Rows of sinusoidal encodings: pe[2i] = sin(pos / 10000^(2i/d)),
/// pe[2i+1] = cos(same).
Tensor sinusoidal(std::span<const double> positions, std::size_t d);

/// Lower-triangular (causal) visibility of size n, row-major.
std::vector<std::uint8_t> causal_bits(std::size_t n);

}  // namespace dyad::nn
