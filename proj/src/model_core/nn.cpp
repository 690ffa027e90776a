// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "dyad/model_core/nn.hpp"

#include <cmath>
#include <vector>

#include "dyad/error.hpp"

namespace dyad::nn {

Var Scope::operator()(const std::string& name) {
  auto it = bound_.find(name);
  if (it != bound_.end()) return it->second;
  Var v = g_.parameter(store_.get(name));
  bound_.emplace(name, v);
  return v;
}

std::uint64_t name_seed(std::uint64_t base, const std::string& name) {
  std::uint64_t h = 1469598103934665603ull ^ base;  // FNV-1a
  for (unsigned char c : name) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void add_linear(ParameterStore& s, const std::string& name, std::size_t in, std::size_t out, double stddev,
                std::uint64_t seed, bool bias) {
  s.add(name + ".w", grad::normal_tensor(in, out, stddev, name_seed(seed, name)));
  if (bias) s.add(name + ".b", Tensor(1, out));
}

void add_layer_norm(ParameterStore& s, const std::string& name, std::size_t d) {
  s.add(name + ".g", Tensor(1, d, 1.0));
  s.add(name + ".b", Tensor(1, d));
}

namespace {

void add_attention(ParameterStore& s, const std::string& prefix, std::size_t d, double stddev, std::uint64_t seed) {
  // No key bias: it shifts every score in a row equally and never trains.
  add_linear(s, prefix + ".q", d, d, stddev, seed);
  add_linear(s, prefix + ".k", d, d, stddev, seed, /*bias=*/false);
  add_linear(s, prefix + ".v", d, d, stddev, seed);
  add_linear(s, prefix + ".o", d, d, stddev, seed);
}

}  // namespace

void add_block(ParameterStore& s, const std::string& prefix, std::size_t d, std::size_t mlp_hidden, double stddev,
               std::uint64_t seed, bool cross) {
  add_layer_norm(s, prefix + ".ln1", d);
  add_attention(s, prefix + ".attn", d, stddev, seed);
  if (cross) {
    add_layer_norm(s, prefix + ".lnx", d);
    add_layer_norm(s, prefix + ".lnm", d);
    add_attention(s, prefix + ".xattn", d, stddev, seed);
  }
  add_layer_norm(s, prefix + ".ln2", d);
  add_linear(s, prefix + ".fc1", d, mlp_hidden, stddev, seed);
  add_linear(s, prefix + ".fc2", mlp_hidden, d, stddev, seed);
}

Var linear(Scope& p, const std::string& name, Var x, bool bias) {
  Var y = grad::matmul(x, p(name + ".w"));
  return bias ? grad::add_row(y, p(name + ".b")) : y;
}

Var layer_norm(Scope& p, const std::string& name, Var x) {
  return grad::layer_norm_affine(x, p(name + ".g"), p(name + ".b"));
}

Var attention(Scope& p, const std::string& prefix, Var q_in, Var kv_in, grad::VisibilityView mask,
              std::size_t n_heads) {
  const std::size_t d = q_in.cols();
  if (d % n_heads != 0) throw ContractError("attention width not divisible by head count");
  if (mask.n_rows != q_in.rows() || mask.n_cols != kv_in.rows()) {
    throw ContractError("attention mask is " + std::to_string(mask.n_rows) + "x" + std::to_string(mask.n_cols) +
                        " but inputs need " + std::to_string(q_in.rows()) + "x" + std::to_string(kv_in.rows()));
  }
  const std::size_t dh = d / n_heads;
  Var q = linear(p, prefix + ".q", q_in);
  Var k = linear(p, prefix + ".k", kv_in, /*bias=*/false);
  Var v = linear(p, prefix + ".v", kv_in);
  const double inv = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<Var> heads;
  heads.reserve(n_heads);
  for (std::size_t h = 0; h < n_heads; ++h) {
    Var qh = n_heads == 1 ? q : grad::slice_cols(q, h * dh, (h + 1) * dh);
    Var kh = n_heads == 1 ? k : grad::slice_cols(k, h * dh, (h + 1) * dh);
    Var vh = n_heads == 1 ? v : grad::slice_cols(v, h * dh, (h + 1) * dh);
    Var w = grad::masked_softmax(grad::scale(grad::matmul_nt(qh, kh), inv), mask);
    heads.push_back(grad::matmul(w, vh));
  }
  Var o = n_heads == 1 ? heads[0] : grad::concat_cols(heads);
  return linear(p, prefix + ".o", o);
}

namespace {

Var mlp_residual(Scope& p, const std::string& prefix, Var x) {
  Var h = layer_norm(p, prefix + ".ln2", x);
  h = linear(p, prefix + ".fc2", grad::gelu(linear(p, prefix + ".fc1", h)));
  return grad::add(x, h);
}

}  // namespace

Var block(Scope& p, const std::string& prefix, Var x, grad::VisibilityView self_mask, std::size_t n_heads) {
  Var h = layer_norm(p, prefix + ".ln1", x);
  x = grad::add(x, attention(p, prefix + ".attn", h, h, self_mask, n_heads));
  return mlp_residual(p, prefix, x);
}

Var cross_block(Scope& p, const std::string& prefix, Var x, Var memory, grad::VisibilityView self_mask,
                grad::VisibilityView cross_mask, std::size_t n_heads) {
  Var h = layer_norm(p, prefix + ".ln1", x);
  x = grad::add(x, attention(p, prefix + ".attn", h, h, self_mask, n_heads));
  Var hq = layer_norm(p, prefix + ".lnx", x);
  Var hm = layer_norm(p, prefix + ".lnm", memory);
  x = grad::add(x, attention(p, prefix + ".xattn", hq, hm, cross_mask, n_heads));
  return mlp_residual(p, prefix, x);
}

Tensor sinusoidal(std::span<const double> positions, std::size_t d) {
  Tensor out(positions.size(), d);
  for (std::size_t r = 0; r < positions.size(); ++r) {
    for (std::size_t i = 0; 2 * i < d; ++i) {
      const double freq = std::pow(10000.0, -static_cast<double>(2 * i) / static_cast<double>(d));
      out(r, 2 * i) = std::sin(positions[r] * freq);
      if (2 * i + 1 < d) out(r, 2 * i + 1) = std::cos(positions[r] * freq);
    }
  }
  return out;
}

std::vector<std::uint8_t> causal_bits(std::size_t n) {
  std::vector<std::uint8_t> bits(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) bits[i * n + j] = 1;
  }
  return bits;
}

}  // namespace dyad::nn
