// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#include "dyad/grad/graph.hpp"

#include "dyad/error.hpp"
#include "dyad/simd/kernels.hpp"

namespace dyad::grad {

const Tensor& Var::value() const { return graph->value_of(id); }

Var Graph::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{this, static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Graph::constant(Tensor value) {
  if (!value.all_finite()) throw NumericError("non-finite value in constant leaf");
  Node n;
  n.owned = std::move(value);
  return push(std::move(n));
}

Var Graph::variable(Tensor value) {
  if (!value.all_finite()) throw NumericError("non-finite value in variable leaf");
  Node n;
  n.owned = std::move(value);
  n.requires_grad = true;
  return push(std::move(n));
}

Var Graph::parameter(Parameter& param) {
  if (!param.value.all_finite()) {
    throw NumericError("non-finite value in parameter '" + param.name + "'");
  }
  Node n;
  n.borrowed = &param.value;
  n.requires_grad = param.trainable;
  n.param = &param;
  return push(std::move(n));
}

Var Graph::record(Tensor value, std::vector<std::uint32_t> parents, BackwardFn fn) {
  Node n;
  n.owned = std::move(value);
  for (auto p : parents) {
    if (nodes_[p].requires_grad) n.requires_grad = true;
  }
  if (n.requires_grad) n.backward = std::move(fn);
  return push(std::move(n));
}

const Tensor& Graph::value_of(std::uint32_t id) const { return nodes_.at(id).value(); }

Tensor& Graph::grad_buffer(std::uint32_t id) {
  Node& n = nodes_.at(id);
  if (n.grad.empty() && n.value().size() != 0) {
    n.grad = Tensor(n.value().rows(), n.value().cols());
  }
  return n.grad;
}

const Tensor& Graph::grad(Var v) { return grad_buffer(v.id); }

void Graph::backward(Var loss) {
  if (loss.graph != this) throw ContractError("backward on a foreign node");
  const Tensor& lv = value(loss);
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw ContractError("backward root must be a scalar, got " + lv.shape_str());
  }
  for (auto& n : nodes_) n.grad = Tensor();
  grad_buffer(loss.id)[0] = 1.0;
  for (std::uint32_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.empty() || !n.backward) continue;
    n.backward(*this, i);
  }
  for (auto& n : nodes_) {
    if (n.param == nullptr || !n.param->trainable) continue;
    Parameter& p = *n.param;
    if (p.grad.rows() != p.value.rows() || p.grad.cols() != p.value.cols()) {
      p.grad = Tensor(p.value.rows(), p.value.cols());
    }
    if (!n.grad.empty()) simd::active().accumulate(n.grad.data().data(), p.grad.data().data(), p.grad.size());
  }
}

}  // namespace dyad::grad
