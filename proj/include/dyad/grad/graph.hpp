// Copyright 2026 The dyadstream Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "dyad/grad/parameter.hpp"
#include "dyad/grad/tensor.hpp"

namespace dyad::grad {

class Graph;

/// Handle to a node recorded on a Graph.
struct Var {
  Graph* graph = nullptr;
  std::uint32_t id = 0;

  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  bool valid() const { return graph != nullptr; }
};

/// Tape of recorded operations. Nodes are appended in creation order, which is
/// a topological order; backward walks it in reverse, so gradient
/// accumulation order is fixed and results are reproducible bit for bit.
///
/// A graph is single-threaded. Separate graphs are independent.
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, std::uint32_t self)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  /// Leaf that never receives a gradient.
  Var constant(Tensor value);
  /// Leaf that receives a gradient.
  Var variable(Tensor value);
  /// Leaf bound to a parameter; backward() adds into param.grad when the
  /// parameter is trainable. The parameter must outlive the graph.
  Var parameter(Parameter& param);

  /// Records an op output. `parents` are the inputs whose gradients `fn`
  /// will accumulate.
  Var record(Tensor value, std::vector<std::uint32_t> parents, BackwardFn fn);

  const Tensor& value(Var v) const { return value_of(v.id); }
  const Tensor& value_of(std::uint32_t id) const;
  /// Gradient of the last backward() root with respect to v (zeros if v
  /// was not reached).
  const Tensor& grad(Var v);

  bool requires_grad(std::uint32_t id) const { return nodes_[id].requires_grad; }
  /// Mutable gradient buffer of a node, allocated on first use.
  Tensor& grad_buffer(std::uint32_t id);
  /// Incoming gradient of a node during backward(); empty when nothing
  /// flowed into it.
  const Tensor& upstream(std::uint32_t id) const { return nodes_[id].grad; }

  /// Reverse-mode sweep from a 1 x 1 root. Throws ContractError otherwise.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor owned;
    const Tensor* borrowed = nullptr;
    Tensor grad;
    bool requires_grad = false;
    Parameter* param = nullptr;
    BackwardFn backward;
    const Tensor& value() const { return borrowed != nullptr ? *borrowed : owned; }
  };

  Var push(Node node);

  std::vector<Node> nodes_;
};

}  // namespace dyad::grad
