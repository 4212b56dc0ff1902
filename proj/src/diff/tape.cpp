// Copyright 2026 The dignn Authors. Apache 2.0 License.

#include "dignn/tape.hpp"

#include "dignn/errors.hpp"

namespace dignn {

const Tensor& Var::value() const {
  if (!valid()) throw ContractError("access to an unbound Var");
  return tape_->value(id_);
}

Tensor Var::grad() const {
  if (!valid()) throw ContractError("access to an unbound Var");
  return tape_->grad(id_);
}

Var Tape::constant(Tensor value) {
  Node n;
  n.own = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::leaf(Tensor value) {
  Node n;
  n.own = std::move(value);
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::param(Parameter& p) {
  Node n;
  n.external = &p.value;
  n.requires_grad = p.trainable && !inference_;
  n.param = &p;
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::record(Tensor value, std::vector<int> inputs, Backward back) {
  if (consumed_) throw ContractError("recording on a consumed tape");
  Node n;
  n.own = std::move(value);
  for (int i : inputs) n.requires_grad = n.requires_grad || nodes_[i].requires_grad;
  if (n.requires_grad) {
    n.inputs = std::move(inputs);
    n.back = std::move(back);
  }
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

const Tensor& Tape::value(int id) const {
  const Node& n = nodes_[id];
  return n.external ? *n.external : n.own;
}

Tensor& Tape::grad_buffer(int id) {
  Node& n = nodes_[id];
  if (n.grad.empty() && !value(id).empty()) {
    n.grad = Tensor(value(id).rows(), value(id).cols());
  }
  return n.grad;
}

Tensor Tape::grad(int id) const {
  const Node& n = nodes_[id];
  if (n.grad.empty()) return Tensor(value(id).rows(), value(id).cols());
  return n.grad;
}

void Tape::backward(Var loss, double seed) {
  if (consumed_) throw ContractError("backward called twice on the same tape");
  if (loss.tape() != this) throw ContractError("loss belongs to a different tape");
  const Tensor& lv = value(loss.id());
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw ContractError("backward requires a scalar loss, got shape " + lv.shape_str());
  }
  consumed_ = true;
  if (!nodes_[loss.id()].requires_grad) return;
  grad_buffer(loss.id())(0, 0) = seed;
  for (int id = loss.id(); id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (n.back) n.back(*this, n.grad);
    if (n.param) n.param->grad.add_scaled(n.grad);
  }
}

}  // namespace dignn
