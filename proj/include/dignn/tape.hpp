// Copyright 2026 The dignn Authors. Apache 2.0 License.
//
// Reverse-mode differentiation over 2-D arrays. A Tape records every
// primitive application in execution order (which is a topological order);
// backward() walks it in reverse and accumulates adjoints. Parameters enter
// the tape as leaves that refer to their owning Parameter, and their
// adjoints are added into Parameter::grad when the tape is consumed.

#pragma once

#include <functional>
#include <vector>

#include "dignn/params.hpp"
#include "dignn/tensor.hpp"

namespace dignn {

class Tape;

// Handle to a value recorded on a tape.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  bool valid() const noexcept { return tape_ != nullptr && id_ >= 0; }
  int id() const noexcept { return id_; }
  Tape* tape() const noexcept { return tape_; }

  const Tensor& value() const;
  // Accumulated adjoint; all-zero if the value did not influence the loss.
  Tensor grad() const;
  int rows() const { return value().rows(); }
  int cols() const { return value().cols(); }
  double item() const { return value().item(); }

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, const Tensor& grad_out)>;

  Tape() = default;
  // An inference tape: parameters enter as constants, so no backward
  // closures are recorded.
  static Tape inference() {
    Tape t;
    t.inference_ = true;
    return t;
  }
  Tape(Tape&&) = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // A value that never needs a gradient.
  Var constant(Tensor value);
  // A free leaf whose adjoint is kept on the tape (used in tests).
  Var leaf(Tensor value);
  // A leaf bound to a parameter; backward() adds its adjoint into p.grad.
  Var param(Parameter& p);

  // Records an operation. back is invoked only if some input requires grad.
  Var record(Tensor value, std::vector<int> inputs, Backward back);

  const Tensor& value(int id) const;
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }
  // Mutable adjoint buffer for id, allocated on first use.
  Tensor& grad_buffer(int id);
  Tensor grad(int id) const;

  // Seeds d(loss)/d(loss) = seed and propagates. loss must be 1 x 1.
  // The tape is consumed: a second call throws.
  void backward(Var loss, double seed = 1.0);

  std::size_t size() const { return nodes_.size(); }
  bool consumed() const { return consumed_; }

 private:
  struct Node {
    Tensor own;
    const Tensor* external = nullptr;
    Tensor grad;
    bool requires_grad = false;
    Parameter* param = nullptr;
    std::vector<int> inputs;
    Backward back;
  };
  std::vector<Node> nodes_;
  bool consumed_ = false;
  bool inference_ = false;
};

}  // namespace dignn
