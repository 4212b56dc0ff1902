// Copyright 2026 The dignn Authors. Apache 2.0 License.
//
// Composite building blocks on top of the primitive ops: dense layers,
// gated recurrent cells and the Gaussian radial basis.

#pragma once

#include <random>
#include <string>
#include <vector>

#include "dignn/ops.hpp"
#include "dignn/params.hpp"
#include "dignn/tape.hpp"

namespace dignn {

// Weight (out x in) and bias (1 x out) registered under prefix.W / prefix.b.
struct Dense {
  Parameter* w = nullptr;
  Parameter* b = nullptr;

  static Dense create(ParamSet& ps, const std::string& prefix, int in, int out,
                      std::mt19937_64& rng);
  int in() const { return w->value.cols(); }
  int out() const { return w->value.rows(); }
  Var operator()(Tape& tape, Var x) const;
};

// Gate weights bound on a tape. Each W acts on the concatenation
// [state; input] and has state-size rows.
struct GruVars {
  Var wz, wr, wh;
  Var bz, br, bh;
};

struct GruParams {
  Parameter* wz = nullptr;
  Parameter* wr = nullptr;
  Parameter* wh = nullptr;
  Parameter* bz = nullptr;
  Parameter* br = nullptr;
  Parameter* bh = nullptr;

  static GruParams create(ParamSet& ps, const std::string& prefix, int state, int input,
                          std::mt19937_64& rng);
  int state_size() const { return wz->value.rows(); }
  int input_size() const { return wz->value.cols() - wz->value.rows(); }
  GruVars bind(Tape& tape) const;
  std::int64_t count() const;
};

// One gated recurrent update for every row of h (n x d) given inputs m (n x k):
//   z = sigmoid(Wz [h; m] + bz), r = sigmoid(Wr [h; m] + br)
//   g = tanh(Wh [r*h; m] + bh),  h' = (1 - z) * h + z * g
Var gru_step(Var h, Var m, const GruVars& p);

struct RbfGrid {
  double start = 0.0;
  double stop = 8.0;
  int count = 64;
  double gamma = 10.0;

  std::vector<double> centers() const;
};

// k-th entry is exp(-gamma (d - mu_k)^2).
std::vector<double> rbf_expand(double d, const std::vector<double>& centers, double gamma);

}  // namespace dignn
