// Copyright 2026 The dignn Authors. Apache 2.0 License.
//
// Differentiable primitives. Every op records itself on the tape of its
// first argument; all arguments must live on the same tape.

#pragma once

#include <span>
#include <vector>

#include "dignn/tape.hpp"

namespace dignn::ops {

enum class Activation { kSigmoid, kTanh, kSoftplus, kShiftedSoftplus };

// Scalar reference implementations, overflow-guarded.
double sigmoid(double x);
double softplus(double x);
double shifted_softplus(double x);
double apply_activation(Activation kind, double x);
double activation_derivative(Activation kind, double x);

// Y = X W^T + b for X (n x in), W (out x in), b (1 x out).
Var affine(Var x, Var w, Var b);
// Y = X W^T.
Var linear(Var x, Var w);
Var activation(Var x, Activation kind);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);  // elementwise
// c * a + k with constants c, k.
Var affine_const(Var a, double c, double k = 0.0);
// s * a where s is a 1 x 1 value.
Var scale_by(Var a, Var s);
// a * v with v (1 x cols) broadcast down the rows.
Var mul_row(Var a, Var v);
// a + v with v (1 x cols) broadcast down the rows.
Var add_row(Var a, Var v);

Var concat_cols(std::span<const Var> parts);
Var slice_cols(Var a, int start, int count);

// out[i] = a[index[i]].
Var gather_rows(Var a, std::span<const int> index);
// out has out_rows rows; out[index[i]] += a[i].
Var scatter_add_rows(Var a, std::span<const int> index, int out_rows);

// 1 x cols column sums.
Var sum_rows(Var a);
// 1 x 1 total.
Var sum_all(Var a);

// Row i of a (n x out*in) is an out x in matrix (row-major) applied to row i
// of x (n x in). Result is n x out.
Var batched_matvec(Var a, Var x, int out);

// Row-wise softmax.
Var softmax_rows(Var a);

// Mean of squared differences against a constant target; 1 x 1.
Var mse_loss(Var pred, const Tensor& target);

}  // namespace dignn::ops
