// Copyright 2026 The dignn Authors. Apache 2.0 License.

#include "dignn/ops.hpp"

#include <cmath>

#include "dignn/errors.hpp"

namespace dignn::ops {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

Tape& tape_of(Var a) {
  if (!a.valid()) throw ContractError("op applied to an unbound Var");
  return *a.tape();
}

void same_tape(Var a, Var b) {
  if (a.tape() != b.tape()) throw ContractError("op arguments live on different tapes");
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                     b.shape_str());
  }
}

void require_row(const char* op, const Tensor& v, int cols) {
  if (v.rows() != 1 || v.cols() != cols) {
    throw ShapeError(std::string(op) + ": expected [1x" + std::to_string(cols) + "], got " +
                     v.shape_str());
  }
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double shifted_softplus(double x) { return softplus(x) - kLn2; }

double apply_activation(Activation kind, double x) {
  switch (kind) {
    case Activation::kSigmoid: return sigmoid(x);
    case Activation::kTanh: return std::tanh(x);
    case Activation::kSoftplus: return softplus(x);
    case Activation::kShiftedSoftplus: return shifted_softplus(x);
  }
  return 0.0;
}

double activation_derivative(Activation kind, double x) {
  switch (kind) {
    case Activation::kSigmoid: {
      const double s = sigmoid(x);
      return s * (1.0 - s);
    }
    case Activation::kTanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case Activation::kSoftplus:
    case Activation::kShiftedSoftplus: return sigmoid(x);
  }
  return 0.0;
}

Var affine(Var x, Var w, Var b) {
  same_tape(x, w);
  same_tape(x, b);
  Tape& t = tape_of(x);
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  const Tensor& bv = b.value();
  if (xv.cols() != wv.cols()) {
    throw ShapeError("dense_affine: input " + xv.shape_str() + " incompatible with weight " +
                     wv.shape_str());
  }
  require_row("dense_affine bias", bv, wv.rows());
  Tensor y = matmul_nt(xv, wv);
  for (int r = 0; r < y.rows(); ++r) {
    auto row = y.row_span(r);
    for (int c = 0; c < y.cols(); ++c) row[c] += bv[c];
  }
  const int xi = x.id(), wi = w.id(), bi = b.id();
  return t.record(std::move(y), {xi, wi, bi}, [xi, wi, bi](Tape& tp, const Tensor& g) {
    if (tp.requires_grad(xi)) tp.grad_buffer(xi).add_scaled(matmul_nn(g, tp.value(wi)));
    if (tp.requires_grad(wi)) tp.grad_buffer(wi).add_scaled(matmul_tn(g, tp.value(xi)));
    if (tp.requires_grad(bi)) {
      Tensor& gb = tp.grad_buffer(bi);
      for (int r = 0; r < g.rows(); ++r) {
        auto row = g.row_span(r);
        for (int c = 0; c < g.cols(); ++c) gb[c] += row[c];
      }
    }
  });
}

Var linear(Var x, Var w) {
  same_tape(x, w);
  Tape& t = tape_of(x);
  Tensor y = matmul_nt(x.value(), w.value());
  const int xi = x.id(), wi = w.id();
  return t.record(std::move(y), {xi, wi}, [xi, wi](Tape& tp, const Tensor& g) {
    if (tp.requires_grad(xi)) tp.grad_buffer(xi).add_scaled(matmul_nn(g, tp.value(wi)));
    if (tp.requires_grad(wi)) tp.grad_buffer(wi).add_scaled(matmul_tn(g, tp.value(xi)));
  });
}

Var activation(Var x, Activation kind) {
  Tape& t = tape_of(x);
  const Tensor& xv = x.value();
  Tensor y(xv.rows(), xv.cols());
  for (std::size_t i = 0; i < xv.size(); ++i) y[i] = apply_activation(kind, xv[i]);
  const int xi = x.id();
  return t.record(std::move(y), {xi}, [xi, kind](Tape& tp, const Tensor& g) {
    const Tensor& xv = tp.value(xi);
    Tensor& gx = tp.grad_buffer(xi);
    for (std::size_t i = 0; i < xv.size(); ++i) {
      gx[i] += g[i] * activation_derivative(kind, xv[i]);
    }
  });
}

Var add(Var a, Var b) {
  same_tape(a, b);
  require_same_shape("add", a.value(), b.value());
  Tensor y = a.value();
  y.add_scaled(b.value());
  const int ai = a.id(), bi = b.id();
  return tape_of(a).record(std::move(y), {ai, bi}, [ai, bi](Tape& tp, const Tensor& g) {
    if (tp.requires_grad(ai)) tp.grad_buffer(ai).add_scaled(g);
    if (tp.requires_grad(bi)) tp.grad_buffer(bi).add_scaled(g);
  });
}

Var sub(Var a, Var b) {
  same_tape(a, b);
  require_same_shape("sub", a.value(), b.value());
  Tensor y = a.value();
  y.add_scaled(b.value(), -1.0);
  const int ai = a.id(), bi = b.id();
  return tape_of(a).record(std::move(y), {ai, bi}, [ai, bi](Tape& tp, const Tensor& g) {
    if (tp.requires_grad(ai)) tp.grad_buffer(ai).add_scaled(g);
    if (tp.requires_grad(bi)) tp.grad_buffer(bi).add_scaled(g, -1.0);
  });
}

Var mul(Var a, Var b) {
  same_tape(a, b);
  require_same_shape("mul", a.value(), b.value());
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  Tensor y(av.rows(), av.cols());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = av[i] * bv[i];
  const int ai = a.id(), bi = b.id();
  return tape_of(a).record(std::move(y), {ai, bi}, [ai, bi](Tape& tp, const Tensor& g) {
    const Tensor& av = tp.value(ai);
    const Tensor& bv = tp.value(bi);
    if (tp.requires_grad(ai)) {
      Tensor& ga = tp.grad_buffer(ai);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (tp.requires_grad(bi)) {
      Tensor& gb = tp.grad_buffer(bi);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

Var affine_const(Var a, double c, double k) {
  const Tensor& av = a.value();
  Tensor y(av.rows(), av.cols());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = c * av[i] + k;
  const int ai = a.id();
  return tape_of(a).record(std::move(y), {ai}, [ai, c](Tape& tp, const Tensor& g) {
    tp.grad_buffer(ai).add_scaled(g, c);
  });
}

Var scale_by(Var a, Var s) {
  same_tape(a, s);
  const Tensor& sv = s.value();
  if (sv.size() != 1) throw ShapeError("scale_by: scale must be [1x1], got " + sv.shape_str());
  const double k = sv[0];
  const Tensor& av = a.value();
  Tensor y(av.rows(), av.cols());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = k * av[i];
  const int ai = a.id(), si = s.id();
  return tape_of(a).record(std::move(y), {ai, si}, [ai, si](Tape& tp, const Tensor& g) {
    const double k = tp.value(si)[0];
    if (tp.requires_grad(ai)) tp.grad_buffer(ai).add_scaled(g, k);
    if (tp.requires_grad(si)) {
      const Tensor& av = tp.value(ai);
      double acc = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * av[i];
      tp.grad_buffer(si)[0] += acc;
    }
  });
}

Var mul_row(Var a, Var v) {
  same_tape(a, v);
  const Tensor& av = a.value();
  const Tensor& vv = v.value();
  require_row("mul_row", vv, av.cols());
  Tensor y(av.rows(), av.cols());
  for (int r = 0; r < av.rows(); ++r) {
    for (int c = 0; c < av.cols(); ++c) y(r, c) = av(r, c) * vv[c];
  }
  const int ai = a.id(), vi = v.id();
  return tape_of(a).record(std::move(y), {ai, vi}, [ai, vi](Tape& tp, const Tensor& g) {
    const Tensor& av = tp.value(ai);
    const Tensor& vv = tp.value(vi);
    if (tp.requires_grad(ai)) {
      Tensor& ga = tp.grad_buffer(ai);
      for (int r = 0; r < g.rows(); ++r) {
        for (int c = 0; c < g.cols(); ++c) ga(r, c) += g(r, c) * vv[c];
      }
    }
    if (tp.requires_grad(vi)) {
      Tensor& gv = tp.grad_buffer(vi);
      for (int r = 0; r < g.rows(); ++r) {
        for (int c = 0; c < g.cols(); ++c) gv[c] += g(r, c) * av(r, c);
      }
    }
  });
}

Var add_row(Var a, Var v) {
  same_tape(a, v);
  const Tensor& av = a.value();
  const Tensor& vv = v.value();
  require_row("add_row", vv, av.cols());
  Tensor y = av;
  for (int r = 0; r < y.rows(); ++r) {
    for (int c = 0; c < y.cols(); ++c) y(r, c) += vv[c];
  }
  const int ai = a.id(), vi = v.id();
  return tape_of(a).record(std::move(y), {ai, vi}, [ai, vi](Tape& tp, const Tensor& g) {
    if (tp.requires_grad(ai)) tp.grad_buffer(ai).add_scaled(g);
    if (tp.requires_grad(vi)) {
      Tensor& gv = tp.grad_buffer(vi);
      for (int r = 0; r < g.rows(); ++r) {
        for (int c = 0; c < g.cols(); ++c) gv[c] += g(r, c);
      }
    }
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const int rows = parts[0].rows();
  int cols = 0;
  std::vector<int> ids, offsets;
  for (const Var& p : parts) {
    same_tape(parts[0], p);
    if (p.rows() != rows) {
      throw ShapeError("concat_cols: row mismatch " + parts[0].value().shape_str() + " vs " +
                       p.value().shape_str());
    }
    ids.push_back(p.id());
    offsets.push_back(cols);
    cols += p.cols();
  }
  Tensor y(rows, cols);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& pv = parts[k].value();
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < pv.cols(); ++c) y(r, offsets[k] + c) = pv(r, c);
    }
  }
  return tape_of(parts[0]).record(std::move(y), ids, [ids, offsets](Tape& tp, const Tensor& g) {
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (!tp.requires_grad(ids[k])) continue;
      Tensor& gp = tp.grad_buffer(ids[k]);
      for (int r = 0; r < gp.rows(); ++r) {
        for (int c = 0; c < gp.cols(); ++c) gp(r, c) += g(r, offsets[k] + c);
      }
    }
  });
}

Var slice_cols(Var a, int start, int count) {
  const Tensor& av = a.value();
  if (start < 0 || count < 0 || start + count > av.cols()) {
    throw ShapeError("slice_cols: [" + std::to_string(start) + ", +" + std::to_string(count) +
                     ") out of range for " + av.shape_str());
  }
  Tensor y(av.rows(), count);
  for (int r = 0; r < av.rows(); ++r) {
    for (int c = 0; c < count; ++c) y(r, c) = av(r, start + c);
  }
  const int ai = a.id();
  return tape_of(a).record(std::move(y), {ai}, [ai, start](Tape& tp, const Tensor& g) {
    Tensor& ga = tp.grad_buffer(ai);
    for (int r = 0; r < g.rows(); ++r) {
      for (int c = 0; c < g.cols(); ++c) ga(r, start + c) += g(r, c);
    }
  });
}

Var gather_rows(Var a, std::span<const int> index) {
  const Tensor& av = a.value();
  const int cols = av.cols();
  Tensor y(static_cast<int>(index.size()), cols);
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] < 0 || index[i] >= av.rows()) {
      throw ShapeError("gather_rows: index " + std::to_string(index[i]) + " out of range for " +
                       av.shape_str());
    }
    auto src = av.row_span(index[i]);
    auto dst = y.row_span(static_cast<int>(i));
    std::copy(src.begin(), src.end(), dst.begin());
  }
  const int ai = a.id();
  std::vector<int> idx(index.begin(), index.end());
  return tape_of(a).record(std::move(y), {ai}, [ai, idx = std::move(idx)](Tape& tp,
                                                                         const Tensor& g) {
    Tensor& ga = tp.grad_buffer(ai);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      auto src = g.row_span(static_cast<int>(i));
      auto dst = ga.row_span(idx[i]);
      for (std::size_t c = 0; c < src.size(); ++c) dst[c] += src[c];
    }
  });
}

Var scatter_add_rows(Var a, std::span<const int> index, int out_rows) {
  const Tensor& av = a.value();
  if (static_cast<int>(index.size()) != av.rows()) {
    throw ShapeError("scatter_add_rows: " + std::to_string(index.size()) + " indices for " +
                     av.shape_str());
  }
  Tensor y(out_rows, av.cols());
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] < 0 || index[i] >= out_rows) {
      throw ShapeError("scatter_add_rows: index " + std::to_string(index[i]) +
                       " out of range for " + std::to_string(out_rows) + " rows");
    }
    auto src = av.row_span(static_cast<int>(i));
    auto dst = y.row_span(index[i]);
    for (std::size_t c = 0; c < src.size(); ++c) dst[c] += src[c];
  }
  const int ai = a.id();
  std::vector<int> idx(index.begin(), index.end());
  return tape_of(a).record(std::move(y), {ai}, [ai, idx = std::move(idx)](Tape& tp,
                                                                         const Tensor& g) {
    Tensor& ga = tp.grad_buffer(ai);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      auto src = g.row_span(idx[i]);
      auto dst = ga.row_span(static_cast<int>(i));
      for (std::size_t c = 0; c < src.size(); ++c) dst[c] += src[c];
    }
  });
}

Var sum_rows(Var a) {
  const Tensor& av = a.value();
  Tensor y(1, av.cols());
  for (int r = 0; r < av.rows(); ++r) {
    for (int c = 0; c < av.cols(); ++c) y[c] += av(r, c);
  }
  const int ai = a.id();
  return tape_of(a).record(std::move(y), {ai}, [ai](Tape& tp, const Tensor& g) {
    Tensor& ga = tp.grad_buffer(ai);
    for (int r = 0; r < ga.rows(); ++r) {
      for (int c = 0; c < ga.cols(); ++c) ga(r, c) += g[c];
    }
  });
}

Var sum_all(Var a) {
  Tensor y = Tensor::scalar(a.value().sum());
  const int ai = a.id();
  return tape_of(a).record(std::move(y), {ai}, [ai](Tape& tp, const Tensor& g) {
    Tensor& ga = tp.grad_buffer(ai);
    const double s = g[0];
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += s;
  });
}

Var batched_matvec(Var a, Var x, int out) {
  same_tape(a, x);
  const Tensor& av = a.value();
  const Tensor& xv = x.value();
  const int n = xv.rows();
  const int in = xv.cols();
  if (av.rows() != n || av.cols() != out * in) {
    throw ShapeError("batched_matvec: matrices " + av.shape_str() + " incompatible with " +
                     xv.shape_str() + " and output width " + std::to_string(out));
  }
  Tensor y(n, out);
  for (int e = 0; e < n; ++e) {
    const double* m = av.data() + static_cast<std::size_t>(e) * out * in;
    const double* v = xv.data() + static_cast<std::size_t>(e) * in;
    double* o = y.data() + static_cast<std::size_t>(e) * out;
    for (int i = 0; i < out; ++i) {
      double acc = 0.0;
      const double* mrow = m + static_cast<std::size_t>(i) * in;
      for (int j = 0; j < in; ++j) acc += mrow[j] * v[j];
      o[i] = acc;
    }
  }
  const int ai = a.id(), xi = x.id();
  return tape_of(a).record(std::move(y), {ai, xi}, [ai, xi, out, in](Tape& tp,
                                                                     const Tensor& g) {
    const Tensor& av = tp.value(ai);
    const Tensor& xv = tp.value(xi);
    const int n = xv.rows();
    const bool need_a = tp.requires_grad(ai);
    const bool need_x = tp.requires_grad(xi);
    Tensor* ga = need_a ? &tp.grad_buffer(ai) : nullptr;
    Tensor* gx = need_x ? &tp.grad_buffer(xi) : nullptr;
    for (int e = 0; e < n; ++e) {
      const double* m = av.data() + static_cast<std::size_t>(e) * out * in;
      const double* v = xv.data() + static_cast<std::size_t>(e) * in;
      const double* go = g.data() + static_cast<std::size_t>(e) * out;
      for (int i = 0; i < out; ++i) {
        const double gi = go[i];
        if (need_a) {
          double* gm = ga->data() + static_cast<std::size_t>(e) * out * in +
                       static_cast<std::size_t>(i) * in;
          for (int j = 0; j < in; ++j) gm[j] += gi * v[j];
        }
        if (need_x) {
          double* gv = gx->data() + static_cast<std::size_t>(e) * in;
          const double* mrow = m + static_cast<std::size_t>(i) * in;
          for (int j = 0; j < in; ++j) gv[j] += gi * mrow[j];
        }
      }
    }
  });
}

Var softmax_rows(Var a) {
  const Tensor& av = a.value();
  Tensor y(av.rows(), av.cols());
  for (int r = 0; r < av.rows(); ++r) {
    auto in = av.row_span(r);
    auto o = y.row_span(r);
    double mx = in.empty() ? 0.0 : in[0];
    for (double v : in) mx = std::max(mx, v);
    double z = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) z += (o[c] = std::exp(in[c] - mx));
    for (double& v : o) v /= z;
  }
  const int ai = a.id();
  const int yi = static_cast<int>(tape_of(a).size());
  return tape_of(a).record(std::move(y), {ai}, [ai, yi](Tape& tp, const Tensor& g) {
    const Tensor& yv = tp.value(yi);
    Tensor& ga = tp.grad_buffer(ai);
    for (int r = 0; r < yv.rows(); ++r) {
      double dot = 0.0;
      for (int c = 0; c < yv.cols(); ++c) dot += g(r, c) * yv(r, c);
      for (int c = 0; c < yv.cols(); ++c) ga(r, c) += yv(r, c) * (g(r, c) - dot);
    }
  });
}

Var mse_loss(Var pred, const Tensor& target) {
  const Tensor& pv = pred.value();
  if (!pv.same_shape(target)) {
    throw ShapeError("mse_loss: prediction " + pv.shape_str() + " vs target " +
                     target.shape_str());
  }
  if (pv.size() == 0) throw ShapeError("mse_loss: empty prediction");
  double acc = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double d = pv[i] - target[i];
    acc += d * d;
  }
  const double n = static_cast<double>(pv.size());
  const int pi = pred.id();
  return tape_of(pred).record(Tensor::scalar(acc / n), {pi},
                              [pi, target, n](Tape& tp, const Tensor& g) {
                                const Tensor& pv = tp.value(pi);
                                Tensor& gp = tp.grad_buffer(pi);
                                const double k = 2.0 * g[0] / n;
                                for (std::size_t i = 0; i < pv.size(); ++i) {
                                  gp[i] += k * (pv[i] - target[i]);
                                }
                              });
}

}  // namespace dignn::ops
