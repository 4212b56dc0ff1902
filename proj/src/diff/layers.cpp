// Copyright 2026 The dignn Authors. Apache 2.0 License.

#include "dignn/layers.hpp"

#include <array>
#include <cmath>

#include "dignn/errors.hpp"

namespace dignn {

Dense Dense::create(ParamSet& ps, const std::string& prefix, int in, int out,
                    std::mt19937_64& rng) {
  Dense d;
  d.w = &ps.add(prefix + ".W", out, in);
  d.b = &ps.add(prefix + ".b", 1, out);
  init_uniform(*d.w, in, rng);
  return d;
}

Var Dense::operator()(Tape& tape, Var x) const {
  return ops::affine(x, tape.param(*w), tape.param(*b));
}

GruParams GruParams::create(ParamSet& ps, const std::string& prefix, int state, int input,
                            std::mt19937_64& rng) {
  GruParams p;
  const int fan_in = state + input;
  p.wz = &ps.add(prefix + ".Wz", state, fan_in);
  p.wr = &ps.add(prefix + ".Wr", state, fan_in);
  p.wh = &ps.add(prefix + ".Wh", state, fan_in);
  p.bz = &ps.add(prefix + ".bz", 1, state);
  p.br = &ps.add(prefix + ".br", 1, state);
  p.bh = &ps.add(prefix + ".bh", 1, state);
  for (Parameter* w : {p.wz, p.wr, p.wh}) init_uniform(*w, fan_in, rng);
  return p;
}

GruVars GruParams::bind(Tape& tape) const {
  return {tape.param(*wz), tape.param(*wr), tape.param(*wh),
          tape.param(*bz), tape.param(*br), tape.param(*bh)};
}

std::int64_t GruParams::count() const {
  std::int64_t n = 0;
  for (Parameter* p : {wz, wr, wh, bz, br, bh}) n += static_cast<std::int64_t>(p->value.size());
  return n;
}

Var gru_step(Var h, Var m, const GruVars& p) {
  const int d = h.cols();
  const Tensor& wz = p.wz.value();
  if (!wz.same_shape(p.wr.value()) || !wz.same_shape(p.wh.value())) {
    throw ShapeError("gru_step: gate weights differ in shape: " + wz.shape_str() + ", " +
                     p.wr.value().shape_str() + ", " + p.wh.value().shape_str());
  }
  if (wz.rows() != d || wz.cols() != d + m.cols()) {
    throw ShapeError("gru_step: weights " + wz.shape_str() + " incompatible with state " +
                     h.value().shape_str() + " and input " + m.value().shape_str());
  }
  if (h.rows() != m.rows()) {
    throw ShapeError("gru_step: state " + h.value().shape_str() + " vs input " +
                     m.value().shape_str());
  }
  using ops::Activation;
  const std::array<Var, 2> hm{h, m};
  Var x = ops::concat_cols(hm);
  Var z = ops::activation(ops::affine(x, p.wz, p.bz), Activation::kSigmoid);
  Var r = ops::activation(ops::affine(x, p.wr, p.br), Activation::kSigmoid);
  const std::array<Var, 2> rhm{ops::mul(r, h), m};
  Var cand = ops::activation(ops::affine(ops::concat_cols(rhm), p.wh, p.bh), Activation::kTanh);
  return ops::add(ops::mul(ops::affine_const(z, -1.0, 1.0), h), ops::mul(z, cand));
}

std::vector<double> RbfGrid::centers() const {
  if (count < 1) throw ConfigError("radial basis grid must have at least one center");
  std::vector<double> c(static_cast<std::size_t>(count));
  if (count == 1) {
    c[0] = start;
    return c;
  }
  const double step = (stop - start) / (count - 1);
  for (int k = 0; k < count; ++k) c[k] = start + step * k;
  return c;
}

std::vector<double> rbf_expand(double d, const std::vector<double>& centers, double gamma) {
  if (centers.empty()) throw ConfigError("rbf_expand: empty center grid");
  if (d < 0.0) throw DomainError("rbf_expand: negative distance");
  for (std::size_t k = 1; k < centers.size(); ++k) {
    if (!(centers[k] > centers[k - 1])) {
      throw ConfigError("rbf_expand: centers must be strictly increasing");
    }
  }
  std::vector<double> out(centers.size());
  for (std::size_t k = 0; k < centers.size(); ++k) {
    const double x = d - centers[k];
    out[k] = std::exp(-gamma * x * x);
  }
  return out;
}

}  // namespace dignn
