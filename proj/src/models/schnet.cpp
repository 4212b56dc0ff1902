// Copyright 2026 The dignn Authors. Apache 2.0 License.

#include "dignn/schnet.hpp"

#include "dignn/errors.hpp"

namespace dignn {

namespace {

using ops::Activation;

bool is_weighting(Specialisation s) {
  return s == Specialisation::kWeightScalar || s == Specialisation::kWeightVector;
}

void push(std::vector<Parameter*>& sink, const Dense& d) {
  sink.push_back(d.w);
  sink.push_back(d.b);
}

}  // namespace

Schnet::TwoLayer Schnet::make_two_layer(ParamSet& ps, const std::string& prefix, int in,
                                        std::mt19937_64& rng, std::vector<Parameter*>& sink) {
  const int d = config_.state_size;
  TwoLayer t;
  t.in = Dense::create(ps, prefix + ".in", in, d, rng);
  t.out = Dense::create(ps, prefix + ".out", d, d, rng);
  push(sink, t.in);
  push(sink, t.out);
  return t;
}

Schnet::Schnet(const ModelConfig& config, ParamSet& ps, std::mt19937_64& rng) : config_(config) {
  config_.validate();
  if (config_.backbone != BackboneKind::kSchnet) {
    throw ConfigError("Schnet built from a non-SchNet config");
  }
  centers_ = config_.rbf.centers();
  const int d = config_.state_size;
  const int k = config_.rbf.count;
  const int nr = static_cast<int>(config_.relations.size());
  const auto spec = config_.specialisation;

  embedding_ = &ps.add("schnet.embedding", static_cast<int>(config_.elements.size()), d);
  init_uniform(*embedding_, 1, rng);
  base_params_.push_back(embedding_);

  for (int l = 0; l < config_.depth; ++l) {
    const std::string p = "schnet.l" + std::to_string(l);
    Layer layer;
    layer.dense = Dense::create(ps, p + ".dense", d, d, rng);
    push(base_params_, layer.dense);
    layer.filter = make_two_layer(ps, p + ".filter", k, rng, base_params_);
    layer.update = make_two_layer(ps, p + ".update", d, rng, base_params_);
    for (int r = 0; r < nr; ++r) {
      const std::string rs = ".r" + std::to_string(r);
      if (spec == Specialisation::kMessage) {
        layer.relation_filter.push_back(make_two_layer(ps, p + ".filter" + rs, k, rng, spec_params_));
      } else if (spec == Specialisation::kUpdateSeparate) {
        layer.relation_update.push_back(make_two_layer(ps, p + ".update" + rs, d, rng, spec_params_));
      }
    }
    if (spec != Specialisation::kNone && !config_.tie_alpha) {
      layer.alpha_logit = &ps.add(p + ".alpha.logit", 1, 1);
      mixing_params_.push_back(layer.alpha_logit);
    }
    layers_.push_back(std::move(layer));
  }
  if (spec != Specialisation::kNone && config_.tie_alpha) {
    shared_alpha_ = &ps.add("schnet.alpha.logit", 1, 1);
    mixing_params_.push_back(shared_alpha_);
  }
  if (is_weighting(spec)) {
    for (int r = 0; r < nr; ++r) {
      Parameter& lam = ps.add("schnet.lambda.r" + std::to_string(r), 1,
                              spec == Specialisation::kWeightScalar ? 1 : d);
      lam.value.fill(1.0);
      lambda_.push_back(&lam);
      spec_params_.push_back(&lam);
    }
  }

  readout1_ = Dense::create(ps, "schnet.readout.hidden", d, d / 2, rng);
  readout2_ = Dense::create(ps, "schnet.readout.out", d / 2, 1, rng);
  push(base_params_, readout1_);
  push(base_params_, readout2_);
  energy_scale_ = &ps.add("schnet.readout.scale", 1, 1, false);
  energy_scale_->value.fill(1.0);
  energy_shift_ = &ps.add("schnet.readout.shift", 1, 1, false);
}

void Schnet::set_alpha_logits(double value) {
  for (Parameter* p : mixing_params_) p->value.fill(value);
}

Var Schnet::filter(Tape& tape, const TwoLayer& net, Var basis) const {
  Var hidden = ops::activation(net.in(tape, basis), Activation::kShiftedSoftplus);
  return ops::activation(net.out(tape, hidden), Activation::kShiftedSoftplus);
}

Schnet::Context Schnet::prepare(const TypedGraph& g, Tape& tape) const {
  check_graph(g, config_);
  if (g.mode != Connectivity::kFullyConnected) {
    throw ConfigError("SchNet needs a fully-connected graph");
  }
  Context ctx;
  ctx.graph = &g;
  ctx.tape = &tape;
  ctx.rel = relation_edges(g);
  if (!g.edges.empty()) {
    Tensor basis(static_cast<int>(g.edges.size()), config_.rbf.count);
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      const auto row = rbf_expand(g.edges[e].distance, centers_, config_.rbf.gamma);
      for (std::size_t c = 0; c < row.size(); ++c) {
        basis(static_cast<int>(e), static_cast<int>(c)) = row[c];
      }
    }
    ctx.basis = tape.constant(std::move(basis));
  }
  if (shared_alpha_ != nullptr) {
    Var a = ops::activation(tape.param(*shared_alpha_), Activation::kSigmoid);
    Var b = ops::affine_const(a, -1.0, 1.0);
    ctx.alpha.assign(layers_.size(), a);
    ctx.one_minus_alpha.assign(layers_.size(), b);
  } else if (config_.specialisation != Specialisation::kNone) {
    for (const auto& layer : layers_) {
      Var a = ops::activation(tape.param(*layer.alpha_logit), Activation::kSigmoid);
      ctx.alpha.push_back(a);
      ctx.one_minus_alpha.push_back(ops::affine_const(a, -1.0, 1.0));
    }
  }
  for (Parameter* p : lambda_) ctx.lambda.push_back(tape.param(*p));
  return ctx;
}

Var Schnet::initial_state(const Context& ctx) const {
  Var table = ctx.tape->param(*embedding_);
  return ops::gather_rows(table, ctx.graph->node_element);
}

Schnet::Messages Schnet::interaction(const Context& ctx, Var h, int l) const {
  const TypedGraph& g = *ctx.graph;
  Tape& tape = *ctx.tape;
  const Layer& layer = layers_.at(static_cast<std::size_t>(l));
  const int n = g.num_nodes;
  const int d = config_.state_size;
  const auto spec = config_.specialisation;
  Messages out;
  if (g.num_directed() == 0) {
    out.total = tape.constant(Tensor(n, d));
    if (is_weighting(spec) || spec == Specialisation::kUpdateSeparate) {
      out.partials.assign(ctx.rel.size(), out.total);
    }
    return out;
  }
  Var x = layer.dense(tape, h);
  Var f = ops::gather_rows(filter(tape, layer.filter, ctx.basis), g.undirected);
  Var per_edge = ops::mul(ops::gather_rows(x, g.src), f);
  Var generic = ops::scatter_add_rows(per_edge, g.dst, n);

  if (spec == Specialisation::kMessage) {
    if (layer.relation_filter.size() != ctx.rel.size()) {
      throw ConfigError("layer " + std::to_string(l) + " has " +
                        std::to_string(layer.relation_filter.size()) + " relation filters for " +
                        std::to_string(ctx.rel.size()) + " relations");
    }
    Var source = config_.literal_message ? h : x;
    Var specialised = tape.constant(Tensor(n, d));
    for (std::size_t r = 0; r < ctx.rel.size(); ++r) {
      const auto& rel = ctx.rel[r];
      if (rel.directed.empty()) continue;
      Var fr = filter(tape, layer.relation_filter[r], ops::gather_rows(ctx.basis, rel.undirected));
      Var m = ops::mul(ops::gather_rows(source, rel.src), ops::gather_rows(fr, rel.position));
      specialised = ops::add(specialised, ops::scatter_add_rows(m, rel.dst, n));
    }
    out.total = ops::add(ops::scale_by(generic, ctx.alpha[l]),
                         ops::scale_by(specialised, ctx.one_minus_alpha[l]));
    return out;
  }

  out.total = generic;
  if (is_weighting(spec) || spec == Specialisation::kUpdateSeparate) {
    for (const auto& rel : ctx.rel) {
      if (rel.directed.empty()) {
        out.partials.push_back(tape.constant(Tensor(n, d)));
      } else {
        out.partials.push_back(
            ops::scatter_add_rows(ops::gather_rows(per_edge, rel.directed), rel.dst, n));
      }
    }
  }
  return out;
}

Var Schnet::update(const Context& ctx, Var h, const Messages& m, int l) const {
  Tape& tape = *ctx.tape;
  const Layer& layer = layers_.at(static_cast<std::size_t>(l));
  const auto spec = config_.specialisation;
  const std::size_t nr = config_.relations.size();
  auto v = [&](const TwoLayer& net, Var input) {
    Var hidden = ops::activation(net.in(tape, input), Activation::kShiftedSoftplus);
    return net.out(tape, hidden);
  };
  if ((is_weighting(spec) || spec == Specialisation::kUpdateSeparate) && m.partials.size() != nr) {
    throw ConfigError("update variant '" + to_string(spec) + "' needs " + std::to_string(nr) +
                      " per-relation partial sums, got " + std::to_string(m.partials.size()));
  }
  switch (spec) {
    case Specialisation::kNone:
    case Specialisation::kMessage:
      return ops::add(h, v(layer.update, m.total));
    case Specialisation::kWeightScalar:
    case Specialisation::kWeightVector: {
      Var weighted;
      for (std::size_t r = 0; r < nr; ++r) {
        Var term = spec == Specialisation::kWeightScalar ? ops::scale_by(m.partials[r], ctx.lambda[r])
                                                         : ops::mul_row(m.partials[r], ctx.lambda[r]);
        weighted = weighted.valid() ? ops::add(weighted, term) : term;
      }
      Var input = ops::add(ops::scale_by(m.total, ctx.alpha[l]),
                           ops::scale_by(weighted, ctx.one_minus_alpha[l]));
      return ops::add(h, v(layer.update, input));
    }
    case Specialisation::kUpdateSeparate: {
      if (layer.relation_update.size() != nr) {
        throw ConfigError("layer " + std::to_string(l) + " is missing relation update networks");
      }
      Var rel;
      for (std::size_t r = 0; r < nr; ++r) {
        Var term = v(layer.relation_update[r], m.partials[r]);
        rel = rel.valid() ? ops::add(rel, term) : term;
      }
      Var delta = ops::add(ops::scale_by(v(layer.update, m.total), ctx.alpha[l]),
                           ops::scale_by(rel, ctx.one_minus_alpha[l]));
      return ops::add(h, delta);
    }
    case Specialisation::kUpdateConcat:
    case Specialisation::kUpdateShared:
      break;
  }
  throw ConfigError("specialisation '" + to_string(spec) + "' is not available for SchNet");
}

Prediction Schnet::readout(const Context& ctx, Var h) const {
  Tape& tape = *ctx.tape;
  Var hidden = ops::activation(readout1_(tape, h), Activation::kShiftedSoftplus);
  Var raw = readout2_(tape, hidden);
  Prediction p;
  p.contributions = ops::affine_const(raw, energy_scale_->value.item(), energy_shift_->value.item());
  p.energy = ops::sum_all(p.contributions);
  p.pooled = ops::sum_rows(hidden);
  return p;
}

Prediction Schnet::forward(const TypedGraph& g, Tape& tape) const {
  Context ctx = prepare(g, tape);
  Var h = initial_state(ctx);
  for (int l = 0; l < config_.depth; ++l) {
    Messages m = interaction(ctx, h, l);
    h = update(ctx, h, m, l);
  }
  return readout(ctx, h);
}

double Schnet::reported_alpha() const {
  if (mixing_params_.empty()) return 1.0;
  double s = 0.0;
  for (Parameter* p : mixing_params_) s += ops::sigmoid(p->value.item());
  return s / static_cast<double>(mixing_params_.size());
}

ParamCounts Schnet::count_params() const {
  ParamCounts c;
  c.base = count_of(base_params_);
  c.specialisation = count_of(spec_params_);
  c.mixing = count_of(mixing_params_);
  return c;
}

}  // namespace dignn
