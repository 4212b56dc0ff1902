// Copyright 2026 The dignn Authors. Apache 2.0 License.

#include "dignn/mpnn.hpp"

#include <cmath>

#include "dignn/errors.hpp"

namespace dignn {

namespace {

using ops::Activation;

bool is_weighting(Specialisation s) {
  return s == Specialisation::kWeightScalar || s == Specialisation::kWeightVector;
}

bool needs_partials(Specialisation s) {
  return is_weighting(s) || s == Specialisation::kUpdateSeparate ||
         s == Specialisation::kUpdateConcat || s == Specialisation::kUpdateShared;
}

}  // namespace

Mpnn::EdgeNet Mpnn::make_edge_net(ParamSet& ps, const std::string& prefix, std::mt19937_64& rng) {
  const int d = config_.state_size;
  EdgeNet net;
  net.in = Dense::create(ps, prefix + ".in", edge_feature_size(), config_.edge_hidden, rng);
  net.out = Dense::create(ps, prefix + ".out", config_.edge_hidden, d * d, rng);
  return net;
}

Mpnn::Mpnn(const ModelConfig& config, ParamSet& ps, std::mt19937_64& rng) : config_(config) {
  config_.validate();
  if (config_.backbone != BackboneKind::kMpnn) throw ConfigError("Mpnn built from a non-MPNN config");
  const int d = config_.state_size;
  const int nr = static_cast<int>(config_.relations.size());
  const auto spec = config_.specialisation;

  message_ = make_edge_net(ps, "message.base", rng);
  for (Parameter* p : {message_.in.w, message_.in.b, message_.out.w, message_.out.b}) {
    base_params_.push_back(p);
  }
  base_gru_ = GruParams::create(ps, "update.base", d, d, rng);
  for (Parameter* p : {base_gru_.wz, base_gru_.wr, base_gru_.wh, base_gru_.bz, base_gru_.br,
                       base_gru_.bh}) {
    base_params_.push_back(p);
  }

  auto add_gru = [&](const GruParams& g) {
    for (Parameter* p : {g.wz, g.wr, g.wh, g.bz, g.br, g.bh}) spec_params_.push_back(p);
  };

  switch (spec) {
    case Specialisation::kNone:
      break;
    case Specialisation::kMessage:
      for (int r = 0; r < nr; ++r) {
        relation_message_.push_back(make_edge_net(ps, "message.r" + std::to_string(r), rng));
        const auto& n = relation_message_.back();
        for (Parameter* p : {n.in.w, n.in.b, n.out.w, n.out.b}) spec_params_.push_back(p);
      }
      break;
    case Specialisation::kWeightScalar:
    case Specialisation::kWeightVector:
      for (int r = 0; r < nr; ++r) {
        const int cols = spec == Specialisation::kWeightScalar ? 1 : d;
        Parameter& p = ps.add("lambda.r" + std::to_string(r), 1, cols);
        p.value.fill(1.0);
        lambda_.push_back(&p);
        spec_params_.push_back(&p);
      }
      break;
    case Specialisation::kUpdateSeparate:
      for (int r = 0; r < nr; ++r) {
        relation_gru_.push_back(
            GruParams::create(ps, "update.impl1.r" + std::to_string(r), d, d, rng));
        add_gru(relation_gru_.back());
      }
      break;
    case Specialisation::kUpdateConcat:
      wide_gru_ = GruParams::create(ps, "update.impl2", d, nr * d, rng);
      add_gru(wide_gru_);
      break;
    case Specialisation::kUpdateShared: {
      const int fan_in = d + nr * d;
      auto block = [&](const std::string& name, int cols) {
        Parameter& p = ps.add("update.impl3." + name, d, cols);
        init_uniform(p, fan_in, rng);
        spec_params_.push_back(&p);
        return &p;
      };
      shared_.uz = block("Uz", d);
      shared_.ur = block("Ur", d);
      shared_.uh = block("Uh", d);
      shared_.qz = block("Qz", d);
      shared_.qr = block("Qr", d);
      shared_.qh = block("Qh", d);
      for (auto [slot, name] : {std::pair{&shared_.bz, "bz"}, std::pair{&shared_.br, "br"},
                                std::pair{&shared_.bh, "bh"}}) {
        Parameter& p = ps.add(std::string("update.impl3.") + name, 1, d);
        spec_params_.push_back(&p);
        *slot = &p;
      }
      break;
    }
  }
  if (spec != Specialisation::kNone) {
    alpha_logit_ = &ps.add("alpha.logit", 1, 1);
  }

  const int readout_in = (config_.depth + 1) * d;
  readout1_ = Dense::create(ps, "readout.hidden", readout_in, config_.readout_hidden, rng);
  readout2_ = Dense::create(ps, "readout.out", config_.readout_hidden, 1, rng);
  for (Parameter* p : {readout1_.w, readout1_.b, readout2_.w, readout2_.b}) {
    base_params_.push_back(p);
  }
  energy_scale_ = &ps.add("readout.scale", 1, 1, false);
  energy_scale_->value.fill(1.0);
  energy_shift_ = &ps.add("readout.shift", 1, 1, false);
}

int Mpnn::edge_feature_size() const {
  return config_.rbf.count +
         (config_.bond_type_feature ? static_cast<int>(config_.relations.size()) : 0);
}

Tensor Mpnn::edge_features(const TypedGraph& g) const {
  const auto centers = config_.rbf.centers();
  const int f = edge_feature_size();
  Tensor out(static_cast<int>(g.edges.size()), f);
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    const auto& e = g.edges[k];
    const auto basis = rbf_expand(e.distance, centers, config_.rbf.gamma);
    const int row = static_cast<int>(k);
    for (std::size_t c = 0; c < basis.size(); ++c) out(row, static_cast<int>(c)) = basis[c];
    if (config_.bond_type_feature) out(row, config_.rbf.count + e.relation) = 1.0;
  }
  return out;
}

Var Mpnn::run_edge_net(const EdgeNet& net, Tape& tape, Var features) const {
  Var hidden = ops::activation(net.in(tape, features), Activation::kShiftedSoftplus);
  return net.out(tape, hidden);
}

GruVars Mpnn::materialize_shared(Tape& tape) const {
  const int nr = static_cast<int>(config_.relations.size());
  auto widen = [&](Parameter* u, Parameter* q) {
    std::vector<Var> parts{tape.param(*u)};
    Var qv = tape.param(*q);
    for (int r = 0; r < nr; ++r) parts.push_back(qv);
    return ops::concat_cols(parts);
  };
  GruVars v;
  v.wz = widen(shared_.uz, shared_.qz);
  v.wr = widen(shared_.ur, shared_.qr);
  v.wh = widen(shared_.uh, shared_.qh);
  v.bz = tape.param(*shared_.bz);
  v.br = tape.param(*shared_.br);
  v.bh = tape.param(*shared_.bh);
  return v;
}

Mpnn::Context Mpnn::prepare(const TypedGraph& g, Tape& tape) const {
  check_graph(g, config_);
  Context ctx;
  ctx.graph = &g;
  ctx.tape = &tape;
  ctx.rel = relation_edges(g);
  const auto spec = config_.specialisation;

  const Tensor features = edge_features(g);
  if (g.num_directed() > 0) {
    Var feat = tape.constant(features);
    Var per_edge = run_edge_net(message_, tape, feat);
    ctx.edge_matrices = ops::gather_rows(per_edge, g.undirected);
    if (spec == Specialisation::kMessage) {
      for (std::size_t r = 0; r < ctx.rel.size(); ++r) {
        const auto& rel = ctx.rel[r];
        if (rel.directed.empty()) {
          ctx.relation_matrices.emplace_back();
          continue;
        }
        Var sub = ops::gather_rows(feat, rel.undirected);
        Var mats = run_edge_net(relation_message_[r], tape, sub);
        ctx.relation_matrices.push_back(ops::gather_rows(mats, rel.position));
      }
    }
  }

  ctx.base_cell = base_gru_.bind(tape);
  if (alpha_logit_ != nullptr) {
    Var logit = tape.param(*alpha_logit_);
    ctx.alpha = ops::activation(logit, Activation::kSigmoid);
    ctx.one_minus_alpha = ops::affine_const(ctx.alpha, -1.0, 1.0);
  }
  for (Parameter* p : lambda_) ctx.lambda.push_back(tape.param(*p));
  for (const auto& cell : relation_gru_) ctx.relation_cells.push_back(cell.bind(tape));
  if (spec == Specialisation::kUpdateConcat) ctx.wide_cell = wide_gru_.bind(tape);
  if (spec == Specialisation::kUpdateShared) ctx.wide_cell = materialize_shared(tape);
  return ctx;
}

Var Mpnn::initial_state(const Context& ctx) const {
  const TypedGraph& g = *ctx.graph;
  Tensor h0(g.num_nodes, config_.state_size);
  for (int v = 0; v < g.num_nodes; ++v) h0(v, g.node_element[v]) = 1.0;
  return ctx.tape->constant(std::move(h0));
}

Mpnn::Messages Mpnn::messages(const Context& ctx, Var h) const {
  const TypedGraph& g = *ctx.graph;
  Tape& tape = *ctx.tape;
  const int n = g.num_nodes;
  const int d = config_.state_size;
  Messages out;
  if (g.num_directed() == 0) {
    out.total = tape.constant(Tensor(n, d));
    if (needs_partials(config_.specialisation)) {
      out.partials.assign(ctx.rel.size(), out.total);
    }
    return out;
  }
  Var per_edge = ops::batched_matvec(ctx.edge_matrices, ops::gather_rows(h, g.src), d);
  Var generic = ops::scatter_add_rows(per_edge, g.dst, n);

  if (config_.specialisation == Specialisation::kMessage) {
    Var specialised = tape.constant(Tensor(n, d));
    for (std::size_t r = 0; r < ctx.rel.size(); ++r) {
      const auto& rel = ctx.rel[r];
      if (rel.directed.empty()) continue;
      Var m = ops::batched_matvec(ctx.relation_matrices[r], ops::gather_rows(h, rel.src), d);
      specialised = ops::add(specialised, ops::scatter_add_rows(m, rel.dst, n));
    }
    out.total = ops::add(ops::scale_by(generic, ctx.alpha),
                         ops::scale_by(specialised, ctx.one_minus_alpha));
    return out;
  }

  out.total = generic;
  if (needs_partials(config_.specialisation)) {
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

Var Mpnn::update(const Context& ctx, Var h, const Messages& m) const {
  const auto spec = config_.specialisation;
  const std::size_t nr = config_.relations.size();
  if (needs_partials(spec) && m.partials.size() != nr) {
    throw ConfigError("update variant '" + to_string(spec) + "' needs " + std::to_string(nr) +
                      " per-relation partial sums, got " + std::to_string(m.partials.size()));
  }
  switch (spec) {
    case Specialisation::kNone:
    case Specialisation::kMessage:
      return gru_step(h, m.total, ctx.base_cell);
    case Specialisation::kWeightScalar:
    case Specialisation::kWeightVector: {
      Var weighted;
      for (std::size_t r = 0; r < nr; ++r) {
        Var term = spec == Specialisation::kWeightScalar ? ops::scale_by(m.partials[r], ctx.lambda[r])
                                                         : ops::mul_row(m.partials[r], ctx.lambda[r]);
        weighted = weighted.valid() ? ops::add(weighted, term) : term;
      }
      Var input = ops::add(ops::scale_by(m.total, ctx.alpha),
                           ops::scale_by(weighted, ctx.one_minus_alpha));
      return gru_step(h, input, ctx.base_cell);
    }
    case Specialisation::kUpdateSeparate: {
      Var base = gru_step(h, m.total, ctx.base_cell);
      Var rel;
      for (std::size_t r = 0; r < nr; ++r) {
        Var term = gru_step(h, m.partials[r], ctx.relation_cells[r]);
        rel = rel.valid() ? ops::add(rel, term) : term;
      }
      return ops::add(ops::scale_by(base, ctx.alpha), ops::scale_by(rel, ctx.one_minus_alpha));
    }
    case Specialisation::kUpdateConcat:
    case Specialisation::kUpdateShared: {
      Var base = gru_step(h, m.total, ctx.base_cell);
      Var wide = gru_step(h, ops::concat_cols(m.partials), ctx.wide_cell);
      return ops::add(ops::scale_by(base, ctx.alpha), ops::scale_by(wide, ctx.one_minus_alpha));
    }
  }
  throw ConfigError("unhandled specialisation");
}

Prediction Mpnn::readout(const Context& ctx, const std::vector<Var>& states) const {
  Tape& tape = *ctx.tape;
  if (static_cast<int>(states.size()) != config_.depth + 1) {
    throw ContractError("readout expects " + std::to_string(config_.depth + 1) + " states, got " +
                        std::to_string(states.size()));
  }
  Var joined = ops::concat_cols(states);
  Var hidden = ops::activation(readout1_(tape, joined), Activation::kShiftedSoftplus);
  Var raw = readout2_(tape, hidden);
  Prediction p;
  p.contributions = ops::affine_const(raw, energy_scale_->value.item(), energy_shift_->value.item());
  p.energy = ops::sum_all(p.contributions);
  p.pooled = ops::sum_rows(hidden);
  return p;
}

Prediction Mpnn::forward(const TypedGraph& g, Tape& tape) const {
  Context ctx = prepare(g, tape);
  std::vector<Var> states{initial_state(ctx)};
  for (int t = 0; t < config_.depth; ++t) {
    Messages m = messages(ctx, states.back());
    states.push_back(update(ctx, states.back(), m));
  }
  return readout(ctx, states);
}

double Mpnn::reported_alpha() const {
  return alpha_logit_ ? ops::sigmoid(alpha_logit_->value.item()) : 1.0;
}

ParamCounts Mpnn::count_params() const {
  ParamCounts c;
  c.base = count_of(base_params_);
  c.specialisation = count_of(spec_params_);
  c.mixing = alpha_logit_ ? 1 : 0;
  return c;
}

}  // namespace dignn
