// Copyright 2026 The dignn Authors. Apache 2.0 License.
//
// Message passing network with an edge-conditioned message function and a
// gated recurrent update shared across T iterations. Messages are
//   m_v = sum_{w in N(v)} A(x_vw) h_w
// where A is a state x state matrix produced by a two-layer edge network.
// Relation specialisations blend a generic path (weight alpha) with a
// relation-aware path (weight 1 - alpha):
//   kMessage         one edge network per relation
//   kWeight*         lambda_r rescales the per-relation partial sums
//   kUpdateSeparate  one recurrent cell per relation, outputs summed
//   kUpdateConcat    one cell over [m^1 .. m^R]
//   kUpdateShared    as kUpdateConcat with every input block equal to Q

#pragma once

#include <random>
#include <string>
#include <vector>

#include "dignn/backbone.hpp"
#include "dignn/layers.hpp"

namespace dignn {

class Mpnn final : public Backbone {
 public:
  Mpnn(const ModelConfig& config, ParamSet& params, std::mt19937_64& rng);

  // Per-forward quantities that do not change across iterations.
  struct Context {
    const TypedGraph* graph = nullptr;
    Tape* tape = nullptr;
    std::vector<RelationEdges> rel;
    Var edge_matrices;                  // directed edges x state^2
    std::vector<Var> relation_matrices; // kMessage: per relation, per its directed edge
    Var alpha;
    Var one_minus_alpha;
    std::vector<Var> lambda;
    GruVars base_cell;
    std::vector<GruVars> relation_cells;  // kUpdateSeparate
    GruVars wide_cell;                    // kUpdateConcat / kUpdateShared
  };

  struct Messages {
    Var total;                  // generic sum (or the blended sum under kMessage)
    std::vector<Var> partials;  // per-relation sums of the generic messages
  };

  Context prepare(const TypedGraph& g, Tape& tape) const;
  Var initial_state(const Context& ctx) const;
  Messages messages(const Context& ctx, Var h) const;
  Var update(const Context& ctx, Var h, const Messages& m) const;
  Prediction readout(const Context& ctx, const std::vector<Var>& states) const;
  // The widened gate weights of the shared-block cell, as seen by the cell.
  GruVars materialize_shared(Tape& tape) const;

  Prediction forward(const TypedGraph& g, Tape& tape) const override;
  double reported_alpha() const override;
  ParamCounts count_params() const override;
  int pooled_size() const override { return config_.readout_hidden; }
  const ModelConfig& config() const override { return config_; }

  int edge_feature_size() const;
  Tensor edge_features(const TypedGraph& g) const;

  // Handles for tests and checkpoint tooling.
  Parameter& alpha_logit() const { return *alpha_logit_; }
  const GruParams& base_cell() const { return base_gru_; }
  const GruParams& wide_cell() const { return wide_gru_; }
  const std::vector<GruParams>& relation_cells() const { return relation_gru_; }
  const std::vector<Parameter*>& lambdas() const { return lambda_; }
  struct SharedBlocks {
    Parameter* uz; Parameter* ur; Parameter* uh;  // act on the state
    Parameter* qz; Parameter* qr; Parameter* qh;  // tied input blocks
    Parameter* bz; Parameter* br; Parameter* bh;
  };
  const SharedBlocks& shared_blocks() const { return shared_; }
  const Dense& readout_hidden() const { return readout1_; }
  const Dense& readout_out() const { return readout2_; }

 private:
  struct EdgeNet {
    Dense in;
    Dense out;
  };
  EdgeNet make_edge_net(ParamSet& ps, const std::string& prefix, std::mt19937_64& rng);
  Var run_edge_net(const EdgeNet& net, Tape& tape, Var features) const;

  ModelConfig config_;
  EdgeNet message_;
  std::vector<EdgeNet> relation_message_;
  GruParams base_gru_;
  std::vector<GruParams> relation_gru_;
  GruParams wide_gru_;
  SharedBlocks shared_{};
  Parameter* alpha_logit_ = nullptr;
  std::vector<Parameter*> lambda_;
  Dense readout1_;
  Dense readout2_;
  Parameter* energy_scale_ = nullptr;
  Parameter* energy_shift_ = nullptr;
  std::vector<Parameter*> base_params_;
  std::vector<Parameter*> spec_params_;
};

}  // namespace dignn
