// Copyright 2026 The dignn Authors. Apache 2.0 License.
//
// Continuous-filter convolution network on fully-connected graphs:
//   m_v = sum_w (W h_w + b) * R(d_vw),   h_v <- h_v + V(m_v)
// with R a two-layer softplus network over a Gaussian distance basis and V a
// dense / shifted-softplus / dense stack. Layers do not share weights.
// Specialisations mirror the MPNN family:
//   kMessage         per-relation filters R_r
//   kWeight*         lambda_r on per-relation partial sums before V
//   kUpdateSeparate  per-relation update networks V_r

#pragma once

#include <random>
#include <string>
#include <vector>

#include "dignn/backbone.hpp"
#include "dignn/layers.hpp"

namespace dignn {

class Schnet final : public Backbone {
 public:
  Schnet(const ModelConfig& config, ParamSet& params, std::mt19937_64& rng);

  struct TwoLayer {
    Dense in;
    Dense out;
  };

  struct Layer {
    Dense dense;
    TwoLayer filter;
    TwoLayer update;
    std::vector<TwoLayer> relation_filter;
    std::vector<TwoLayer> relation_update;
    Parameter* alpha_logit = nullptr;
  };

  struct Context {
    const TypedGraph* graph = nullptr;
    Tape* tape = nullptr;
    std::vector<RelationEdges> rel;
    Var basis;                   // undirected edges x rbf count
    std::vector<Var> alpha;      // per layer
    std::vector<Var> one_minus_alpha;
    std::vector<Var> lambda;
  };

  struct Messages {
    Var total;
    std::vector<Var> partials;
  };

  Context prepare(const TypedGraph& g, Tape& tape) const;
  Var initial_state(const Context& ctx) const;
  // Filter values for rows of expanded distances (n x rbf count -> n x state).
  Var filter(Tape& tape, const TwoLayer& net, Var basis) const;
  Messages interaction(const Context& ctx, Var h, int layer) const;
  Var update(const Context& ctx, Var h, const Messages& m, int layer) const;
  Prediction readout(const Context& ctx, Var h) const;

  Prediction forward(const TypedGraph& g, Tape& tape) const override;
  double reported_alpha() const override;
  ParamCounts count_params() const override;
  int pooled_size() const override { return config_.state_size / 2; }
  const ModelConfig& config() const override { return config_; }

  const std::vector<Layer>& layers() const { return layers_; }
  Parameter& embedding() const { return *embedding_; }
  const std::vector<Parameter*>& lambdas() const { return lambda_; }
  // Sets every blend logit to value.
  void set_alpha_logits(double value);
  const Dense& readout_hidden() const { return readout1_; }
  const Dense& readout_out() const { return readout2_; }

 private:
  TwoLayer make_two_layer(ParamSet& ps, const std::string& prefix, int in, std::mt19937_64& rng,
                          std::vector<Parameter*>& sink);
  Var alpha_for(const Context& ctx, int layer) const;

  ModelConfig config_;
  std::vector<double> centers_;
  Parameter* embedding_ = nullptr;
  std::vector<Layer> layers_;
  Parameter* shared_alpha_ = nullptr;
  std::vector<Parameter*> lambda_;
  Dense readout1_;
  Dense readout2_;
  Parameter* energy_scale_ = nullptr;
  Parameter* energy_shift_ = nullptr;
  std::vector<Parameter*> base_params_;
  std::vector<Parameter*> spec_params_;
  std::vector<Parameter*> mixing_params_;
};

}  // namespace dignn
