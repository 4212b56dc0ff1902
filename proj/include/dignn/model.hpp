// Copyright 2026 The dignn Authors. Apache 2.0 License.
//
// A backbone plus its auxiliary heads, owning one parameter set. Checkpoints
// are JSON: the model config and a flat map name -> {shape, data}.

#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "dignn/backbone.hpp"
#include "dignn/graph.hpp"
#include "dignn/multitask.hpp"

namespace dignn {

inline constexpr const char* kCheckpointFormat = "dignn-checkpoint/1";

class EnergyModel {
 public:
  explicit EnergyModel(const ModelConfig& config);
  EnergyModel(EnergyModel&&) = default;
  EnergyModel& operator=(EnergyModel&&) = default;

  struct Output {
    Prediction prediction;
    AuxPrediction aux;
  };

  const ModelConfig& config() const { return backbone_->config(); }
  ParamSet& params() { return *params_; }
  const ParamSet& params() const { return *params_; }
  const Backbone& backbone() const { return *backbone_; }
  const AuxHeads& heads() const { return heads_; }

  TypedGraph graph(const ChemicalSystem& system, const BondRuleSet& rules) const;
  Output forward(const TypedGraph& g, Tape& tape) const;
  double predict(const TypedGraph& g) const;
  std::vector<double> contributions(const TypedGraph& g) const;

  // Includes the auxiliary heads.
  ParamCounts count_params() const;

  // Per-node energies become scale * raw + shift.
  void set_energy_normalisation(double scale, double shift);
  double energy_scale() const;
  double energy_shift() const;

  nlohmann::json to_checkpoint() const;
  static EnergyModel from_checkpoint(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static EnergyModel load(const std::filesystem::path& path);

 private:
  Parameter& buffer(const char* name) const;

  std::unique_ptr<ParamSet> params_;
  std::unique_ptr<Backbone> backbone_;
  AuxHeads heads_;
};

}  // namespace dignn
