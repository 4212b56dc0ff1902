// Copyright 2026 The dignn Authors. Apache 2.0 License.
//
// Auxiliary targets, their output heads and the composite loss
//   L = MSE(y, y_hat) + beta * sum_k MSE(a_k, a_hat_k).

#pragma once

#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "dignn/layers.hpp"
#include "dignn/model_config.hpp"
#include "dignn/system.hpp"

namespace dignn {

struct AuxTargets {
  std::vector<double> atoms;     // per catalogue element
  std::vector<double> orbitals;  // per catalogue element, count x orbitals
  std::vector<double> scaling;   // probability over the scaling grid
};

// Minimal-basis orbital counts.
std::map<std::string, int> default_orbital_table();

struct LossConfig {
  double beta = 0.3;
  std::vector<AuxTask> tasks;
  std::map<std::string, int> orbitals = default_orbital_table();
  double sigma = 0.05;  // width of the scaling target
  // Aux targets and predictions are divided by these before the squared error.
  double atoms_scale = 1.0;
  double orbitals_scale = 1.0;
  double scaling_scale = 1.0;

  bool has_task(AuxTask t) const;
  void validate() const;
  nlohmann::json to_json() const;
  static LossConfig from_json(const nlohmann::json& j);
};

// Gaussian over grid centred at lambda, renormalised over the grid.
std::vector<double> scaling_distribution(double lambda, const std::vector<double>& grid,
                                         double sigma);

AuxTargets aux_targets(const ChemicalSystem& system, const std::vector<std::string>& elements,
                       const LossConfig& config, const std::vector<double>& grid);

struct AuxPrediction {
  Var atoms;     // 1 x |elements|
  Var orbitals;  // 1 x |elements|
  Var scaling;   // 1 x bins, on the simplex
};

// One linear layer per enabled task over the backbone's pooled state.
class AuxHeads {
 public:
  AuxHeads() = default;
  AuxHeads(const ModelConfig& config, int pooled_size, ParamSet& params, std::mt19937_64& rng);

  AuxPrediction forward(Tape& tape, Var pooled) const;
  std::int64_t count() const;
  const std::optional<Dense>& atoms() const { return atoms_; }
  const std::optional<Dense>& orbitals() const { return orbitals_; }
  const std::optional<Dense>& scaling() const { return scaling_; }

 private:
  std::optional<Dense> atoms_;
  std::optional<Dense> orbitals_;
  std::optional<Dense> scaling_;
};

struct LossTerms {
  Var total;
  double energy = 0.0;
  double atoms = 0.0;
  double orbitals = 0.0;
  double dsg = 0.0;
};

// Throws ContractError when an enabled task lacks a prediction or target.
LossTerms total_loss(Var energy_pred, double energy_true, const AuxPrediction& aux,
                     const AuxTargets* targets, const LossConfig& config);

}  // namespace dignn
