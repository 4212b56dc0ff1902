// Copyright 2026 The dignn Authors. Apache 2.0 License.

#include "dignn/multitask.hpp"

#include <algorithm>
#include <cmath>

#include "dignn/errors.hpp"
#include "dignn/json_util.hpp"

namespace dignn {

using nlohmann::json;

std::map<std::string, int> default_orbital_table() {
  return {{"H", 1}, {"C", 5}, {"N", 5}, {"O", 5}, {"F", 5}, {"Al", 9}, {"Cu", 15}};
}

bool LossConfig::has_task(AuxTask t) const {
  return std::find(tasks.begin(), tasks.end(), t) != tasks.end();
}

void LossConfig::validate() const {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be finite and >= 0");
  if (!(sigma > 0.0)) throw ConfigError("scaling target sigma must be > 0");
  for (double s : {atoms_scale, orbitals_scale, scaling_scale}) {
    if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("aux target scales must be > 0");
  }
  for (const auto& [el, n] : orbitals) {
    if (n < 0) throw ConfigError("negative orbital count for " + el);
  }
}

json LossConfig::to_json() const {
  json t = json::array();
  for (auto task : tasks) t.push_back(to_string(task));
  return {{"beta", beta},
          {"tasks", t},
          {"orbitals", orbitals},
          {"sigma", sigma},
          {"atoms_scale", atoms_scale},
          {"orbitals_scale", orbitals_scale},
          {"scaling_scale", scaling_scale}};
}

LossConfig LossConfig::from_json(const json& j) {
  require_known_keys(j,
                     {"beta", "tasks", "orbitals", "sigma", "atoms_scale", "orbitals_scale",
                      "scaling_scale"},
                     "loss");
  LossConfig c;
  c.beta = get_or(j, "beta", c.beta);
  for (const auto& t : get_or<std::vector<std::string>>(j, "tasks", {})) {
    c.tasks.push_back(parse_aux_task(t));
  }
  c.orbitals = get_or(j, "orbitals", c.orbitals);
  c.sigma = get_or(j, "sigma", c.sigma);
  c.atoms_scale = get_or(j, "atoms_scale", c.atoms_scale);
  c.orbitals_scale = get_or(j, "orbitals_scale", c.orbitals_scale);
  c.scaling_scale = get_or(j, "scaling_scale", c.scaling_scale);
  c.validate();
  return c;
}

std::vector<double> scaling_distribution(double lambda, const std::vector<double>& grid,
                                         double sigma) {
  if (grid.empty()) throw ConfigError("empty scaling grid");
  if (!(sigma > 0.0)) throw ConfigError("scaling target sigma must be > 0");
  std::vector<double> logits(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double z = (grid[i] - lambda) / sigma;
    logits[i] = -0.5 * z * z;
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double& v : logits) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : logits) v /= total;
  return logits;
}

AuxTargets aux_targets(const ChemicalSystem& system, const std::vector<std::string>& elements,
                       const LossConfig& config, const std::vector<double>& grid) {
  AuxTargets t;
  const auto counts = element_counts(system, elements);
  if (config.has_task(AuxTask::kAtomCounts)) {
    t.atoms.assign(counts.begin(), counts.end());
  }
  if (config.has_task(AuxTask::kOrbitalCounts)) {
    t.orbitals.resize(elements.size());
    for (std::size_t i = 0; i < elements.size(); ++i) {
      if (counts[i] == 0) continue;
      auto it = config.orbitals.find(elements[i]);
      if (it == config.orbitals.end()) {
        throw ConfigError("element '" + elements[i] + "' is missing from the orbital table");
      }
      t.orbitals[i] = static_cast<double>(counts[i]) * it->second;
    }
  }
  if (config.has_task(AuxTask::kScalingDistribution)) {
    if (!system.scaling) {
      throw ContractError("scaling target requested for a system without a scaling label (" +
                          system.provenance.geometry_id + ")");
    }
    t.scaling = scaling_distribution(*system.scaling, grid, config.sigma);
  }
  return t;
}

AuxHeads::AuxHeads(const ModelConfig& config, int pooled_size, ParamSet& ps,
                   std::mt19937_64& rng) {
  const int ne = static_cast<int>(config.elements.size());
  if (config.has_task(AuxTask::kAtomCounts)) {
    atoms_ = Dense::create(ps, "aux.atoms", pooled_size, ne, rng);
  }
  if (config.has_task(AuxTask::kOrbitalCounts)) {
    orbitals_ = Dense::create(ps, "aux.orbitals", pooled_size, ne, rng);
  }
  if (config.has_task(AuxTask::kScalingDistribution)) {
    scaling_ = Dense::create(ps, "aux.scaling", pooled_size, config.scaling_bins, rng);
  }
}

AuxPrediction AuxHeads::forward(Tape& tape, Var pooled) const {
  AuxPrediction p;
  if (atoms_) p.atoms = (*atoms_)(tape, pooled);
  if (orbitals_) p.orbitals = (*orbitals_)(tape, pooled);
  if (scaling_) p.scaling = ops::softmax_rows((*scaling_)(tape, pooled));
  return p;
}

std::int64_t AuxHeads::count() const {
  std::int64_t n = 0;
  for (const auto* h : {&atoms_, &orbitals_, &scaling_}) {
    if (*h) n += static_cast<std::int64_t>((*h)->in() + 1) * (*h)->out();
  }
  return n;
}

namespace {

Var scaled_mse(Var pred, const std::vector<double>& target, double scale, const char* what) {
  if (!pred.valid()) throw ContractError(std::string("no prediction for enabled task ") + what);
  if (target.empty()) throw ContractError(std::string("no target for enabled task ") + what);
  if (static_cast<std::size_t>(pred.cols()) != target.size() || pred.rows() != 1) {
    throw ShapeError(std::string(what) + " head is " + pred.value().shape_str() +
                     " but the target has " + std::to_string(target.size()) + " entries");
  }
  Tensor t(1, static_cast<int>(target.size()));
  for (std::size_t i = 0; i < target.size(); ++i) t[static_cast<int>(i)] = target[i] / scale;
  return ops::mse_loss(ops::affine_const(pred, 1.0 / scale), t);
}

}  // namespace

LossTerms total_loss(Var energy_pred, double energy_true, const AuxPrediction& aux,
                     const AuxTargets* targets, const LossConfig& config) {
  LossTerms out;
  Var energy = ops::mse_loss(energy_pred, Tensor::scalar(energy_true));
  out.energy = energy.item();
  out.total = energy;
  if (config.tasks.empty()) return out;
  if (targets == nullptr) throw ContractError("auxiliary tasks enabled but no targets given");

  Var aux_sum;
  auto accumulate = [&](Var term) { aux_sum = aux_sum.valid() ? ops::add(aux_sum, term) : term; };
  if (config.has_task(AuxTask::kAtomCounts)) {
    Var t = scaled_mse(aux.atoms, targets->atoms, config.atoms_scale, "atoms");
    out.atoms = t.item();
    accumulate(t);
  }
  if (config.has_task(AuxTask::kOrbitalCounts)) {
    Var t = scaled_mse(aux.orbitals, targets->orbitals, config.orbitals_scale, "orbitals");
    out.orbitals = t.item();
    accumulate(t);
  }
  if (config.has_task(AuxTask::kScalingDistribution)) {
    Var t = scaled_mse(aux.scaling, targets->scaling, config.scaling_scale, "scaling");
    out.dsg = t.item();
    accumulate(t);
  }
  out.total = ops::add(energy, ops::affine_const(aux_sum, config.beta));
  return out;
}

}  // namespace dignn
