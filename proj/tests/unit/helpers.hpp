// Copyright 2026 The dignn Authors. Apache 2.0 License.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "dignn/model.hpp"
#include "dignn/system.hpp"

namespace dignn::testing {

inline ChemicalSystem make_system(std::vector<std::string> elements, std::vector<Vec3> coords) {
  ChemicalSystem s;
  s.elements = std::move(elements);
  s.coords = std::move(coords);
  s.scaling = 1.0;
  s.provenance.geometry_id = "test";
  return s;
}

// Bent H-C-O chain: one single and one double bond; H..O unbonded.
inline ChemicalSystem hco() {
  return make_system({"H", "C", "O"}, {{{-1.0, 0.35, 0.0}}, {{0.0, 0.0, 0.0}}, {{1.2, 0.1, 0.0}}});
}

inline ModelConfig tiny_mpnn(Specialisation s, std::vector<std::string> elements,
                             std::vector<std::string> relations) {
  ModelConfig c = ModelConfig::mpnn(std::move(elements), std::move(relations));
  c.specialisation = s;
  c.state_size = 5;
  c.edge_hidden = 4;
  c.readout_hidden = 4;
  c.depth = 2;
  c.rbf = {0.0, 3.0, 4, 2.0};
  c.init_seed = 11;
  return c;
}

inline ModelConfig tiny_schnet(Specialisation s, std::vector<std::string> elements,
                               std::vector<std::string> relations) {
  ModelConfig c = ModelConfig::schnet(std::move(elements), std::move(relations));
  c.specialisation = s;
  c.state_size = 4;
  c.depth = 2;
  c.rbf = {0.0, 3.0, 5, 2.0};
  c.init_seed = 13;
  return c;
}

inline const std::vector<Specialisation>& all_specialisations() {
  static const std::vector<Specialisation> v{
      Specialisation::kMessage,        Specialisation::kWeightScalar,
      Specialisation::kWeightVector,   Specialisation::kUpdateSeparate,
      Specialisation::kUpdateConcat,   Specialisation::kUpdateShared};
  return v;
}

inline const std::vector<Specialisation>& schnet_specialisations() {
  static const std::vector<Specialisation> v{
      Specialisation::kMessage, Specialisation::kWeightScalar, Specialisation::kWeightVector,
      Specialisation::kUpdateSeparate};
  return v;
}

// Gives every parameter (including biases, blend logits and relation
// weights) a small random value so no gradient is trivially zero.
inline void randomize(ParamSet& ps, std::uint64_t seed, double spread = 0.4) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-spread, spread);
  for (auto& p : ps) {
    if (!p->trainable) continue;
    for (double& v : p->value.span()) v = v + u(rng);
  }
}

// Copies every parameter of `from` whose name also exists in `to`.
inline void copy_shared(const ParamSet& from, ParamSet& to) {
  for (const auto& p : from) {
    if (to.contains(p->name)) to.at(p->name).value = p->value;
  }
}

struct GradReport {
  double max_rel = 0.0;
  std::string worst;
  int checked = 0;
};

// Central differences on every trainable scalar of ps against the adjoints
// produced by backward() on loss_fn. The relative error floor keeps
// near-zero gradients from dominating.
inline GradReport check_gradients(ParamSet& ps, const std::function<Var(Tape&)>& loss_fn,
                                  double h = 1e-5, double floor = 1e-2) {
  ps.zero_grad();
  {
    Tape tape;
    tape.backward(loss_fn(tape));
  }
  GradReport r;
  for (auto& p : ps) {
    if (!p->trainable) continue;
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double keep = p->value[i];
      p->value[i] = keep + h;
      double up;
      {
        Tape t;
        up = loss_fn(t).item();
      }
      p->value[i] = keep - h;
      double down;
      {
        Tape t;
        down = loss_fn(t).item();
      }
      p->value[i] = keep;
      const double numeric = (up - down) / (2 * h);
      const double analytic = p->grad[i];
      const double rel = std::abs(numeric - analytic) /
                         std::max({std::abs(numeric), std::abs(analytic), floor});
      ++r.checked;
      if (rel > r.max_rel) {
        r.max_rel = rel;
        r.worst = p->name + "[" + std::to_string(i) + "] analytic " + std::to_string(analytic) +
                  " numeric " + std::to_string(numeric);
      }
    }
  }
  ps.zero_grad();
  return r;
}

}  // namespace dignn::testing
