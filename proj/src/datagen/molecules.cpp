// Copyright 2026 The dignn Authors. Apache 2.0 License.

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

#include "dignn/datagen.hpp"
#include "dignn/errors.hpp"

namespace dignn {

namespace {

int valence(const std::string& element) {
  if (element == "H") return 1;
  if (element == "O") return 2;
  if (element == "N") return 3;
  if (element == "C") return 4;
  throw ConfigError("no valence for element '" + element + "'");
}

Vec3 random_direction(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  for (;;) {
    Vec3 v{g(rng), g(rng), g(rng)};
    const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (n > 1e-8) return {v[0] / n, v[1] / n, v[2] / n};
  }
}

// One attempt at a tree molecule of the given size; empty on failure.
std::optional<ChemicalSystem> try_molecule(int size, const MoleculeConfig& config,
                                           const BondRuleSet& rules, double min_r0,
                                           std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick_element(0, config.elements.size() - 1);
  ChemicalSystem s;
  std::vector<int> free_valence;
  // A lone first hydrogen would end the tree at size 2.
  std::string first = config.elements[pick_element(rng)];
  if (size > 2 && valence(first) == 1) {
    for (const auto& e : config.elements) {
      if (valence(e) > 1) {
        first = e;
        break;
      }
    }
  }
  s.elements.push_back(first);
  s.coords.push_back({0.0, 0.0, 0.0});
  free_valence.push_back(valence(first));

  for (int k = 1; k < size; ++k) {
    std::vector<int> parents;
    for (int i = 0; i < k; ++i) {
      if (free_valence[i] > 0) parents.push_back(i);
    }
    if (parents.empty()) return std::nullopt;
    std::uniform_int_distribution<std::size_t> pick_parent(0, parents.size() - 1);
    const int parent = parents[pick_parent(rng)];
    int total_free = 0;
    for (int f : free_valence) total_free += f;
    // Keep the tree open while more atoms are still to come.
    std::string element;
    for (int tries = 0; tries < 16; ++tries) {
      element = config.elements[pick_element(rng)];
      if (k + 1 == size || total_free - 1 + valence(element) - 1 > 0) break;
    }
    if (k + 1 < size && total_free - 1 + valence(element) - 1 == 0) return std::nullopt;
    const BondRule& bond = rules.rule(s.elements[parent], element);

    bool placed = false;
    for (int attempt = 0; attempt < config.max_placements && !placed; ++attempt) {
      const Vec3 dir = random_direction(rng);
      const Vec3& p = s.coords[parent];
      const Vec3 pos{p[0] + bond.r0 * dir[0], p[1] + bond.r0 * dir[1], p[2] + bond.r0 * dir[2]};
      bool ok = true;
      for (int j = 0; j < k && ok; ++j) {
        if (j == parent) continue;
        const BondRule& other = rules.rule(s.elements[j], element);
        const double limit = std::max(0.8 * min_r0, other.multiplier * other.r0);
        if (distance(s.coords[j], pos) <= limit) ok = false;
      }
      if (ok) {
        s.elements.push_back(element);
        s.coords.push_back(pos);
        free_valence.push_back(valence(element) - 1);
        --free_valence[parent];
        placed = true;
      }
    }
    if (!placed) return std::nullopt;
  }
  return s;
}

}  // namespace

std::vector<ChemicalSystem> gen_synthetic_molecules(const MoleculeConfig& config,
                                                    const BondRuleSet& rules,
                                                    std::vector<int>* skipped) {
  if (config.elements.empty()) throw ConfigError("molecule generator needs an element set");
  if (config.min_size < 1 || config.min_size > config.max_size) {
    throw ConfigError("molecule size range is invalid");
  }
  for (const auto& a : config.elements) {
    valence(a);
    for (const auto& b : config.elements) rules.rule(a, b);
  }
  double min_r0 = std::numeric_limits<double>::infinity();
  for (const auto& [_, r] : rules.rules()) min_r0 = std::min(min_r0, r.r0);

  std::vector<ChemicalSystem> out;
  for (int i = 0; i < config.count; ++i) {
    const std::uint64_t stream = derive_seed(config.seed, static_cast<std::uint64_t>(i));
    std::mt19937_64 rng(stream);
    std::uniform_int_distribution<int> pick_size(config.min_size, config.max_size);
    const int size = pick_size(rng);
    std::optional<ChemicalSystem> mol;
    for (int r = 0; r < config.max_restarts && !mol; ++r) {
      mol = try_molecule(size, config, rules, min_r0, rng);
    }
    if (!mol) {
      std::cerr << "warning: molecule sample " << i << " (size " << size
                << ") could not be embedded; skipped\n";
      if (skipped) skipped->push_back(i);
      continue;
    }
    mol->scaling = 1.0;
    mol->provenance.dataset = "mol";
    mol->provenance.seed = stream;
    mol->provenance.geometry_id = "mol/" + std::to_string(i);
    out.push_back(std::move(*mol));
  }
  return out;
}

}  // namespace dignn
