// Copyright 2026 The dignn Authors. Apache 2.0 License.
//
// Dataset families (periodic fcc blocks, grown crystals, tree molecules),
// isometric scaling sweeps, the analytic energy oracle used as ground truth,
// and train/validation/test partitioning.

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "dignn/graph.hpp"
#include "dignn/system.hpp"

namespace dignn {

// Mixes a master seed with a stream index so that every sample owns an
// independent RNG stream.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

// ---- lattices ----------------------------------------------------------

// fcc site in half-lattice-constant units; i + j + k is even.
using LatticeSite = std::array<int, 3>;

// n x n x n conventional cells with shared faces deduplicated:
// (n+1)^3 + 3 n^2 (n+1) atoms.
ChemicalSystem gen_fcc_lattice(const std::string& element, int reps, double lattice_constant);
std::int64_t fcc_atom_count(int reps);

double default_lattice_constant(const std::string& element);

struct GrowthConfig {
  std::string element = "Al";
  int num_seeds = 20;
  int min_size = 15;
  int max_size = 114;
  double lattice_constant = 4.05;
  std::uint64_t seed = 0;  // master seed for this element's growths

  void validate() const;
};

// Grows every seed from the 14-atom fcc cell, one random surface site at a
// time, emitting one stable system per size in [min_size, max_size].
std::vector<ChemicalSystem> gen_crystal_growth(const GrowthConfig& config);

struct MoleculeConfig {
  int count = 100;
  int min_size = 2;
  int max_size = 12;
  std::vector<std::string> elements{"H", "C", "N", "O"};
  std::uint64_t seed = 0;
  int max_restarts = 50;
  int max_placements = 200;
};

// Random tree molecules placed at rule distances. Samples whose embedding
// fails repeatedly are skipped; their indices are appended to *skipped.
std::vector<ChemicalSystem> gen_synthetic_molecules(const MoleculeConfig& config,
                                                    const BondRuleSet& rules,
                                                    std::vector<int>* skipped = nullptr);

// ---- oracle ------------------------------------------------------------

struct MorseTerm {
  double depth = 0.1;   // D, a.u.
  double width = 1.5;   // a, 1/angstrom
  double r0 = 1.0;      // angstrom
};

struct OracleParams {
  // keyed by (sorted element pair, bond type)
  std::map<std::tuple<std::string, std::string, std::string>, MorseTerm> morse;
  bool long_range = false;
  double c6 = 0.0;      // coefficient of the -c6/d^6 unbonded term
  double cutoff = 8.0;  // unbonded term vanishes smoothly at this radius

  static OracleParams from_rules(const BondRuleSet& rules, double depth = 0.1,
                                 double width = 1.5);
  const MorseTerm& term(const std::string& a, const std::string& b,
                        const std::string& bond_type) const;
  void validate() const;
};

double morse_energy(const MorseTerm& t, double d);

// Sum of Morse terms over bonded pairs (bond structure taken from the
// stable geometry) plus the optional cutoff-smoothed unbonded term.
double oracle_energy(const ChemicalSystem& system, const OracleParams& params,
                     const BondRuleSet& rules);

// ---- scaling -----------------------------------------------------------

// 0.90, 0.95, ..., 1.50 (13 points).
std::vector<double> default_scaling_grid();

// One oracle-labelled copy per lambda. The input must be a stable geometry.
std::vector<ChemicalSystem> apply_scaling_sweep(const ChemicalSystem& stable,
                                                const std::vector<double>& grid,
                                                const OracleParams& oracle,
                                                const BondRuleSet& rules);

// ---- splits ------------------------------------------------------------

enum class Stratify { kNone, kSystemIdentity, kSizeBucket };
std::string to_string(Stratify s);
Stratify parse_stratify(const std::string& s);

struct Split {
  std::vector<int> train;
  std::vector<int> val;
  std::vector<int> test;
};

// Disjoint, exhaustive partition into three index sets. Grouped modes keep
// every scaled copy of a stable geometry in the same split; size-bucket mode
// additionally splits each bucket of bucket_width atoms separately.
Split split_dataset(const std::vector<ChemicalSystem>& systems, std::array<double, 3> fractions,
                    std::uint64_t seed, Stratify stratify, int bucket_width = 10);

// Removes systems larger than cap from the training and validation sets.
void apply_size_cap(Split& split, const std::vector<ChemicalSystem>& systems, int cap);

}  // namespace dignn
