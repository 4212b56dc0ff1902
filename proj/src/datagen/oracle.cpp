// Copyright 2026 The dignn Authors. Apache 2.0 License.

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "dignn/datagen.hpp"
#include "dignn/errors.hpp"

namespace dignn {

namespace {

std::tuple<std::string, std::string, std::string> morse_key(const std::string& a,
                                                            const std::string& b,
                                                            const std::string& type) {
  return a < b ? std::make_tuple(a, b, type) : std::make_tuple(b, a, type);
}

}  // namespace

OracleParams OracleParams::from_rules(const BondRuleSet& rules, double depth, double width) {
  OracleParams p;
  for (const auto& [pair, rule] : rules.rules()) {
    p.morse[morse_key(pair.first, pair.second, rule.bond_type)] = {depth, width, rule.r0};
  }
  p.validate();
  return p;
}

const MorseTerm& OracleParams::term(const std::string& a, const std::string& b,
                                    const std::string& bond_type) const {
  auto it = morse.find(morse_key(a, b, bond_type));
  if (it == morse.end()) {
    throw ConfigError("no oracle parameters for " + a + "-" + b + " (" + bond_type + ")");
  }
  return it->second;
}

void OracleParams::validate() const {
  for (const auto& [k, t] : morse) {
    if (!(t.depth > 0.0) || !(t.width > 0.0) || !(t.r0 > 0.0)) {
      throw ConfigError("oracle parameters for " + std::get<0>(k) + "-" + std::get<1>(k) +
                        " must be positive");
    }
  }
  if (long_range && !(cutoff > 0.0)) throw ConfigError("oracle cutoff must be positive");
}

double morse_energy(const MorseTerm& t, double d) {
  const double x = 1.0 - std::exp(-t.width * (d - t.r0));
  return t.depth * x * x - t.depth;
}

double oracle_energy(const ChemicalSystem& system, const OracleParams& params,
                     const BondRuleSet& rules) {
  const BondTable bonds = assign_bond_types(system, rules);
  const Tensor d = pairwise_distances(system);
  const int n = static_cast<int>(system.size());
  double e = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const int label = bonds.label(i, j);
      if (label != BondTable::kUnbonded) {
        const std::string& type = rules.relations()[static_cast<std::size_t>(label)];
        e += morse_energy(params.term(system.elements[i], system.elements[j], type), d(i, j));
      } else if (params.long_range && d(i, j) < params.cutoff) {
        const double r = d(i, j);
        const double r6 = r * r * r * r * r * r;
        const double smooth = 0.5 * (std::cos(std::numbers::pi * r / params.cutoff) + 1.0);
        e -= params.c6 / r6 * smooth;
      }
    }
  }
  return e;
}

std::vector<double> default_scaling_grid() {
  std::vector<double> g;
  for (int k = 0; k <= 12; ++k) g.push_back((90.0 + 5.0 * k) / 100.0);
  return g;
}

std::vector<ChemicalSystem> apply_scaling_sweep(const ChemicalSystem& stable,
                                                const std::vector<double>& grid,
                                                const OracleParams& oracle,
                                                const BondRuleSet& rules) {
  if (stable.scaling && *stable.scaling != 1.0) {
    throw ContractError("scaling sweep expects a stable geometry (scaling 1)");
  }
  std::vector<ChemicalSystem> out;
  out.reserve(grid.size());
  for (double lambda : grid) {
    ChemicalSystem s = scale_system(stable, lambda);
    s.energy = oracle_energy(s, oracle, rules);
    out.push_back(std::move(s));
  }
  return out;
}

std::string to_string(Stratify s) {
  switch (s) {
    case Stratify::kNone: return "none";
    case Stratify::kSystemIdentity: return "system";
    case Stratify::kSizeBucket: return "size";
  }
  return "none";
}

Stratify parse_stratify(const std::string& s) {
  if (s == "none") return Stratify::kNone;
  if (s == "system") return Stratify::kSystemIdentity;
  if (s == "size") return Stratify::kSizeBucket;
  throw ConfigError("unknown stratification '" + s + "' (expected none|system|size)");
}

namespace {

// Splits a list of groups (each a list of system indices) by group counts.
void allocate_groups(std::vector<std::vector<int>> groups, std::array<double, 3> f,
                     std::mt19937_64& rng, Split& out) {
  std::shuffle(groups.begin(), groups.end(), rng);
  const auto n = static_cast<long long>(groups.size());
  const long long n_train = std::llround(f[0] * static_cast<double>(n));
  const long long n_val = std::min(n - n_train, std::llround(f[1] * static_cast<double>(n)));
  for (long long g = 0; g < n; ++g) {
    auto& dst = g < n_train ? out.train : (g < n_train + n_val ? out.val : out.test);
    dst.insert(dst.end(), groups[g].begin(), groups[g].end());
  }
}

}  // namespace

Split split_dataset(const std::vector<ChemicalSystem>& systems, std::array<double, 3> fractions,
                    std::uint64_t seed, Stratify stratify, int bucket_width) {
  double total = 0.0;
  for (double f : fractions) {
    if (f < 0.0) throw ConfigError("split fractions must be nonnegative");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("split fractions must sum to 1");
  std::mt19937_64 rng(seed);
  Split out;
  const int nonzero = static_cast<int>(std::count_if(fractions.begin(), fractions.end(),
                                                     [](double f) { return f > 0.0; }));
  auto check_groups = [&](std::size_t n_groups) {
    if (static_cast<int>(n_groups) < nonzero) {
      throw ConfigError("only " + std::to_string(n_groups) + " strata for " +
                        std::to_string(nonzero) + " non-empty splits");
    }
  };

  if (stratify == Stratify::kNone) {
    std::vector<std::vector<int>> groups;
    for (int i = 0; i < static_cast<int>(systems.size()); ++i) groups.push_back({i});
    check_groups(groups.size());
    allocate_groups(std::move(groups), fractions, rng, out);
  } else {
    std::map<std::string, std::vector<int>> by_geometry;
    for (int i = 0; i < static_cast<int>(systems.size()); ++i) {
      const auto& id = systems[i].provenance.geometry_id;
      by_geometry[id.empty() ? "#" + std::to_string(i) : id].push_back(i);
    }
    if (stratify == Stratify::kSystemIdentity) {
      std::vector<std::vector<int>> groups;
      for (auto& [_, g] : by_geometry) groups.push_back(std::move(g));
      check_groups(groups.size());
      allocate_groups(std::move(groups), fractions, rng, out);
    } else {
      if (bucket_width < 1) throw ConfigError("size bucket width must be >= 1");
      std::map<int, std::vector<std::vector<int>>> buckets;
      for (auto& [_, g] : by_geometry) {
        const int size = static_cast<int>(systems[g.front()].size());
        buckets[size / bucket_width].push_back(std::move(g));
      }
      for (auto& [_, groups] : buckets) {
        check_groups(groups.size());
        allocate_groups(std::move(groups), fractions, rng, out);
      }
    }
  }
  for (auto* v : {&out.train, &out.val, &out.test}) std::sort(v->begin(), v->end());
  return out;
}

void apply_size_cap(Split& split, const std::vector<ChemicalSystem>& systems, int cap) {
  auto too_big = [&](int i) { return static_cast<int>(systems[i].size()) > cap; };
  std::erase_if(split.train, too_big);
  std::erase_if(split.val, too_big);
}

}  // namespace dignn
