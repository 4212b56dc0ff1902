// Copyright 2026 The dignn Authors. Apache 2.0 License.

#include <algorithm>
#include <array>
#include <iterator>
#include <set>

#include "dignn/datagen.hpp"
#include "dignn/errors.hpp"

namespace dignn {

namespace {

constexpr std::array<LatticeSite, 12> kNeighbourOffsets{{
    {1, 1, 0}, {1, -1, 0}, {-1, 1, 0}, {-1, -1, 0},
    {1, 0, 1}, {1, 0, -1}, {-1, 0, 1}, {-1, 0, -1},
    {0, 1, 1}, {0, 1, -1}, {0, -1, 1}, {0, -1, -1},
}};

Vec3 site_position(const LatticeSite& s, double a) {
  return {0.5 * a * s[0], 0.5 * a * s[1], 0.5 * a * s[2]};
}

std::vector<LatticeSite> fcc_sites(int reps) {
  std::vector<LatticeSite> sites;
  for (int i = 0; i <= 2 * reps; ++i) {
    for (int j = 0; j <= 2 * reps; ++j) {
      for (int k = 0; k <= 2 * reps; ++k) {
        if ((i + j + k) % 2 == 0) sites.push_back({i, j, k});
      }
    }
  }
  return sites;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix64 finalizer over the combined words
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::int64_t fcc_atom_count(int reps) {
  const std::int64_t n = reps;
  return (n + 1) * (n + 1) * (n + 1) + 3 * n * n * (n + 1);
}

ChemicalSystem gen_fcc_lattice(const std::string& element, int reps, double lattice_constant) {
  if (reps < 1) throw DomainError("fcc repetitions must be >= 1");
  if (!(lattice_constant > 0.0)) throw DomainError("lattice constant must be positive");
  ChemicalSystem s;
  for (const auto& site : fcc_sites(reps)) {
    s.elements.push_back(element);
    s.coords.push_back(site_position(site, lattice_constant));
  }
  s.scaling = 1.0;
  s.provenance.dataset = "pc";
  s.provenance.geometry_id = "pc/" + element + "/n" + std::to_string(reps);
  return s;
}

double default_lattice_constant(const std::string& element) {
  if (element == "Al") return 4.05;
  if (element == "Cu") return 3.61;
  throw ConfigError("no default lattice constant for element '" + element + "'");
}

void GrowthConfig::validate() const {
  if (num_seeds < 1) throw ConfigError("crystal growth needs at least one seed");
  if (min_size < 15 || max_size > 114 || min_size > max_size) {
    throw ConfigError("crystal growth size range must lie within [15, 114]");
  }
  if (!(lattice_constant > 0.0)) throw ConfigError("lattice constant must be positive");
}

std::vector<ChemicalSystem> gen_crystal_growth(const GrowthConfig& config) {
  config.validate();
  std::vector<ChemicalSystem> out;
  const std::vector<LatticeSite> seed_sites = fcc_sites(1);
  for (int s = 0; s < config.num_seeds; ++s) {
    const std::uint64_t stream = derive_seed(config.seed, static_cast<std::uint64_t>(s));
    std::mt19937_64 rng(stream);
    std::vector<LatticeSite> order = seed_sites;
    std::set<LatticeSite> occupied(order.begin(), order.end());
    std::set<LatticeSite> frontier;
    auto extend_frontier = [&](const LatticeSite& site) {
      for (const auto& o : kNeighbourOffsets) {
        LatticeSite n{site[0] + o[0], site[1] + o[1], site[2] + o[2]};
        if (!occupied.count(n)) frontier.insert(n);
      }
    };
    for (const auto& site : order) extend_frontier(site);
    while (static_cast<int>(order.size()) < config.max_size) {
      if (frontier.empty()) throw GenerationError("crystal growth ran out of surface sites");
      std::uniform_int_distribution<std::size_t> pick(0, frontier.size() - 1);
      auto it = std::next(frontier.begin(), static_cast<std::ptrdiff_t>(pick(rng)));
      const LatticeSite chosen = *it;
      frontier.erase(it);
      occupied.insert(chosen);
      order.push_back(chosen);
      extend_frontier(chosen);
      const int n = static_cast<int>(order.size());
      if (n >= config.min_size) {
        ChemicalSystem sys;
        for (const auto& site : order) {
          sys.elements.push_back(config.element);
          sys.coords.push_back(site_position(site, config.lattice_constant));
        }
        sys.scaling = 1.0;
        sys.provenance.dataset = "cg";
        sys.provenance.seed = stream;
        sys.provenance.geometry_id =
            "cg/" + config.element + "/s" + std::to_string(s) + "/n" + std::to_string(n);
        out.push_back(std::move(sys));
      }
    }
  }
  return out;
}

}  // namespace dignn
