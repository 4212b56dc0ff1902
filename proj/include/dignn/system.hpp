// Copyright 2026 The dignn Authors. Apache 2.0 License.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dignn/tensor.hpp"

namespace dignn {

using Vec3 = std::array<double, 3>;

struct Provenance {
  std::string dataset;      // generator family tag, e.g. "ucg"
  std::uint64_t seed = 0;   // per-sample RNG seed
  std::string geometry_id;  // shared by every scaled copy of one stable geometry
};

// Atoms with positions in angstrom; energy in a.u.; scaling 1.0 marks the
// stable geometry.
struct ChemicalSystem {
  std::vector<std::string> elements;
  std::vector<Vec3> coords;
  std::optional<double> energy;
  std::optional<double> scaling;
  Provenance provenance;

  std::size_t size() const { return elements.size(); }
  double scale_or_one() const { return scaling.value_or(1.0); }
  // Throws DataError on length mismatch, empty system or coincident atoms.
  void validate() const;
};

double distance(const Vec3& a, const Vec3& b);

// Symmetric N x N matrix with zero diagonal. Throws DataError if two atoms
// coincide.
Tensor pairwise_distances(const ChemicalSystem& system);

// Multiplies every coordinate by lambda about the origin and records the
// cumulative scaling. Throws DomainError if lambda <= 0.
ChemicalSystem scale_system(const ChemicalSystem& system, double lambda);

// Count of atoms per element of the catalogue, in catalogue order.
std::vector<int> element_counts(const ChemicalSystem& system,
                                const std::vector<std::string>& catalogue);

}  // namespace dignn
