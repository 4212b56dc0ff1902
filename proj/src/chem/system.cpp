// Copyright 2026 The dignn Authors. Apache 2.0 License.

#include "dignn/system.hpp"

#include <algorithm>
#include <cmath>

#include "dignn/errors.hpp"

namespace dignn {

void ChemicalSystem::validate() const {
  if (elements.empty()) throw DataError("chemical system has no atoms");
  if (elements.size() != coords.size()) {
    throw DataError("chemical system has " + std::to_string(elements.size()) + " elements but " +
                    std::to_string(coords.size()) + " positions");
  }
  pairwise_distances(*this);
}

double distance(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

Tensor pairwise_distances(const ChemicalSystem& system) {
  const int n = static_cast<int>(system.coords.size());
  Tensor d(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double r = distance(system.coords[i], system.coords[j]);
      if (!(r > 0.0)) {
        throw DataError("atoms " + std::to_string(i) + " and " + std::to_string(j) +
                        " coincide");
      }
      d(i, j) = r;
      d(j, i) = r;
    }
  }
  return d;
}

ChemicalSystem scale_system(const ChemicalSystem& system, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("scaling factor must be positive, got " + std::to_string(lambda));
  ChemicalSystem out = system;
  for (auto& c : out.coords) {
    for (double& x : c) x *= lambda;
  }
  out.scaling = system.scale_or_one() * lambda;
  return out;
}

std::vector<int> element_counts(const ChemicalSystem& system,
                                const std::vector<std::string>& catalogue) {
  std::vector<int> counts(catalogue.size(), 0);
  for (const auto& e : system.elements) {
    auto it = std::find(catalogue.begin(), catalogue.end(), e);
    if (it == catalogue.end()) throw ConfigError("element '" + e + "' is not in the catalogue");
    ++counts[static_cast<std::size_t>(it - catalogue.begin())];
  }
  return counts;
}

}  // namespace dignn
