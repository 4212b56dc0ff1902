// Copyright 2026 The dignn Authors. Apache 2.0 License.

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "dignn/dataset.hpp"
#include "dignn/errors.hpp"
#include "dignn/harness.hpp"

namespace dignn {

using nlohmann::json;

namespace {

constexpr double kSameScaling = 1e-12;

std::ostringstream csv_stream() {
  std::ostringstream os;
  os.precision(17);
  return os;
}

void optional_cell(std::ostream& os, const std::optional<double>& v) {
  if (v) os << *v;
}

}  // namespace

Aggregate aggregate(const std::vector<double>& values) {
  Aggregate a;
  a.count = static_cast<int>(values.size());
  if (values.empty()) return a;
  double sum = 0.0;
  for (double v : values) sum += v;
  a.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    a.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return a;
}

Predictor model_predictor(const EnergyModel& model, const BondRuleSet& rules) {
  return [&model, &rules](const ChemicalSystem& s) { return model.predict(model.graph(s, rules)); };
}

Predictor oracle_predictor(const OracleParams& oracle, const BondRuleSet& rules) {
  return [&oracle, &rules](const ChemicalSystem& s) { return oracle_energy(s, oracle, rules); };
}

DsgResult dsg_search(const Predictor& predict, const ChemicalSystem& stable,
                     const std::vector<double>& grid) {
  if (std::none_of(grid.begin(), grid.end(),
                   [](double g) { return std::abs(g - 1.0) <= kSameScaling; })) {
    throw ConfigError("the scaling grid must contain 1.0");
  }
  if (std::abs(stable.scale_or_one() - 1.0) > kSameScaling) {
    throw ContractError("stable-geometry search needs a system at scaling 1, got " +
                        std::to_string(stable.scale_or_one()));
  }
  DsgResult r;
  r.energies.reserve(grid.size());
  for (double lambda : grid) r.energies.push_back(predict(scale_system(stable, lambda)));
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double e = r.energies[i];
    const double eb = r.energies[best];
    if (e < eb) {
      best = i;
    } else if (e == eb) {
      const double di = std::abs(grid[i] - 1.0);
      const double db = std::abs(grid[best] - 1.0);
      if (di < db || (di == db && grid[i] < grid[best])) best = i;
    }
  }
  r.lambda_star = grid[best];
  r.dsg = std::abs(r.lambda_star - 1.0);
  return r;
}

MetricsReport evaluate(const Predictor& predict, const std::vector<ChemicalSystem>& systems,
                       const std::vector<double>& grid, int workers) {
  MetricsReport report;
  const int n = static_cast<int>(systems.size());
  std::vector<double> pred(systems.size());
  run_parallel(n, workers, [&](int i) { pred[i] = predict(systems[i]); });

  std::vector<double> ae, re;
  for (int i = 0; i < n; ++i) {
    const auto& s = systems[i];
    if (!s.energy) throw DataError("system " + s.provenance.geometry_id + " has no energy label");
    SystemMetrics m;
    m.geometry_id = s.provenance.geometry_id;
    m.size = static_cast<int>(s.size());
    m.scaling = s.scale_or_one();
    m.y = *s.energy;
    m.y_hat = pred[i];
    m.ae = std::abs(m.y_hat - m.y);
    ae.push_back(m.ae);
    if (m.y != 0.0) {
      m.re = m.ae / std::abs(m.y);
      re.push_back(*m.re);
    } else {
      ++report.re_excluded;
    }
    report.systems.push_back(std::move(m));
  }
  report.ae = aggregate(ae);
  report.re = aggregate(re);

  // Group scaled copies by their stable geometry, in first-seen order.
  std::vector<std::string> ids;
  std::map<std::string, std::vector<int>> members;
  for (int i = 0; i < n; ++i) {
    const auto& id = systems[i].provenance.geometry_id;
    auto [it, fresh] = members.try_emplace(id);
    if (fresh) ids.push_back(id);
    it->second.push_back(i);
  }
  report.geometries.resize(ids.size());
  run_parallel(static_cast<int>(ids.size()), workers, [&](int g) {
    const auto& idx = members.at(ids[g]);
    ChemicalSystem stable;
    bool found = false;
    for (int i : idx) {
      if (std::abs(systems[i].scale_or_one() - 1.0) <= kSameScaling) {
        stable = systems[i];
        found = true;
        break;
      }
    }
    if (!found) {
      stable = scale_system(systems[idx[0]], 1.0 / systems[idx[0]].scale_or_one());
    }
    stable.scaling = 1.0;
    auto cached = [&](const ChemicalSystem& s) {
      for (int i : idx) {
        if (std::abs(systems[i].scale_or_one() - s.scale_or_one()) <= kSameScaling) return pred[i];
      }
      return predict(s);
    };
    const auto r = dsg_search(cached, stable, grid);
    report.geometries[g] = {ids[g], static_cast<int>(stable.size()), r.lambda_star, r.dsg};
  });
  std::vector<double> dsg;
  for (const auto& g : report.geometries) dsg.push_back(g.dsg);
  report.dsg = aggregate(dsg);
  return report;
}

void write_metrics_csv(const std::filesystem::path& path, const MetricsReport& report) {
  auto os = csv_stream();
  os << "geometry_id,size,scaling,y,y_hat,ae,re\n";
  for (const auto& m : report.systems) {
    os << m.geometry_id << ',' << m.size << ',' << m.scaling << ',' << m.y << ',' << m.y_hat << ','
       << m.ae << ',';
    optional_cell(os, m.re);
    os << '\n';
  }
  write_text(path, os.str());
}

void write_dsg_csv(const std::filesystem::path& path, const MetricsReport& report) {
  auto os = csv_stream();
  os << "geometry_id,size,lambda_star,dsg\n";
  for (const auto& g : report.geometries) {
    os << g.geometry_id << ',' << g.size << ',' << g.lambda_star << ',' << g.dsg << '\n';
  }
  write_text(path, os.str());
}

json summary_json(const MetricsReport& report) {
  auto agg = [](const Aggregate& a) {
    return json{{"mean", a.mean}, {"std", a.std}, {"count", a.count}};
  };
  return {{"ae", agg(report.ae)},
          {"re", agg(report.re)},
          {"re_excluded", report.re_excluded},
          {"dsg", agg(report.dsg)}};
}

Contributions atom_contributions(const EnergyModel& model, const ChemicalSystem& system,
                                 const BondRuleSet& rules) {
  const auto g = model.graph(system, rules);
  Tape tape = Tape::inference();
  const auto out = model.forward(g, tape);
  Contributions c;
  c.raw = out.prediction.contributions.value().values();
  c.energy = out.prediction.energy.item();
  double sum = 0.0;
  for (double v : c.raw) sum += v;
  if (std::abs(sum) > 1e-12) {
    std::vector<double> norm;
    for (double v : c.raw) norm.push_back(v / sum);
    c.normalised = std::move(norm);
  }
  return c;
}

std::vector<SweepRow> moving_atom_sweep(const EnergyModel& model, const BondRuleSet& rules,
                                        const std::string& element,
                                        const std::vector<double>& lambdas) {
  const ChemicalSystem seed = gen_fcc_lattice(element, 1, default_lattice_constant(element));
  int moving = 0;
  for (std::size_t i = 0; i < seed.size(); ++i) {
    const auto& c = seed.coords[i];
    if (c[0] == 0.0 && c[1] == 0.0 && c[2] == 0.0) moving = static_cast<int>(i);
  }
  int anchor = -1;
  double r_nn = 0.0;
  for (std::size_t i = 0; i < seed.size(); ++i) {
    if (static_cast<int>(i) == moving) continue;
    const double d = distance(seed.coords[moving], seed.coords[i]);
    if (anchor < 0 || d < r_nn - 1e-12) {
      anchor = static_cast<int>(i);
      r_nn = d;
    }
  }
  std::vector<SweepRow> rows;
  for (double lambda : lambdas) {
    if (!(lambda > 0.0)) throw DomainError("bond length multiplier must be > 0");
    ChemicalSystem s = seed;
    for (int k = 0; k < 3; ++k) {
      const double a = seed.coords[anchor][k];
      s.coords[moving][k] = a + lambda * (seed.coords[moving][k] - a);
    }
    s.provenance.geometry_id = "sweep/" + element;
    s.validate();
    const auto c = atom_contributions(model, s, rules);
    SweepRow row;
    row.lambda = lambda;
    row.displacement = (lambda - 1.0) * r_nn;
    row.energy = c.energy;
    if (c.normalised) {
      row.c_moving = (*c.normalised)[moving];
      double rest = 0.0;
      for (std::size_t i = 0; i < c.normalised->size(); ++i) {
        if (static_cast<int>(i) != moving) rest += (*c.normalised)[i];
      }
      row.c_static_mean = rest / static_cast<double>(c.normalised->size() - 1);
    }
    rows.push_back(row);
  }
  return rows;
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
  auto os = csv_stream();
  os << "lambda,displacement,energy,c_moving,c_static_mean\n";
  for (const auto& r : rows) {
    os << r.lambda << ',' << r.displacement << ',' << r.energy << ',';
    optional_cell(os, r.c_moving);
    os << ',';
    optional_cell(os, r.c_static_mean);
    os << '\n';
  }
  write_text(path, os.str());
}

std::vector<ScanRow> energy_scan(const Predictor& predict, const ChemicalSystem& stable,
                                 const std::vector<double>& grid, const Predictor* truth) {
  std::vector<ScanRow> rows;
  for (double lambda : grid) {
    const ChemicalSystem s = scale_system(stable, lambda / stable.scale_or_one());
    ScanRow r;
    r.lambda = s.scale_or_one();
    r.predicted = predict(s);
    if (truth) r.truth = (*truth)(s);
    rows.push_back(r);
  }
  return rows;
}

void write_scan_csv(const std::filesystem::path& path, const std::vector<ScanRow>& rows) {
  auto os = csv_stream();
  os << "lambda,predicted,truth\n";
  for (const auto& r : rows) {
    os << r.lambda << ',' << r.predicted << ',';
    optional_cell(os, r.truth);
    os << '\n';
  }
  write_text(path, os.str());
}

}  // namespace dignn
