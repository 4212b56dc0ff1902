// Copyright 2026 The dignn Authors. Apache 2.0 License.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "dignn/dataset.hpp"
#include "dignn/errors.hpp"
#include "dignn/harness.hpp"

namespace dignn {

namespace {

std::vector<ChemicalSystem> pick(const std::vector<ChemicalSystem>& systems,
                                 const std::vector<int>& idx) {
  std::vector<ChemicalSystem> out;
  out.reserve(idx.size());
  for (int i : idx) out.push_back(systems.at(i));
  return out;
}

std::ostringstream csv_stream() {
  std::ostringstream os;
  os.precision(17);
  return os;
}

std::string backbone_label(BackboneKind b) { return b == BackboneKind::kMpnn ? "MPNN" : "SchNet"; }

// Systems made of a single element, keyed by that element.
std::string sole_element(const ChemicalSystem& s) {
  for (const auto& e : s.elements) {
    if (e != s.elements.front()) return {};
  }
  return s.elements.empty() ? std::string() : s.elements.front();
}

}  // namespace

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) {
    throw ShapeError("pearson needs equal lengths, got " + std::to_string(x.size()) + " and " +
                     std::to_string(y.size()));
  }
  if (x.size() < 2) return 0.0;
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

std::vector<VariantRun> compare_variants(const std::vector<Variant>& variants,
                                         const ExperimentData& data,
                                         const std::vector<std::uint64_t>& seeds, int workers) {
  const auto train_set = pick(data.systems, data.split.train);
  const auto val_set = pick(data.systems, data.split.val);
  const auto test_set = pick(data.systems, data.split.test);
  const int n = static_cast<int>(variants.size() * seeds.size());
  std::vector<VariantRun> runs(n);
  run_parallel(n, workers, [&](int k) {
    const auto& v = variants[k / seeds.size()];
    TrainConfig c = v.config;
    c.seed = seeds[k % seeds.size()];
    auto r = train(c, train_set, val_set, data.rules, data.grid);
    VariantRun& out = runs[k];
    out.variant = v.name;
    out.seed = c.seed;
    out.metrics = evaluate(model_predictor(r.model, data.rules), test_set, data.grid);
    out.params = r.model.count_params();
    out.alpha = r.model.backbone().reported_alpha();
    out.epochs = static_cast<int>(r.log.size());
  });
  return runs;
}

void write_variant_csv(const std::filesystem::path& path, const std::vector<VariantRun>& runs) {
  auto os = csv_stream();
  os << "variant,seed,ae_mean,ae_std,re_mean,re_std,dsg_mean,dsg_std,params_base,"
        "params_specialisation,params_percent,alpha,epochs\n";
  for (const auto& r : runs) {
    const auto& m = r.metrics;
    os << r.variant << ',' << r.seed << ',' << m.ae.mean << ',' << m.ae.std << ',' << m.re.mean
       << ',' << m.re.std << ',' << m.dsg.mean << ',' << m.dsg.std << ',' << r.params.base << ','
       << r.params.specialisation << ',' << r.params.specialisation_percent() << ',' << r.alpha
       << ',' << r.epochs << '\n';
  }
  write_text(path, os.str());
}

SizeGenResult size_generalization(const std::vector<Variant>& variants, const ExperimentData& data,
                                  const std::vector<std::uint64_t>& seeds, int cap,
                                  bool include_uncapped, int workers) {
  if (cap < 1) throw ConfigError("size cap must be >= 1");
  std::vector<bool> modes{true};
  if (include_uncapped) modes.push_back(false);
  Split capped_split = data.split;
  apply_size_cap(capped_split, data.systems, cap);
  if (capped_split.train.empty()) {
    throw ConfigError("no training system has at most " + std::to_string(cap) + " atoms");
  }
  const auto test_set = pick(data.systems, data.split.test);

  struct Job {
    std::size_t variant;
    std::uint64_t seed;
    bool capped;
  };
  std::vector<Job> jobs;
  for (std::size_t v = 0; v < variants.size(); ++v) {
    for (auto seed : seeds) {
      for (bool capped : modes) jobs.push_back({v, seed, capped});
    }
  }
  std::vector<MetricsReport> reports(jobs.size());
  run_parallel(static_cast<int>(jobs.size()), workers, [&](int k) {
    const Job& j = jobs[k];
    const Split& s = j.capped ? capped_split : data.split;
    TrainConfig c = variants[j.variant].config;
    c.seed = j.seed;
    auto r = train(c, pick(data.systems, s.train), pick(data.systems, s.val), data.rules, data.grid);
    reports[k] = evaluate(model_predictor(r.model, data.rules), test_set, data.grid);
  });

  SizeGenResult result;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    const Job& j = jobs[k];
    const auto& name = variants[j.variant].name;
    std::map<int, std::vector<double>> by_size;
    std::vector<double> sizes, errors;
    for (const auto& m : reports[k].systems) {
      by_size[m.size].push_back(m.ae);
      sizes.push_back(m.size);
      errors.push_back(m.ae);
    }
    for (const auto& [size, ae] : by_size) {
      const Aggregate a = aggregate(ae);
      result.table.push_back({name, j.seed, j.capped, size, a.mean, a.count});
    }
    result.summary.push_back({name, j.seed, j.capped, pearson(sizes, errors), reports[k].ae.mean});
  }
  return result;
}

void write_size_gen_csv(const std::filesystem::path& table, const std::filesystem::path& summary,
                        const SizeGenResult& result) {
  auto t = csv_stream();
  t << "variant,seed,capped,size,ae_mean,count\n";
  for (const auto& r : result.table) {
    t << r.variant << ',' << r.seed << ',' << (r.capped ? 1 : 0) << ',' << r.size << ','
      << r.ae_mean << ',' << r.count << '\n';
  }
  write_text(table, t.str());
  auto s = csv_stream();
  s << "variant,seed,capped,pearson,ae_mean\n";
  for (const auto& r : result.summary) {
    s << r.variant << ',' << r.seed << ',' << (r.capped ? 1 : 0) << ',' << r.pearson << ','
      << r.ae_mean << '\n';
  }
  write_text(summary, s.str());
}

std::string to_string(ReduceAxis a) { return a == ReduceAxis::kSystems ? "systems" : "scalings"; }

ReduceAxis parse_reduce_axis(const std::string& s) {
  if (s == "systems") return ReduceAxis::kSystems;
  if (s == "scalings") return ReduceAxis::kScalings;
  throw UsageError("unknown reduction axis '" + s + "' (expected systems or scalings)");
}

std::vector<int> reduced_scaling_indices(const std::vector<double>& grid, int k) {
  const int n = static_cast<int>(grid.size());
  int one = -1;
  for (int i = 0; i < n; ++i) {
    if (std::abs(grid[i] - 1.0) <= 1e-12) one = i;
  }
  if (one < 0) throw ConfigError("the scaling grid must contain 1.0");
  if (k < 1) throw ConfigError("at least one scaling must be kept");
  if (k >= n) {
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    return all;
  }
  if (k == 1) return {one};
  std::vector<int> idx;
  for (int j = 0; j < k; ++j) {
    idx.push_back(static_cast<int>(std::lround(static_cast<double>(j) * (n - 1) / (k - 1))));
  }
  if (std::find(idx.begin(), idx.end(), one) == idx.end()) {
    auto closest = std::min_element(idx.begin(), idx.end(), [&](int a, int b) {
      const double da = std::abs(grid[a] - 1.0);
      const double db = std::abs(grid[b] - 1.0);
      return da < db || (da == db && a < b);
    });
    *closest = one;
  }
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<int> reduce_subset(const std::vector<ChemicalSystem>& systems,
                               const std::vector<int>& subset, const std::vector<double>& grid,
                               double fraction, ReduceAxis axis, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ConfigError("reduction fraction must be in (0, 1], got " + std::to_string(fraction));
  }
  std::vector<int> kept;
  if (axis == ReduceAxis::kScalings) {
    const int n = static_cast<int>(grid.size());
    const int k = static_cast<int>(std::ceil(n * fraction - 1e-9));
    std::vector<double> values;
    for (int i : reduced_scaling_indices(grid, k)) values.push_back(grid[i]);
    for (int i : subset) {
      const auto& s = systems.at(i);
      if (!s.scaling) {
        throw ConfigError("reducing scalings needs scaled systems; " + s.provenance.geometry_id +
                          " has none");
      }
      const bool keep = std::any_of(values.begin(), values.end(),
                                    [&](double v) { return std::abs(v - *s.scaling) <= 1e-9; });
      if (keep) kept.push_back(i);
    }
    return kept;
  }
  std::vector<std::string> ids;
  std::set<std::string> seen;
  for (int i : subset) {
    const auto& id = systems.at(i).provenance.geometry_id;
    if (seen.insert(id).second) ids.push_back(id);
  }
  std::mt19937_64 rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);
  const auto take = static_cast<std::size_t>(std::ceil(ids.size() * fraction - 1e-9));
  const std::set<std::string> chosen(ids.begin(), ids.begin() + std::min(take, ids.size()));
  for (int i : subset) {
    if (chosen.count(systems[i].provenance.geometry_id)) kept.push_back(i);
  }
  return kept;
}

std::vector<ReducedRow> reduced_training(const std::vector<Variant>& variants,
                                         const ExperimentData& data,
                                         const std::vector<double>& fractions, ReduceAxis axis,
                                         const std::vector<std::uint64_t>& seeds, int workers) {
  struct Job {
    std::size_t variant;
    std::uint64_t seed;
    double fraction;
  };
  std::vector<Job> jobs;
  for (std::size_t v = 0; v < variants.size(); ++v) {
    for (auto seed : seeds) {
      for (double f : fractions) jobs.push_back({v, seed, f});
    }
  }
  const auto test_set = pick(data.systems, data.split.test);
  // Validate every schedule point before spending time on training.
  for (double f : fractions) {
    if (reduce_subset(data.systems, data.split.train, data.grid, f, axis, 0).empty()) {
      throw ConfigError("fraction " + std::to_string(f) + " leaves an empty training set");
    }
  }
  std::vector<ReducedRow> rows(jobs.size());
  run_parallel(static_cast<int>(jobs.size()), workers, [&](int k) {
    const Job& j = jobs[k];
    const std::uint64_t pick_seed = derive_seed(j.seed, 3);
    const auto tr = reduce_subset(data.systems, data.split.train, data.grid, j.fraction, axis,
                                  pick_seed);
    const auto va = reduce_subset(data.systems, data.split.val, data.grid, j.fraction, axis,
                                  derive_seed(j.seed, 4));
    if (tr.empty()) {
      throw ConfigError("fraction " + std::to_string(j.fraction) + " leaves an empty training set");
    }
    TrainConfig c = variants[j.variant].config;
    c.seed = j.seed;
    auto r = train(c, pick(data.systems, tr), pick(data.systems, va), data.rules, data.grid);
    const auto m = evaluate(model_predictor(r.model, data.rules), test_set, data.grid);
    ReducedRow& row = rows[k];
    row.variant = variants[j.variant].name;
    row.seed = j.seed;
    row.fraction = j.fraction;
    if (axis == ReduceAxis::kScalings) {
      row.points = static_cast<int>(std::ceil(data.grid.size() * j.fraction - 1e-9));
    } else {
      std::set<std::string> geoms;
      for (int i : tr) geoms.insert(data.systems[i].provenance.geometry_id);
      row.points = static_cast<int>(geoms.size());
    }
    row.train_systems = static_cast<int>(tr.size());
    row.ae_mean = m.ae.mean;
    row.dsg_mean = m.dsg.mean;
  });
  return rows;
}

void write_reduced_csv(const std::filesystem::path& path, const std::vector<ReducedRow>& rows) {
  auto os = csv_stream();
  os << "variant,seed,fraction,points,train_systems,ae_mean,dsg_mean\n";
  for (const auto& r : rows) {
    os << r.variant << ',' << r.seed << ',' << r.fraction << ',' << r.points << ','
       << r.train_systems << ',' << r.ae_mean << ',' << r.dsg_mean << '\n';
  }
  write_text(path, os.str());
}

std::vector<Variant> ablation_variants(const TrainConfig& full, bool include_base) {
  if (full.model.specialisation == Specialisation::kNone) {
    throw ConfigError("the fully augmented variant needs a relation specialisation");
  }
  const std::string b = backbone_label(full.model.backbone);
  auto without = [&](AuxTask t) {
    TrainConfig c = full;
    auto drop = [t](std::vector<AuxTask>& v) { v.erase(std::remove(v.begin(), v.end(), t), v.end()); };
    drop(c.model.aux_tasks);
    drop(c.loss.tasks);
    return c;
  };
  std::vector<Variant> out;
  if (include_base) {
    TrainConfig c = full;
    c.model.specialisation = Specialisation::kNone;
    c.model.aux_tasks.clear();
    c.loss.tasks.clear();
    out.push_back({b, c});
  }
  out.push_back({"Augm.-" + b, full});
  TrainConfig no_spec = full;
  no_spec.model.specialisation = Specialisation::kNone;
  out.push_back({"Augm.-" + b + " w/o r-spec. interactions", no_spec});
  const std::pair<AuxTask, const char*> tasks[] = {{AuxTask::kAtomCounts, "# atoms"},
                                                   {AuxTask::kOrbitalCounts, "# orbitals"},
                                                   {AuxTask::kScalingDistribution, "DSG"}};
  for (const auto& [t, label] : tasks) {
    if (full.model.has_task(t)) {
      out.push_back({"Augm.-" + b + " w/o aux. " + label, without(t)});
    }
  }
  return out;
}

std::vector<AblationRow> ablation(const TrainConfig& full, const ExperimentData& data,
                                  std::uint64_t seed, bool include_base, int workers) {
  const auto variants = ablation_variants(full, include_base);
  const auto test_set = pick(data.systems, data.split.test);
  std::vector<std::string> subsets{"all"};
  {
    std::set<std::string> elements;
    for (const auto& s : test_set) {
      const auto e = sole_element(s);
      if (!e.empty()) elements.insert(e);
    }
    subsets.insert(subsets.end(), elements.begin(), elements.end());
  }
  std::vector<std::vector<AblationRow>> per_variant(variants.size());
  run_parallel(static_cast<int>(variants.size()), workers, [&](int k) {
    TrainConfig c = variants[k].config;
    c.seed = seed;
    auto r = train(c, pick(data.systems, data.split.train), pick(data.systems, data.split.val),
                   data.rules, data.grid);
    const auto predict = model_predictor(r.model, data.rules);
    for (const auto& subset : subsets) {
      std::vector<ChemicalSystem> part;
      for (const auto& s : test_set) {
        if (subset == "all" || sole_element(s) == subset) part.push_back(s);
      }
      const auto m = evaluate(predict, part, data.grid);
      per_variant[k].push_back({variants[k].name, subset, m.ae.mean, m.ae.std, m.dsg.mean,
                                m.dsg.std, static_cast<int>(part.size())});
    }
  });
  std::vector<AblationRow> rows;
  for (auto& v : per_variant) rows.insert(rows.end(), v.begin(), v.end());
  return rows;
}

void write_ablation_csv(const std::filesystem::path& path, const std::vector<AblationRow>& rows) {
  auto os = csv_stream();
  os << "method,subset,ae_mean,ae_std,dsg_mean,dsg_std,systems\n";
  for (const auto& r : rows) {
    os << '"' << r.label << '"' << ',' << r.subset << ',' << r.ae_mean << ',' << r.ae_std << ','
       << r.dsg_mean << ',' << r.dsg_std << ',' << r.systems << '\n';
  }
  write_text(path, os.str());
}

}  // namespace dignn
