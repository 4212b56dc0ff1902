// Copyright 2026 The dignn Authors. Apache 2.0 License.
//
// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero when any selected criterion fails.
//
//   acceptance [--out DIR] [--workers N] [criterion ...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "../unit/helpers.hpp"
#include "dignn/cli.hpp"
#include "dignn/datagen.hpp"
#include "dignn/dataset.hpp"
#include "dignn/harness.hpp"
#include "dignn/schnet.hpp"

using namespace dignn;
using namespace dignn::testing;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Context {
  fs::path out;
  int workers = 1;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

const std::vector<AuxTask> kAllTasks{AuxTask::kAtomCounts, AuxTask::kOrbitalCounts,
                                     AuxTask::kScalingDistribution};

// The specialisation variants, each on the backbone(s) it is defined for.
struct VariantSpec {
  std::string label;
  BackboneKind backbone;
  Specialisation spec;
};

const std::vector<VariantSpec>& variant_specs() {
  static const std::vector<VariantSpec> v{
      {"MPNN message", BackboneKind::kMpnn, Specialisation::kMessage},
      {"SchNet message", BackboneKind::kSchnet, Specialisation::kMessage},
      {"MPNN weight-scalar", BackboneKind::kMpnn, Specialisation::kWeightScalar},
      {"MPNN weight-vector", BackboneKind::kMpnn, Specialisation::kWeightVector},
      {"SchNet weight-scalar", BackboneKind::kSchnet, Specialisation::kWeightScalar},
      {"SchNet weight-vector", BackboneKind::kSchnet, Specialisation::kWeightVector},
      {"MPNN update-separate", BackboneKind::kMpnn, Specialisation::kUpdateSeparate},
      {"MPNN update-concat", BackboneKind::kMpnn, Specialisation::kUpdateConcat},
      {"MPNN update-shared", BackboneKind::kMpnn, Specialisation::kUpdateShared},
      {"SchNet update", BackboneKind::kSchnet, Specialisation::kUpdateSeparate},
  };
  return v;
}

bool is_weighting(Specialisation s) {
  return s == Specialisation::kWeightScalar || s == Specialisation::kWeightVector;
}

void set_alpha_logit(EnergyModel& m, double logit) {
  if (m.config().backbone == BackboneKind::kSchnet) {
    const_cast<Schnet&>(dynamic_cast<const Schnet&>(m.backbone())).set_alpha_logits(logit);
  } else {
    m.params().at("alpha.logit").value.fill(logit);
  }
}

void set_lambdas_to_one(EnergyModel& m) {
  for (auto& p : m.params()) {
    if (p->name.find("lambda.r") != std::string::npos) p->value.fill(1.0);
  }
}

// Random tree molecules, each at a random grid scaling.
std::vector<ChemicalSystem> random_molecules(int count, int min_size, int max_size,
                                             std::uint64_t seed, bool grid_scalings) {
  MoleculeConfig mc;
  mc.count = count;
  mc.min_size = min_size;
  mc.max_size = max_size;
  mc.seed = seed;
  const auto rules = BondRuleSet::molecules();
  auto stable = gen_synthetic_molecules(mc, rules);
  const auto grid = default_scaling_grid();
  std::mt19937_64 rng(derive_seed(seed, 7));
  std::vector<ChemicalSystem> out;
  for (const auto& s : stable) {
    double lambda;
    if (grid_scalings) {
      lambda = grid[std::uniform_int_distribution<std::size_t>(0, grid.size() - 1)(rng)];
    } else {
      lambda = std::uniform_real_distribution<double>(0.9, 1.5)(rng);
    }
    ChemicalSystem x = scale_system(s, lambda);
    x.scaling = lambda;
    out.push_back(std::move(x));
  }
  return out;
}

ModelConfig default_config(BackboneKind b, const BondRuleSet& rules) {
  return b == BackboneKind::kMpnn ? ModelConfig::mpnn(rules.elements(), rules.relations())
                                  : ModelConfig::schnet(rules.elements(), rules.relations());
}

// ---- 1 -------------------------------------------------------------------

Outcome reduction_suite(const Context&) {
  const auto rules = BondRuleSet::molecules();
  const auto systems = random_molecules(50, 2, 12, 1001, false);
  if (systems.size() != 50) return {false, "generator returned " + std::to_string(systems.size())};
  double worst_alpha = 0.0, worst_lambda = 0.0;
  std::string worst_label;
  int configs = 0;
  for (auto backbone : {BackboneKind::kMpnn, BackboneKind::kSchnet}) {
    const ModelConfig base_cfg = default_config(backbone, rules);
    EnergyModel base(base_cfg);
    randomize(base.params(), 11, 0.1);
    std::vector<TypedGraph> graphs;
    std::vector<double> e_base;
    for (const auto& s : systems) {
      graphs.push_back(base.graph(s, rules));
      e_base.push_back(base.predict(graphs.back()));
    }
    for (const auto& v : variant_specs()) {
      if (v.backbone != backbone) continue;
      ++configs;
      ModelConfig cfg = base_cfg;
      cfg.specialisation = v.spec;
      EnergyModel m(cfg);
      randomize(m.params(), 12, 0.1);
      copy_shared(base.params(), m.params());
      set_alpha_logit(m, 50.0);
      if (m.backbone().reported_alpha() != 1.0) return {false, v.label + ": alpha is not 1"};
      for (std::size_t i = 0; i < graphs.size(); ++i) {
        const double diff = std::abs(m.predict(graphs[i]) - e_base[i]);
        if (diff > worst_alpha) {
          worst_alpha = diff;
          worst_label = v.label;
        }
      }
      if (!is_weighting(v.spec)) continue;
      std::mt19937_64 rng(13);
      std::uniform_real_distribution<double> logit(-3.0, 3.0);
      for (std::size_t i = 0; i < graphs.size(); ++i) {
        set_alpha_logit(m, logit(rng));
        set_lambdas_to_one(m);
        worst_lambda = std::max(worst_lambda, std::abs(m.predict(graphs[i]) - e_base[i]));
      }
    }
  }
  const bool pass = configs == 10 && worst_alpha <= 1e-10 && worst_lambda <= 1e-10;
  return {pass, std::to_string(configs) + " configs x 50 graphs, max |dE| alpha=1 " +
                    fmt("%.2e", worst_alpha) + (worst_label.empty() ? "" : " (" + worst_label + ")") +
                    ", lambda=1 " +
                    fmt("%.2e", worst_lambda) + ", tol 1e-10"};
}

// ---- 2 -------------------------------------------------------------------

Outcome gradient_suite(const Context&) {
  const auto rules = BondRuleSet::molecules();
  const auto grid = default_scaling_grid();
  LossConfig loss;
  loss.tasks = kAllTasks;
  if (loss.beta != 0.3) return {false, "default beta is not 0.3"};
  const auto systems = random_molecules(20, 2, 5, 2002, true);
  if (systems.size() != 20) return {false, "generator returned " + std::to_string(systems.size())};

  std::vector<VariantSpec> all = variant_specs();
  all.insert(all.begin(), {{"MPNN base", BackboneKind::kMpnn, Specialisation::kNone},
                           {"SchNet base", BackboneKind::kSchnet, Specialisation::kNone}});
  double worst = 0.0;
  std::string where;
  long checked = 0;
  for (const auto& v : all) {
    for (int seed = 0; seed < 20; ++seed) {
      const auto& sys = systems[seed];
      ModelConfig cfg = v.backbone == BackboneKind::kMpnn
                            ? tiny_mpnn(v.spec, rules.elements(), rules.relations())
                            : tiny_schnet(v.spec, rules.elements(), rules.relations());
      cfg.aux_tasks = kAllTasks;
      cfg.init_seed = derive_seed(400, seed);
      EnergyModel m(cfg);
      randomize(m.params(), derive_seed(500, seed));
      const auto g = m.graph(sys, rules);
      const auto targets = aux_targets(sys, rules.elements(), loss, grid);
      const double y = -0.3 * static_cast<double>(sys.size());
      const auto report = check_gradients(m.params(), [&](Tape& tape) {
        auto out = m.forward(g, tape);
        return total_loss(out.prediction.energy, y, out.aux, &targets, loss).total;
      });
      checked += report.checked;
      if (report.max_rel > worst) {
        worst = report.max_rel;
        where = v.label + " seed " + std::to_string(seed) + " " + report.worst;
      }
    }
  }
  return {worst < 1e-4, std::to_string(all.size()) + " variants x 20 seeds, " +
                            std::to_string(checked) + " scalars, max rel err " +
                            fmt("%.2e", worst) + " (tol 1e-4; worst " + where + ")"};
}

// ---- 3 -------------------------------------------------------------------

Outcome generator_cardinalities(const Context& ctx) {
  const fs::path dir = ctx.out / "c3";
  fs::create_directories(dir);
  const auto path = (dir / "cg.json").string();
  std::ostringstream out, err;
  const int status = run_command({"gen", "--family", "cg", "--seeds", "20", "--elements", "Al,Cu",
                                  "--out", path, "--workers", std::to_string(ctx.workers)},
                                 out, err);
  if (status != 0) return {false, "gen cg failed: " + err.str()};
  const auto cg = load_dataset(path).systems.size();
  const bool cg_manifest = fs::exists(path + ".manifest.json");

  std::size_t ucg = 0;
  for (std::uint64_t i = 0; i < 2; ++i) {
    GrowthConfig g;
    g.element = i == 0 ? "Al" : "Cu";
    g.lattice_constant = default_lattice_constant(g.element);
    g.num_seeds = 5;
    g.seed = derive_seed(77, i);
    ucg += gen_crystal_growth(g).size();
  }
  const auto seed14 = gen_fcc_lattice("Al", 1, 4.05).size();
  const auto fcc2 = gen_fcc_lattice("Cu", 2, 3.61).size();
  // Brute force: distinct fcc sites in [0, 2n]^3 half-lattice units.
  auto brute = [](int n) {
    int c = 0;
    for (int i = 0; i <= 2 * n; ++i)
      for (int j = 0; j <= 2 * n; ++j)
        for (int k = 0; k <= 2 * n; ++k) c += (i + j + k) % 2 == 0;
    return c;
  };
  const bool pass = cg == 4000 && cg_manifest && ucg == 1000 && seed14 == 14 && fcc2 == 63 &&
                    brute(2) == 63 && fcc_atom_count(2) == 63;
  return {pass, "CG " + std::to_string(cg) + (cg_manifest ? " (+manifest)" : " (no manifest)") +
                    ", UCG stable " + std::to_string(ucg) + ", fcc seed " +
                    std::to_string(seed14) + ", fcc n=2 " + std::to_string(fcc2) +
                    " (brute force " + std::to_string(brute(2)) + ")"};
}

// ---- 4 -------------------------------------------------------------------

Outcome oracle_dsg(const Context& ctx) {
  const auto grid = default_scaling_grid();
  std::map<std::string, std::pair<int, int>> tally;  // family -> (zero, total)
  auto check = [&](const std::string& family, const std::vector<ChemicalSystem>& stable,
                   const BondRuleSet& rules) {
    const auto oracle = OracleParams::from_rules(rules);
    const auto predict = oracle_predictor(oracle, rules);
    std::vector<int> zero(stable.size(), 0);
    run_parallel(static_cast<int>(stable.size()), ctx.workers,
                 [&](int i) { zero[i] = dsg_search(predict, stable[i], grid).dsg == 0.0; });
    auto& t = tally[family];
    t.first += std::accumulate(zero.begin(), zero.end(), 0);
    t.second += static_cast<int>(stable.size());
  };
  const auto crystals = BondRuleSet::crystals();
  std::vector<ChemicalSystem> pc, cg;
  for (const std::string el : {"Al", "Cu"}) {
    for (int n = 1; n <= 3; ++n) pc.push_back(gen_fcc_lattice(el, n, default_lattice_constant(el)));
  }
  for (std::uint64_t i = 0; i < 2; ++i) {
    GrowthConfig g;
    g.element = i == 0 ? "Al" : "Cu";
    g.lattice_constant = default_lattice_constant(g.element);
    g.seed = derive_seed(88, i);
    for (auto& s : gen_crystal_growth(g)) cg.push_back(std::move(s));
  }
  check("PC", pc, crystals);
  check("CG/UCG", cg, crystals);
  MoleculeConfig mc;
  mc.count = 1000;
  mc.seed = 99;
  const auto molecules = BondRuleSet::molecules();
  check("molecules", gen_synthetic_molecules(mc, molecules), molecules);
  OracleParams lr = OracleParams::from_rules(crystals);
  lr.long_range = true;
  lr.c6 = 5.0;
  {
    std::vector<int> zero(cg.size(), 0);
    const auto predict = oracle_predictor(lr, crystals);
    run_parallel(static_cast<int>(cg.size()), ctx.workers,
                 [&](int i) { zero[i] = dsg_search(predict, cg[i], grid).dsg == 0.0; });
    tally["CG long-range"] = {std::accumulate(zero.begin(), zero.end(), 0),
                              static_cast<int>(cg.size())};
  }
  bool pass = true;
  std::string detail;
  for (const auto& [family, t] : tally) {
    pass = pass && t.first == t.second && t.second > 0;
    detail += (detail.empty() ? "" : ", ") + family + " " + std::to_string(t.first) + "/" +
              std::to_string(t.second);
  }
  return {pass, "DSG = 0: " + detail};
}

// ---- 5 -------------------------------------------------------------------

Outcome parameter_accounting(const Context&) {
  std::vector<std::string> problems;
  auto added = [](ModelConfig cfg, Specialisation s) {
    cfg.specialisation = s;
    return EnergyModel(cfg).count_params();
  };
  // Closed forms on both catalogues and both backbones.
  for (const auto& rules : {BondRuleSet::molecules(), BondRuleSet::crystals()}) {
    for (auto b : {BackboneKind::kMpnn, BackboneKind::kSchnet}) {
      const ModelConfig cfg = default_config(b, rules);
      const std::int64_t r = static_cast<std::int64_t>(rules.relations().size());
      const std::int64_t d = cfg.state_size;
      if (added(cfg, Specialisation::kWeightScalar).specialisation != r) {
        problems.push_back(to_string(b) + " scalar != |R|");
      }
      if (added(cfg, Specialisation::kWeightVector).specialisation != r * d) {
        problems.push_back(to_string(b) + " vector != |R| d");
      }
    }
  }
  // Tier ordering with the default molecule catalogue.
  const auto rules = BondRuleSet::molecules();
  const ModelConfig mp = default_config(BackboneKind::kMpnn, rules);
  std::map<Specialisation, double> pct;
  for (auto s : {Specialisation::kMessage, Specialisation::kUpdateSeparate,
                 Specialisation::kUpdateConcat, Specialisation::kUpdateShared,
                 Specialisation::kWeightVector, Specialisation::kWeightScalar}) {
    pct[s] = added(mp, s).specialisation_percent();
  }
  const bool mpnn_order = pct[Specialisation::kMessage] > pct[Specialisation::kUpdateSeparate] &&
                          pct[Specialisation::kUpdateSeparate] > pct[Specialisation::kUpdateConcat] &&
                          pct[Specialisation::kUpdateConcat] > pct[Specialisation::kUpdateShared] &&
                          pct[Specialisation::kUpdateShared] > pct[Specialisation::kWeightVector] &&
                          pct[Specialisation::kWeightVector] > pct[Specialisation::kWeightScalar];
  const bool mpnn_gaps = pct[Specialisation::kMessage] >= 10 * pct[Specialisation::kUpdateSeparate] &&
                         pct[Specialisation::kUpdateShared] >= 10 * pct[Specialisation::kWeightVector];
  if (!mpnn_order) problems.push_back("MPNN ordering");
  if (!mpnn_gaps) problems.push_back("MPNN message >> updates >> weighting");

  const ModelConfig sn = default_config(BackboneKind::kSchnet, rules);
  const double s_msg = added(sn, Specialisation::kMessage).specialisation_percent();
  const double s_upd = added(sn, Specialisation::kUpdateSeparate).specialisation_percent();
  const double s_vec = added(sn, Specialisation::kWeightVector).specialisation_percent();
  const double s_sca = added(sn, Specialisation::kWeightScalar).specialisation_percent();
  if (!(s_msg >= 10 * s_vec && s_upd >= 10 * s_vec && s_vec > s_sca)) {
    problems.push_back("SchNet ordering");
  }
  // Specialised kernels mirror the generic ones when the filter input width
  // equals the state width.
  ModelConfig mirror = sn;
  mirror.rbf.count = mirror.state_size;
  const auto e6 = added(mirror, Specialisation::kMessage).specialisation;
  const auto e9 = added(mirror, Specialisation::kUpdateSeparate).specialisation;
  if (e6 != e9) problems.push_back("SchNet message != update when mirrored");

  std::string detail =
      "MPNN +%: msg " + fmt("%.2f", pct[Specialisation::kMessage]) + ", impl1 " +
      fmt("%.2f", pct[Specialisation::kUpdateSeparate]) + ", impl2 " +
      fmt("%.2f", pct[Specialisation::kUpdateConcat]) + ", impl3 " +
      fmt("%.2f", pct[Specialisation::kUpdateShared]) + ", vec " +
      fmt("%.2e", pct[Specialisation::kWeightVector]) + ", scalar " +
      fmt("%.2e", pct[Specialisation::kWeightScalar]) + "; SchNet +%: msg " + fmt("%.2f", s_msg) +
      ", update " + fmt("%.2f", s_upd) + ", vec " + fmt("%.2f", s_vec) + ", scalar " +
      fmt("%.2e", s_sca) + "; mirrored SchNet message = update = " + std::to_string(e6);
  for (const auto& p : problems) detail += "; FAILED " + p;
  return {problems.empty(), detail};
}

// ---- 6-8 -----------------------------------------------------------------

// ---- 6 to 8 --------------------------------------------------------------

// Grown Al and Cu crystals of 15..75 atoms, each swept over the scaling grid.
// Every size up to `dense_until` is kept, then every `stride`-th one.
ExperimentData ucg_style(int growth_seeds, int stride, int dense_until, std::uint64_t seed) {
  ExperimentData data;
  data.rules = BondRuleSet::crystals();
  data.grid = default_scaling_grid();
  const auto oracle = OracleParams::from_rules(data.rules);
  const std::vector<std::string> elements{"Al", "Cu"};
  for (std::size_t i = 0; i < elements.size(); ++i) {
    GrowthConfig g;
    g.element = elements[i];
    g.lattice_constant = default_lattice_constant(g.element);
    g.num_seeds = growth_seeds;
    g.min_size = 15;
    g.max_size = 75;
    g.seed = derive_seed(seed, i);
    for (const auto& s : gen_crystal_growth(g)) {
      const int n = static_cast<int>(s.size());
      if (n > dense_until && (n - g.min_size) % stride != 0) continue;
      for (auto& x : apply_scaling_sweep(s, data.grid, oracle, data.rules)) {
        data.systems.push_back(std::move(x));
      }
    }
  }
  data.split = split_dataset(data.systems, {0.7, 0.15, 0.15}, derive_seed(seed, 100),
                             Stratify::kSystemIdentity);
  return data;
}

// Base and fully augmented variants of one backbone at reduced width.
std::vector<Variant> base_and_augmented(BackboneKind b, const BondRuleSet& rules, int epochs) {
  TrainConfig base;
  base.model = default_config(b, rules);
  base.model.state_size = 16;
  if (b == BackboneKind::kMpnn) {
    base.model.edge_hidden = 16;
    base.model.readout_hidden = 16;
  } else {
    base.model.rbf.count = 32;
  }
  base.max_epochs = epochs;
  base.patience = 30;
  TrainConfig aug = base;
  aug.model.specialisation =
      b == BackboneKind::kMpnn ? Specialisation::kUpdateConcat : Specialisation::kWeightScalar;
  aug.model.aux_tasks = kAllTasks;
  aug.loss.tasks = kAllTasks;
  const std::string name = b == BackboneKind::kMpnn ? "MPNN" : "SchNet";
  return {{name, base}, {"Augm.-" + name, aug}};
}

const std::vector<std::uint64_t> kTrainSeeds{101, 102, 103};

double relative_gain(double base, double aug) { return base > 0.0 ? (base - aug) / base : 0.0; }

Outcome directional_reproduction(const Context& ctx) {
  const ExperimentData data = ucg_style(5, 10, 0, 606);
  std::vector<VariantRun> all;
  bool pass = true;
  std::string detail = std::to_string(data.systems.size()) + " systems;";
  for (BackboneKind b : {BackboneKind::kMpnn, BackboneKind::kSchnet}) {
    const int epochs = b == BackboneKind::kMpnn ? 150 : 40;
    const auto variants = base_and_augmented(b, data.rules, epochs);
    const auto runs = compare_variants(variants, data, kTrainSeeds, ctx.workers);
    all.insert(all.end(), runs.begin(), runs.end());
    double ae[2] = {0, 0}, dsg[2] = {0, 0};
    for (const auto& r : runs) {
      const int k = r.variant == variants[0].name ? 0 : 1;
      ae[k] += r.metrics.ae.mean / kTrainSeeds.size();
      dsg[k] += r.metrics.dsg.mean / kTrainSeeds.size();
    }
    const double gain = std::max(relative_gain(ae[0], ae[1]), relative_gain(dsg[0], dsg[1]));
    const bool ok = ae[1] <= ae[0] && dsg[1] <= dsg[0] && gain >= 0.2;
    pass = pass && ok;
    detail += " " + variants[0].name + " AE " + fmt("%.4g -> %.4g", ae[0], ae[1]) + " DSG " +
              fmt("%.4g -> %.4g", dsg[0], dsg[1]) + " best gain " + fmt("%.0f%%", 100 * gain) +
              (ok ? "" : " (miss)") + ";";
  }
  write_variant_csv(ctx.out / "c6" / "variants.csv", all);
  return {pass, detail + " -> " + (ctx.out / "c6" / "variants.csv").string()};
}

Outcome size_generalisation(const Context& ctx) {
  const ExperimentData data = ucg_style(5, 5, 25, 707);
  const auto variants = base_and_augmented(BackboneKind::kMpnn, data.rules, 150);
  const auto result = size_generalization(variants, data, kTrainSeeds, 25, false, ctx.workers);
  write_size_gen_csv(ctx.out / "c7" / "size_gen_table.csv", ctx.out / "c7" / "size_gen_summary.csv",
                     result);
  std::map<std::uint64_t, std::map<std::string, double>> by_seed;
  for (const auto& s : result.summary) {
    if (s.capped) by_seed[s.seed][s.variant] = s.pearson;
  }
  int wins = 0;
  std::string detail;
  for (const auto& [seed, p] : by_seed) {
    const double base = p.at(variants[0].name), aug = p.at(variants[1].name);
    wins += aug <= base;
    detail += " seed " + std::to_string(seed) + " r " + fmt("%.3f vs %.3f", aug, base) + ";";
  }
  const bool emitted = by_seed.size() == kTrainSeeds.size();
  const bool pass = emitted && 3 * wins >= 2 * static_cast<int>(kTrainSeeds.size());
  return {pass, "augmented <= base Pearson in " + std::to_string(wins) + "/" +
                    std::to_string(kTrainSeeds.size()) + " seeds (aug vs base):" + detail};
}

Outcome reduced_scalings(const Context& ctx) {
  ExperimentData data;
  data.rules = BondRuleSet::molecules();
  data.grid = default_scaling_grid();
  MoleculeConfig mc;
  mc.count = 200;
  mc.min_size = 3;
  mc.max_size = 12;
  mc.seed = 808;
  const auto oracle = OracleParams::from_rules(data.rules);
  for (const auto& s : gen_synthetic_molecules(mc, data.rules)) {
    for (auto& x : apply_scaling_sweep(s, data.grid, oracle, data.rules)) {
      data.systems.push_back(std::move(x));
    }
  }
  data.split = split_dataset(data.systems, {0.7, 0.15, 0.15}, derive_seed(808, 100),
                             Stratify::kSystemIdentity);
  const auto variants = base_and_augmented(BackboneKind::kMpnn, data.rules, 100);
  const std::vector<int> points{13, 9, 5, 3};
  std::vector<double> fractions;
  for (int k : points) fractions.push_back(k / 13.0);
  const auto rows =
      reduced_training(variants, data, fractions, ReduceAxis::kScalings, kTrainSeeds, ctx.workers);
  write_reduced_csv(ctx.out / "c8" / "reduced.csv", rows);

  // degradation[seed][variant] = DSG at 3 points minus DSG at 13 points
  std::map<std::uint64_t, std::map<std::string, std::vector<const ReducedRow*>>> table;
  for (const auto& r : rows) table[r.seed][r.variant].push_back(&r);
  bool monotone = table.size() == kTrainSeeds.size();
  int wins = 0;
  std::string detail;
  for (const auto& [seed, per_variant] : table) {
    double degradation[2] = {0, 0};
    for (int k = 0; k < 2; ++k) {
      const auto& v = per_variant.at(variants[k].name);
      monotone = monotone && v.size() == points.size();
      for (std::size_t i = 0; monotone && i < v.size(); ++i) {
        monotone = v[i]->points == points[i] &&
                   (i == 0 || v[i]->train_systems < v[i - 1]->train_systems);
      }
      if (monotone) degradation[k] = v.back()->dsg_mean - v.front()->dsg_mean;
    }
    wins += degradation[1] <= degradation[0];
    detail += " seed " + std::to_string(seed) + " " +
              fmt("%.3f vs %.3f", degradation[1], degradation[0]) + ";";
  }
  const bool pass = monotone && 3 * wins >= 2 * static_cast<int>(kTrainSeeds.size());
  return {pass, std::string("schedule 13/9/5/3 ") + (monotone ? "monotone" : "NOT MONOTONE") +
                    "; augmented DSG degradation <= base in " + std::to_string(wins) + "/" +
                    std::to_string(kTrainSeeds.size()) + " seeds (aug vs base):" + detail};
}

// ---- 9 -------------------------------------------------------------------

Outcome contribution_bookkeeping(const Context& ctx) {
  const auto rules = BondRuleSet::crystals();
  const auto grid = default_scaling_grid();
  const auto oracle = OracleParams::from_rules(rules);
  std::vector<ChemicalSystem> systems;
  for (std::uint64_t i = 0; i < 2; ++i) {
    GrowthConfig g;
    g.element = i == 0 ? "Al" : "Cu";
    g.lattice_constant = default_lattice_constant(g.element);
    g.num_seeds = 2;
    g.min_size = 15;
    g.max_size = 24;
    g.seed = derive_seed(909, i);
    for (const auto& s : gen_crystal_growth(g)) {
      for (auto& x : apply_scaling_sweep(s, grid, oracle, rules)) systems.push_back(std::move(x));
    }
  }
  const Split split =
      split_dataset(systems, {0.7, 0.15, 0.15}, 9, Stratify::kSystemIdentity);
  auto pick = [&](const std::vector<int>& idx) {
    std::vector<ChemicalSystem> v;
    for (int i : idx) v.push_back(systems[i]);
    return v;
  };
  TrainConfig tc;
  tc.model = ModelConfig::schnet(rules.elements(), rules.relations());
  tc.model.specialisation = Specialisation::kWeightScalar;
  tc.model.aux_tasks = kAllTasks;
  tc.model.state_size = 16;
  tc.model.rbf.count = 16;
  tc.loss.tasks = kAllTasks;
  tc.max_epochs = 5;
  tc.seed = 9;
  const auto result = train(tc, pick(split.train), pick(split.val), rules, grid);

  double worst = 0.0;
  std::vector<double> diffs(systems.size(), 0.0);
  run_parallel(static_cast<int>(systems.size()), ctx.workers, [&](int i) {
    const auto c = atom_contributions(result.model, systems[i], rules);
    const double sum = std::accumulate(c.raw.begin(), c.raw.end(), 0.0);
    const double e = result.model.predict(result.model.graph(systems[i], rules));
    diffs[i] = std::max(std::abs(sum - e), std::abs(c.energy - e));
  });
  worst = *std::max_element(diffs.begin(), diffs.end());

  std::vector<double> lambdas;
  for (int k = 0; k <= 12; ++k) lambdas.push_back(0.8 + 0.05 * k);
  const auto rows = moving_atom_sweep(result.model, rules, "Al", lambdas);
  const fs::path csv = ctx.out / "c9" / "sweep.csv";
  write_sweep_csv(csv, rows);
  bool well_formed = rows.size() == lambdas.size();
  for (std::size_t i = 0; i < rows.size() && well_formed; ++i) {
    const auto& r = rows[i];
    well_formed = std::isfinite(r.energy) && std::isfinite(r.displacement) && r.c_moving &&
                  r.c_static_mean && std::isfinite(*r.c_moving) && std::isfinite(*r.c_static_mean);
    if (i > 0) well_formed = well_formed && r.displacement > rows[i - 1].displacement;
  }
  std::istringstream lines(read_text(csv));
  std::string header;
  std::getline(lines, header);
  int data_lines = 0;
  for (std::string line; std::getline(lines, line);) data_lines += !line.empty();
  well_formed = well_formed && header == "lambda,displacement,energy,c_moving,c_static_mean" &&
                data_lines == static_cast<int>(rows.size());
  const bool pass = worst <= 1e-10 && well_formed;
  return {pass, std::to_string(systems.size()) + " systems, max |sum c - E| " +
                    fmt("%.2e", worst) + " (tol 1e-10); sweep " + std::to_string(rows.size()) +
                    " rows " + (well_formed ? "well-formed" : "MALFORMED") + " -> " +
                    csv.string()};
}

// ---- 10 ------------------------------------------------------------------

Outcome determinism(const Context& ctx) {
  const fs::path dir = ctx.out / "c10";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_text(dir / "train.json", R"({
  "schema": "dignn-train/1",
  "data": {"dataset": "data.json", "fractions": [0.6, 0.2, 0.2]},
  "train": {"model": {"backbone": "mpnn", "specialisation": "update-concat", "state_size": 8,
                      "edge_hidden": 8, "readout_hidden": 8, "depth": 2,
                      "aux_tasks": ["atoms", "orbitals", "scaling"]},
            "max_epochs": 3, "batch_size": 8}
})");
  const std::string data = (dir / "data.json").string();
  const std::vector<std::vector<std::string>> commands{
      {"gen", "--family", "ucg", "--elements", "Al,Cu", "--seeds", "1", "--max-size", "22", "--out",
       data},
      {"train", "--config", (dir / "train.json").string(), "--out", (dir / "run").string()},
      {"eval", "--checkpoint", (dir / "run" / "checkpoint.json").string(), "--dataset", data,
       "--out", (dir / "eval").string()},
  };
  auto run_all = [&](const std::string& workers) -> std::map<std::string, std::string> {
    for (auto args : commands) {
      args.insert(args.end(), {"--seed", "31", "--workers", workers});
      std::ostringstream out, err;
      if (run_command(args, out, err) != 0) throw std::runtime_error(args[0] + ": " + err.str());
    }
    std::map<std::string, std::string> hashes;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
      if (!entry.is_regular_file()) continue;
      const auto rel = fs::relative(entry.path(), dir).string();
      if (rel.find("manifest") != std::string::npos) {
        json m = json::parse(read_text(entry.path()));
        m.erase("started_at");
        m.erase("wall_time_s");
        hashes[rel] = m.dump();
      } else {
        hashes[rel] = sha256_file(entry.path());
      }
    }
    return hashes;
  };
  const std::string workers = std::to_string(ctx.workers);
  const auto first = run_all(workers);
  const auto second = run_all(workers);
  // Outputs other than the manifests (which echo argv) must not depend on
  // the worker count either.
  const auto third = run_all(std::to_string(ctx.workers == 1 ? 2 : 1));
  int differing = 0, worker_dependent = 0;
  std::string which;
  for (const auto& [name, h] : first) {
    const auto it = second.find(name);
    if (it == second.end() || it->second != h) {
      ++differing;
      which += " " + name;
    }
    if (name.find("manifest") == std::string::npos && third.at(name) != h) {
      ++worker_dependent;
      which += " " + name + "(workers)";
    }
  }
  const bool pass = differing == 0 && worker_dependent == 0 && first.size() == second.size() &&
                    first.size() >= 10;
  return {pass, std::to_string(first.size()) + " gen/train/eval artifacts, " +
                    std::to_string(differing) + " differ on repeat, " +
                    std::to_string(worker_dependent) + " differ across worker counts" + which};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dignn acceptance suite"};
  Context ctx;
  std::string out = (fs::temp_directory_path() / "dignn_acceptance").string();
  std::vector<int> selected;
  app.add_option("--out", out, "Artifact directory")->capture_default_str();
  app.add_option("--workers", ctx.workers)->capture_default_str();
  app.add_option("criteria", selected, "Criterion numbers to run (default: all)");
  CLI11_PARSE(app, argc, argv);
  ctx.out = out;
  fs::create_directories(ctx.out);

  const std::vector<std::pair<std::string, std::function<Outcome(const Context&)>>> criteria{
      {"reduction suite", reduction_suite},
      {"gradient suite", gradient_suite},
      {"generator cardinalities", generator_cardinalities},
      {"oracle/DSG consistency", oracle_dsg},
      {"parameter-count accounting", parameter_accounting},
      {"augmented beats base", directional_reproduction},
      {"size generalisation protocol", size_generalisation},
      {"reduced scalings protocol", reduced_scalings},
      {"contribution bookkeeping", contribution_bookkeeping},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!selected.empty() && std::find(selected.begin(), selected.end(), id) == selected.end()) {
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << criteria[i].first << ": "
              << o.detail << " (" << fmt("%.1f", secs) << " s)" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
