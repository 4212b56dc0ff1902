// Copyright 2026 The dignn Authors. Apache 2.0 License.
//
// Training with early stopping, metrics (AE, RE, DSG), stable-geometry
// search, per-atom contributions and the experiment protocols built on them.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dignn/datagen.hpp"
#include "dignn/model.hpp"
#include "dignn/optimizer.hpp"

namespace dignn {

// Runs fn(0) .. fn(count - 1) on up to `workers` threads. Exceptions are
// rethrown (the one from the lowest index) after all tasks finish.
void run_parallel(int count, int workers, const std::function<void(int)>& fn);

// ---- training ------------------------------------------------------------

struct TrainConfig {
  ModelConfig model;
  LossConfig loss;
  OptimizerConfig optimizer{OptimizerConfig::Rule::kAdam, 1e-3};
  double lr_decay = 1.0;  // learning rate multiplier applied after each epoch
  int batch_size = 16;
  int patience = 50;
  int max_epochs = 500;
  double min_delta = 1e-6;  // smaller validation improvements count as none
  std::uint64_t seed = 0;
  // Set the energy readout buffers and aux loss scales from training data.
  bool normalise = true;

  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

struct EpochLog {
  int epoch = 0;
  double loss_total = 0.0;
  double loss_energy = 0.0;
  double loss_atoms = 0.0;
  double loss_orbitals = 0.0;
  double loss_dsg = 0.0;
  double val_loss = 0.0;
};

struct TrainResult {
  EnergyModel model;     // best-validation parameters
  LossConfig loss;       // with the scales actually used
  std::vector<EpochLog> log;
  int best_epoch = 0;
  double best_val = 0.0;
};

// Deterministic given config.seed. The model's init seed is derived from it.
TrainResult train(const TrainConfig& config, const std::vector<ChemicalSystem>& train_set,
                  const std::vector<ChemicalSystem>& val_set, const BondRuleSet& rules,
                  const std::vector<double>& grid);

void write_training_log(const std::filesystem::path& path, const std::vector<EpochLog>& log);

// ---- metrics -------------------------------------------------------------

struct Aggregate {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation
  int count = 0;
};
Aggregate aggregate(const std::vector<double>& values);

struct SystemMetrics {
  std::string geometry_id;
  int size = 0;
  double scaling = 1.0;
  double y = 0.0;
  double y_hat = 0.0;
  double ae = 0.0;
  std::optional<double> re;  // undefined when y == 0
};

struct DsgRecord {
  std::string geometry_id;
  int size = 0;
  double lambda_star = 1.0;
  double dsg = 0.0;
};

struct MetricsReport {
  std::vector<SystemMetrics> systems;
  std::vector<DsgRecord> geometries;
  Aggregate ae;
  Aggregate re;
  Aggregate dsg;
  int re_excluded = 0;
};

using Predictor = std::function<double(const ChemicalSystem&)>;

Predictor model_predictor(const EnergyModel& model, const BondRuleSet& rules);
Predictor oracle_predictor(const OracleParams& oracle, const BondRuleSet& rules);

struct DsgResult {
  double lambda_star = 1.0;
  double dsg = 0.0;
  std::vector<double> energies;  // per grid point
};

// Grid argmin of predicted energy over scaled copies of `stable`. Ties go
// to the value closest to 1, then to the lower one.
DsgResult dsg_search(const Predictor& predict, const ChemicalSystem& stable,
                     const std::vector<double>& grid);

// AE and RE per system; DSG once per stable geometry present in `systems`.
MetricsReport evaluate(const Predictor& predict, const std::vector<ChemicalSystem>& systems,
                       const std::vector<double>& grid, int workers = 1);

void write_metrics_csv(const std::filesystem::path& path, const MetricsReport& report);
void write_dsg_csv(const std::filesystem::path& path, const MetricsReport& report);
nlohmann::json summary_json(const MetricsReport& report);

// ---- contributions --------------------------------------------------------

struct Contributions {
  std::vector<double> raw;
  std::optional<std::vector<double>> normalised;  // unset when |sum| <= 1e-12
  double energy = 0.0;
};
Contributions atom_contributions(const EnergyModel& model, const ChemicalSystem& system,
                                 const BondRuleSet& rules);

struct SweepRow {
  double lambda = 1.0;        // bond length multiplier of the moving atom
  double displacement = 0.0;  // signed, angstrom
  double energy = 0.0;
  std::optional<double> c_moving;
  std::optional<double> c_static_mean;
};

// Moves one corner atom of the 14-atom fcc seed along the bond to its
// face-centred neighbour so that the bond length is lambda * r_nn.
std::vector<SweepRow> moving_atom_sweep(const EnergyModel& model, const BondRuleSet& rules,
                                        const std::string& element,
                                        const std::vector<double>& lambdas);
void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);

// Energy of every scaled copy of one stable geometry, predicted and true.
struct ScanRow {
  double lambda = 1.0;
  double predicted = 0.0;
  std::optional<double> truth;
};
std::vector<ScanRow> energy_scan(const Predictor& predict, const ChemicalSystem& stable,
                                 const std::vector<double>& grid,
                                 const Predictor* truth = nullptr);
void write_scan_csv(const std::filesystem::path& path, const std::vector<ScanRow>& rows);

// ---- experiments ----------------------------------------------------------

// Returns 0 when either variable is constant.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

struct ExperimentData {
  std::vector<ChemicalSystem> systems;
  BondRuleSet rules;
  std::vector<double> grid;
  Split split;
};

struct Variant {
  std::string name;
  TrainConfig config;
};

struct VariantRun {
  std::string variant;
  std::uint64_t seed = 0;
  MetricsReport metrics;
  ParamCounts params;
  double alpha = 1.0;
  int epochs = 0;
};

// Trains every variant with every seed on the split and evaluates on its
// test part.
std::vector<VariantRun> compare_variants(const std::vector<Variant>& variants,
                                         const ExperimentData& data,
                                         const std::vector<std::uint64_t>& seeds, int workers = 1);
void write_variant_csv(const std::filesystem::path& path, const std::vector<VariantRun>& runs);

struct SizeGenRow {
  std::string variant;
  std::uint64_t seed = 0;
  bool capped = true;
  int size = 0;
  double ae_mean = 0.0;
  int count = 0;
};
struct SizeGenSummary {
  std::string variant;
  std::uint64_t seed = 0;
  bool capped = true;
  double pearson = 0.0;
  double ae_mean = 0.0;
};
struct SizeGenResult {
  std::vector<SizeGenRow> table;
  std::vector<SizeGenSummary> summary;
};

// Trains with training/validation systems capped at `cap` atoms (and, when
// include_uncapped, without the cap) and evaluates on the unchanged test set.
SizeGenResult size_generalization(const std::vector<Variant>& variants, const ExperimentData& data,
                                  const std::vector<std::uint64_t>& seeds, int cap = 25,
                                  bool include_uncapped = true, int workers = 1);
void write_size_gen_csv(const std::filesystem::path& table, const std::filesystem::path& summary,
                        const SizeGenResult& result);

enum class ReduceAxis { kSystems, kScalings };
std::string to_string(ReduceAxis a);
ReduceAxis parse_reduce_axis(const std::string& s);

// k grid indices spread evenly over the grid, with the one closest to
// lambda = 1 replaced by lambda = 1 itself.
std::vector<int> reduced_scaling_indices(const std::vector<double>& grid, int k);

// Indices of `subset` that survive the reduction at `fraction`.
std::vector<int> reduce_subset(const std::vector<ChemicalSystem>& systems,
                               const std::vector<int>& subset, const std::vector<double>& grid,
                               double fraction, ReduceAxis axis, std::uint64_t seed);

struct ReducedRow {
  std::string variant;
  std::uint64_t seed = 0;
  double fraction = 1.0;
  int points = 0;         // scalings per geometry (scalings axis) or geometries kept
  int train_systems = 0;
  double ae_mean = 0.0;
  double dsg_mean = 0.0;
};
std::vector<ReducedRow> reduced_training(const std::vector<Variant>& variants,
                                         const ExperimentData& data,
                                         const std::vector<double>& fractions, ReduceAxis axis,
                                         const std::vector<std::uint64_t>& seeds,
                                         int workers = 1);
void write_reduced_csv(const std::filesystem::path& path, const std::vector<ReducedRow>& rows);

struct AblationRow {
  std::string label;
  std::string subset;  // element subset the metrics are restricted to
  double ae_mean = 0.0;
  double ae_std = 0.0;
  double dsg_mean = 0.0;
  double dsg_std = 0.0;
  int systems = 0;
};

// The fully augmented variant and its leave-one-out relatives: without
// relation specialisation and without each auxiliary task.
std::vector<Variant> ablation_variants(const TrainConfig& full, bool include_base = false);

// Metrics per ablation variant, per element subset ("all" plus each
// single-element subset present in the test set).
std::vector<AblationRow> ablation(const TrainConfig& full, const ExperimentData& data,
                                  std::uint64_t seed, bool include_base = false, int workers = 1);
void write_ablation_csv(const std::filesystem::path& path, const std::vector<AblationRow>& rows);

}  // namespace dignn
