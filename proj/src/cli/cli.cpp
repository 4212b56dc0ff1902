// Copyright 2026 The dignn Authors. Apache 2.0 License.

#include "dignn/cli.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "dignn/datagen.hpp"
#include "dignn/dataset.hpp"
#include "dignn/errors.hpp"
#include "dignn/harness.hpp"
#include "dignn/json_util.hpp"

namespace dignn {

using nlohmann::json;
namespace fs = std::filesystem;

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path.string() + "'");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  }
  return os.str();
}

namespace {

constexpr const char* kGenSchema = "dignn-gen/1";
constexpr const char* kTrainSchema = "dignn-train/1";
constexpr const char* kExperimentSchema = "dignn-experiment/1";
constexpr const char* kManifestSchema = "dignn-manifest/1";

struct Globals {
  std::uint64_t seed = 0;
  int workers = 1;
};

// ---- manifests ----------------------------------------------------------

class Manifest {
 public:
  Manifest(std::string command, std::vector<std::string> args, const Globals& g)
      : command_(std::move(command)), args_(std::move(args)), seed_(g.seed),
        start_(std::chrono::steady_clock::now()) {
    const std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    started_ = stamp;
  }
  void input(const fs::path& p) { inputs_.push_back(p); }
  void output(const fs::path& p) { outputs_.push_back(p); }
  void config(json c) { config_ = std::move(c); }

  void write(const fs::path& path) const {
    auto hashes = [](const std::vector<fs::path>& paths) {
      json a = json::array();
      for (const auto& p : paths) a.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
      return a;
    };
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    const json m{{"schema", kManifestSchema},
                 {"tool_version", kToolVersion},
                 {"command", command_},
                 {"args", args_},
                 {"seed", seed_},
                 {"config", config_},
                 {"inputs", hashes(inputs_)},
                 {"outputs", hashes(outputs_)},
                 {"started_at", started_},
                 {"wall_time_s", wall}};
    write_text(path, m.dump(2) + "\n");
  }

 private:
  std::string command_;
  std::vector<std::string> args_;
  std::uint64_t seed_;
  std::chrono::steady_clock::time_point start_;
  std::string started_;
  json config_ = json::object();
  std::vector<fs::path> inputs_;
  std::vector<fs::path> outputs_;
};

// ---- config files ---------------------------------------------------------

json read_json_file(const fs::path& path) {
  if (!fs::exists(path)) throw UsageError("no such file '" + path.string() + "'");
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw UsageError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void require_schema(const json& j, const char* schema, const fs::path& path) {
  if (!j.is_object() || !j.contains("schema") || j["schema"] != schema) {
    throw UsageError("'" + path.string() + "' must declare \"schema\": \"" + schema + "\"");
  }
}

// Configuration problems found while reading user files are usage errors.
template <typename F>
auto as_usage(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
}

Dataset load_dataset_checked(const fs::path& path) {
  if (!fs::exists(path)) throw UsageError("no such file '" + path.string() + "'");
  return load_dataset(path);
}

std::vector<double> dataset_grid(const Dataset& d) {
  if (d.metadata.contains("grid")) return d.metadata["grid"].get<std::vector<double>>();
  return default_scaling_grid();
}

json oracle_to_json(double depth, double width, const OracleParams& p) {
  return {{"depth", depth},
          {"width", width},
          {"long_range", p.long_range},
          {"c6", p.c6},
          {"cutoff", p.cutoff}};
}

OracleParams dataset_oracle(const Dataset& d, const BondRuleSet& rules) {
  if (!d.metadata.contains("oracle")) return OracleParams::from_rules(rules);
  const json& o = d.metadata["oracle"];
  auto p = OracleParams::from_rules(rules, o.value("depth", 0.1), o.value("width", 1.5));
  p.long_range = o.value("long_range", false);
  p.c6 = o.value("c6", 0.0);
  p.cutoff = o.value("cutoff", 8.0);
  p.validate();
  return p;
}

struct DataConfig {
  fs::path dataset;
  std::array<double, 3> fractions{0.8, 0.1, 0.1};
  Stratify stratify = Stratify::kSystemIdentity;
  int bucket_width = 10;
  int max_size = 0;  // 0 keeps every system

  json to_json() const {
    return {{"dataset", dataset.string()},
            {"fractions", fractions},
            {"stratify", to_string(stratify)},
            {"bucket_width", bucket_width},
            {"max_size", max_size}};
  }
  static DataConfig from_json(const json& j, const fs::path& base) {
    require_known_keys(j, {"dataset", "fractions", "stratify", "bucket_width", "max_size"}, "data");
    DataConfig c;
    if (!j.contains("dataset")) throw UsageError("data: missing 'dataset'");
    c.dataset = j["dataset"].get<std::string>();
    if (c.dataset.is_relative()) c.dataset = base / c.dataset;
    c.fractions = get_or(j, "fractions", c.fractions);
    c.stratify = parse_stratify(get_or<std::string>(j, "stratify", to_string(c.stratify)));
    c.bucket_width = get_or(j, "bucket_width", c.bucket_width);
    c.max_size = get_or(j, "max_size", c.max_size);
    if (c.max_size < 0) throw UsageError("data: max_size must be >= 0");
    return c;
  }
};

ExperimentData load_experiment_data(const DataConfig& c, std::uint64_t seed, Manifest& manifest) {
  Dataset d = load_dataset_checked(c.dataset);
  manifest.input(c.dataset);
  ExperimentData e;
  e.rules = dataset_rules(d);
  e.grid = dataset_grid(d);
  for (auto& s : d.systems) {
    if (c.max_size == 0 || static_cast<int>(s.size()) <= c.max_size) e.systems.push_back(std::move(s));
  }
  if (e.systems.empty()) throw UsageError("no systems left in '" + c.dataset.string() + "'");
  e.split = as_usage([&] {
    return split_dataset(e.systems, c.fractions, derive_seed(seed, 100), c.stratify, c.bucket_width);
  });
  return e;
}

// Fills the catalogue and scaling-bin defaults from the dataset so that
// config files need not repeat them.
TrainConfig parse_train_config(json j, const ExperimentData& data, std::uint64_t seed) {
  if (!j.is_object()) throw UsageError("train: expected a JSON object");
  if (!j.contains("model")) throw UsageError("train: missing 'model'");
  json& m = j["model"];
  if (!m.is_object()) throw UsageError("model: expected a JSON object");
  if (!m.contains("elements")) m["elements"] = data.rules.elements();
  if (!m.contains("relations")) m["relations"] = data.rules.relations();
  if (!m.contains("scaling_bins")) m["scaling_bins"] = data.grid.size();
  if (m.contains("aux_tasks")) {
    if (!j.contains("loss")) j["loss"] = json::object();
    if (j["loss"].is_object() && !j["loss"].contains("tasks")) j["loss"]["tasks"] = m["aux_tasks"];
  }
  j["seed"] = seed;
  return as_usage([&] { return TrainConfig::from_json(j); });
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// ---- gen ------------------------------------------------------------------

struct GenConfig {
  std::string family;
  std::vector<std::string> elements;
  int seeds = 0;
  int min_size = 0;
  int max_size = 0;
  std::vector<int> reps{1, 2, 3};
  int count = 1000;
  bool scaling = true;
  double multiplier = 1.2;
  double depth = 0.1;
  double width = 1.5;
  bool long_range = false;
  double c6 = 0.0;
  double cutoff = 8.0;

  void apply_family_defaults() {
    const bool mol = family == "mol";
    if (elements.empty()) {
      elements = mol ? std::vector<std::string>{"H", "C", "N", "O"}
                     : std::vector<std::string>{"Al", "Cu"};
    }
    if (seeds == 0) seeds = family == "ucg" ? 5 : 20;
    if (min_size == 0) min_size = mol ? 2 : 15;
    if (max_size == 0) max_size = mol ? 12 : 114;
  }

  json to_json() const {
    return {{"schema", kGenSchema},   {"family", family},       {"elements", elements},
            {"seeds", seeds},         {"min_size", min_size},   {"max_size", max_size},
            {"reps", reps},           {"count", count},         {"scaling", scaling},
            {"multiplier", multiplier},
            {"oracle",
             {{"depth", depth}, {"width", width}, {"long_range", long_range}, {"c6", c6},
              {"cutoff", cutoff}}}};
  }

  void merge_json(const json& j) {
    require_known_keys(j,
                       {"schema", "family", "elements", "seeds", "min_size", "max_size", "reps",
                        "count", "scaling", "multiplier", "oracle"},
                       "gen");
    family = get_or(j, "family", family);
    elements = get_or(j, "elements", elements);
    seeds = get_or(j, "seeds", seeds);
    min_size = get_or(j, "min_size", min_size);
    max_size = get_or(j, "max_size", max_size);
    reps = get_or(j, "reps", reps);
    count = get_or(j, "count", count);
    scaling = get_or(j, "scaling", scaling);
    multiplier = get_or(j, "multiplier", multiplier);
    if (j.contains("oracle")) {
      const json& o = j["oracle"];
      require_known_keys(o, {"depth", "width", "long_range", "c6", "cutoff"}, "gen.oracle");
      depth = get_or(o, "depth", depth);
      width = get_or(o, "width", width);
      long_range = get_or(o, "long_range", long_range);
      c6 = get_or(o, "c6", c6);
      cutoff = get_or(o, "cutoff", cutoff);
    }
  }
};

Dataset generate(const GenConfig& c, std::uint64_t seed, int workers) {
  const bool mol = c.family == "mol";
  const BondRuleSet rules = mol ? BondRuleSet::molecules(c.multiplier)
                                : BondRuleSet::crystals(c.multiplier);
  for (const auto& e : c.elements) {
    if (rules.element_index(e) < 0) {
      throw UsageError("element '" + e + "' is not supported by the " + c.family + " family");
    }
  }
  OracleParams oracle = OracleParams::from_rules(rules, c.depth, c.width);
  oracle.long_range = c.long_range;
  oracle.c6 = c.c6;
  oracle.cutoff = c.cutoff;
  as_usage([&] { oracle.validate(); });
  const auto grid = default_scaling_grid();

  std::vector<ChemicalSystem> stable;
  std::vector<int> skipped;
  if (c.family == "pc") {
    for (const auto& e : c.elements) {
      for (int n : c.reps) {
        if (n < 1) throw UsageError("pc: reps must be >= 1");
        stable.push_back(gen_fcc_lattice(e, n, default_lattice_constant(e)));
      }
    }
  } else if (c.family == "cg" || c.family == "ucg") {
    for (std::size_t i = 0; i < c.elements.size(); ++i) {
      GrowthConfig g;
      g.element = c.elements[i];
      g.lattice_constant = default_lattice_constant(g.element);
      g.num_seeds = c.seeds;
      g.min_size = c.min_size;
      g.max_size = c.max_size;
      g.seed = derive_seed(seed, i);
      as_usage([&] { g.validate(); });
      for (auto& s : gen_crystal_growth(g)) {
        s.provenance.dataset = c.family;
        if (c.family == "ucg") s.provenance.geometry_id = "u" + s.provenance.geometry_id;
        stable.push_back(std::move(s));
      }
    }
  } else if (mol) {
    MoleculeConfig m;
    m.count = c.count;
    m.min_size = c.min_size;
    m.max_size = c.max_size;
    m.elements = c.elements;
    m.seed = seed;
    stable = gen_synthetic_molecules(m, rules, &skipped);
  } else {
    throw UsageError("unknown family '" + c.family + "' (expected pc, cg, ucg or mol)");
  }

  std::vector<std::vector<ChemicalSystem>> labelled(stable.size());
  run_parallel(static_cast<int>(stable.size()), workers, [&](int i) {
    if (c.scaling) {
      labelled[i] = apply_scaling_sweep(stable[i], grid, oracle, rules);
    } else {
      ChemicalSystem s = stable[i];
      s.scaling = 1.0;
      s.energy = oracle_energy(s, oracle, rules);
      labelled[i].push_back(std::move(s));
    }
  });
  Dataset d;
  for (auto& group : labelled) {
    for (auto& s : group) d.systems.push_back(std::move(s));
  }
  d.metadata = {{"generator", kGeneratorVersion},
                {"family", c.family},
                {"seed", seed},
                {"rules", rules_to_json(rules)},
                {"grid", grid},
                {"oracle", oracle_to_json(c.depth, c.width, oracle)},
                {"stable_geometries", stable.size()},
                {"skipped", skipped},
                {"config", c.to_json()}};
  return d;
}

// ---- shared output helpers -----------------------------------------------

fs::path prepare_out_dir(const std::string& out) {
  if (out.empty()) throw UsageError("--out is required");
  fs::create_directories(out);
  return out;
}

EnergyModel load_checkpoint_checked(const fs::path& path) {
  if (!fs::exists(path)) throw UsageError("no such file '" + path.string() + "'");
  return EnergyModel::load(path);
}

const ChemicalSystem& find_stable(const std::vector<ChemicalSystem>& systems, const std::string& id,
                                  ChemicalSystem& scratch) {
  const ChemicalSystem* any = nullptr;
  for (const auto& s : systems) {
    if (s.provenance.geometry_id != id) continue;
    if (std::abs(s.scale_or_one() - 1.0) <= 1e-12) return s;
    any = &s;
  }
  if (!any) throw UsageError("no system with geometry id '" + id + "'");
  scratch = scale_system(*any, 1.0 / any->scale_or_one());
  scratch.scaling = 1.0;
  return scratch;
}

std::vector<std::uint64_t> experiment_seeds(const json& j, std::uint64_t master) {
  if (j.contains("seeds")) return j["seeds"].get<std::vector<std::uint64_t>>();
  const int n = get_or(j, "num_seeds", 3);
  if (n < 1) throw UsageError("experiment: num_seeds must be >= 1");
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < n; ++i) seeds.push_back(derive_seed(master, 200 + i));
  return seeds;
}

std::vector<Variant> experiment_variants(const json& j, const ExperimentData& data,
                                         std::uint64_t seed) {
  if (!j.contains("variants") || !j["variants"].is_array() || j["variants"].empty()) {
    throw UsageError("experiment: 'variants' must be a non-empty array");
  }
  std::vector<Variant> out;
  for (const auto& v : j["variants"]) {
    require_known_keys(v, {"name", "train"}, "variant");
    if (!v.contains("name") || !v.contains("train")) {
      throw UsageError("variant: needs 'name' and 'train'");
    }
    out.push_back({v["name"].get<std::string>(), parse_train_config(v["train"], data, seed)});
  }
  return out;
}

void print_error(std::ostream& err, const std::string& kind, const std::string& message) {
  err << json{{"error", kind}, {"message", message}}.dump() << "\n";
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Domain-informed graph neural networks for potential energy estimation", "dignn"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Master seed; all randomness derives from it")
      ->capture_default_str();
  app.add_option("--workers", g.workers, "Worker threads")->capture_default_str()->check(
      CLI::PositiveNumber);
  app.set_version_flag("--version", kToolVersion);

  // gen
  GenConfig gen;
  std::string gen_config, gen_out, gen_elements, gen_reps;
  bool gen_scaling = false, gen_no_scaling = false;
  auto* gen_cmd = app.add_subcommand("gen", "Generate an oracle-labelled dataset");
  gen_cmd->add_option("--family", gen.family, "pc | cg | ucg | mol");
  gen_cmd->add_option("--config", gen_config, "JSON generator config (schema dignn-gen/1)");
  gen_cmd->add_option("--elements", gen_elements, "Comma-separated element list");
  gen_cmd->add_option("--seeds", gen.seeds, "Growths per element (cg, ucg)");
  gen_cmd->add_option("--min-size", gen.min_size);
  gen_cmd->add_option("--max-size", gen.max_size);
  gen_cmd->add_option("--reps", gen_reps, "Comma-separated cell repetitions (pc)");
  gen_cmd->add_option("--count", gen.count, "Number of molecules (mol)");
  gen_cmd->add_flag("--scaling", gen_scaling, "Apply the scaling sweep");
  gen_cmd->add_flag("--no-scaling", gen_no_scaling, "Emit stable geometries only");
  gen_cmd->add_option("--out", gen_out, "Dataset file")->required();

  // train
  std::string train_config, train_out;
  auto* train_cmd = app.add_subcommand("train", "Train a model variant");
  train_cmd->add_option("--config", train_config, "JSON train config (schema dignn-train/1)")
      ->required();
  train_cmd->add_option("--out", train_out, "Output directory")->required();

  // eval
  std::string eval_ckpt, eval_data, eval_out;
  bool eval_oracle = false;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
  eval_cmd->add_option("--checkpoint", eval_ckpt);
  eval_cmd->add_flag("--oracle", eval_oracle, "Use the dataset's analytic oracle as the model");
  eval_cmd->add_option("--dataset", eval_data)->required();
  eval_cmd->add_option("--out", eval_out, "Output directory")->required();

  // scan
  std::string scan_ckpt, scan_data, scan_system, scan_out;
  auto* scan_cmd = app.add_subcommand("scan", "Energy versus scaling for one stable geometry");
  scan_cmd->add_option("--checkpoint", scan_ckpt)->required();
  scan_cmd->add_option("--dataset", scan_data)->required();
  scan_cmd->add_option("--system", scan_system, "Geometry id")->required();
  scan_cmd->add_option("--out", scan_out, "Output directory")->required();

  // contrib
  std::string contrib_ckpt, contrib_scenario = "moving-atom", contrib_element = "Al",
                            contrib_data, contrib_system, contrib_out;
  auto* contrib_cmd = app.add_subcommand("contrib", "Per-atom energy contributions");
  contrib_cmd->add_option("--checkpoint", contrib_ckpt)->required();
  contrib_cmd->add_option("--scenario", contrib_scenario, "moving-atom | system")
      ->capture_default_str();
  contrib_cmd->add_option("--element", contrib_element, "Element of the moving-atom seed")
      ->capture_default_str();
  contrib_cmd->add_option("--dataset", contrib_data, "Dataset supplying bond rules and systems");
  contrib_cmd->add_option("--system", contrib_system, "Geometry id (system scenario)");
  contrib_cmd->add_option("--out", contrib_out, "Output directory")->required();

  // experiment
  std::string exp_kind, exp_config, exp_out;
  auto* exp_cmd = app.add_subcommand("experiment", "Run an experiment protocol");
  exp_cmd->add_option("kind", exp_kind, "size-gen | reduced | ablation")
      ->required()
      ->check(CLI::IsMember({"size-gen", "reduced", "ablation"}));
  exp_cmd->add_option("--config", exp_config, "JSON experiment config (schema dignn-experiment/1)")
      ->required();
  exp_cmd->add_option("--out", exp_out, "Output directory")->required();

  // replay
  std::string replay_manifest;
  auto* replay_cmd =
      app.add_subcommand("replay", "Re-run a manifest and verify its output hashes");
  replay_cmd->add_option("manifest", replay_manifest)->required();

  std::vector<std::string> argv_store{"dignn"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    print_error(err, "usage", e.what());
    return 2;
  }

  try {
    if (*gen_cmd) {
      if (!gen_config.empty()) {
        const fs::path p = gen_config;
        const json j = read_json_file(p);
        require_schema(j, kGenSchema, p);
        GenConfig file;
        file.merge_json(j);
        // Flags given on the command line win over the file.
        if (gen.family.empty()) gen.family = file.family;
        if (gen_elements.empty()) gen.elements = file.elements;
        if (gen_cmd->count("--seeds") == 0) gen.seeds = file.seeds;
        if (gen_cmd->count("--min-size") == 0) gen.min_size = file.min_size;
        if (gen_cmd->count("--max-size") == 0) gen.max_size = file.max_size;
        if (gen_reps.empty()) gen.reps = file.reps;
        if (gen_cmd->count("--count") == 0) gen.count = file.count;
        if (!gen_scaling && !gen_no_scaling) gen.scaling = file.scaling;
        gen.multiplier = file.multiplier;
        gen.depth = file.depth;
        gen.width = file.width;
        gen.long_range = file.long_range;
        gen.c6 = file.c6;
        gen.cutoff = file.cutoff;
      } else if (!gen_scaling && !gen_no_scaling) {
        gen.scaling = gen.family != "cg";
      }
      if (gen.family.empty()) throw UsageError("gen: --family is required");
      if (gen_scaling && gen_no_scaling) throw UsageError("gen: --scaling and --no-scaling conflict");
      if (gen_scaling) gen.scaling = true;
      if (gen_no_scaling) gen.scaling = false;
      if (!gen_elements.empty()) gen.elements = split_list(gen_elements);
      if (!gen_reps.empty()) {
        gen.reps.clear();
        for (const auto& r : split_list(gen_reps)) gen.reps.push_back(std::stoi(r));
      }
      gen.apply_family_defaults();
      Manifest m("gen", args, g);
      if (!gen_config.empty()) m.input(gen_config);
      m.config(gen.to_json());
      const Dataset d = generate(gen, g.seed, g.workers);
      save_dataset(gen_out, d);
      m.output(gen_out);
      m.write(gen_out + ".manifest.json");
      out << json{{"systems", d.systems.size()},
                  {"stable_geometries", d.metadata["stable_geometries"]},
                  {"out", gen_out}}
                 .dump()
          << "\n";
      return 0;
    }

    if (*train_cmd) {
      const fs::path cfg_path = train_config;
      const json j = read_json_file(cfg_path);
      require_schema(j, kTrainSchema, cfg_path);
      require_known_keys(j, {"schema", "data", "train"}, "train config");
      if (!j.contains("data") || !j.contains("train")) {
        throw UsageError("train config needs 'data' and 'train'");
      }
      Manifest m("train", args, g);
      m.input(cfg_path);
      const auto dc = DataConfig::from_json(j["data"], cfg_path.parent_path());
      const auto data = load_experiment_data(dc, g.seed, m);
      const auto tc = parse_train_config(j["train"], data, g.seed);
      m.config({{"data", dc.to_json()}, {"train", tc.to_json()}});
      auto pick = [&](const std::vector<int>& idx) {
        std::vector<ChemicalSystem> v;
        for (int i : idx) v.push_back(data.systems[i]);
        return v;
      };
      const auto result = train(tc, pick(data.split.train), pick(data.split.val), data.rules,
                                data.grid);
      const fs::path dir = prepare_out_dir(train_out);
      result.model.save(dir / "checkpoint.json");
      write_training_log(dir / "training_log.csv", result.log);
      const auto metrics =
          evaluate(model_predictor(result.model, data.rules), pick(data.split.test), data.grid,
                   g.workers);
      write_metrics_csv(dir / "test_metrics.csv", metrics);
      write_dsg_csv(dir / "test_dsg.csv", metrics);
      json summary = summary_json(metrics);
      summary["best_epoch"] = result.best_epoch;
      summary["epochs"] = result.log.size();
      summary["params"] = {{"base", result.model.count_params().base},
                           {"specialisation", result.model.count_params().specialisation},
                           {"mixing", result.model.count_params().mixing},
                           {"aux", result.model.count_params().aux}};
      write_text(dir / "summary.json", summary.dump(2) + "\n");
      for (const char* f : {"checkpoint.json", "training_log.csv", "test_metrics.csv",
                            "test_dsg.csv", "summary.json"}) {
        m.output(dir / f);
      }
      m.write(dir / "manifest.json");
      out << summary.dump() << "\n";
      return 0;
    }

    if (*eval_cmd) {
      if (eval_oracle == !eval_ckpt.empty()) {
        throw UsageError("eval: give exactly one of --checkpoint and --oracle");
      }
      Manifest m("eval", args, g);
      const Dataset d = load_dataset_checked(eval_data);
      m.input(eval_data);
      const auto rules = dataset_rules(d);
      const auto grid = dataset_grid(d);
      std::optional<EnergyModel> model;
      const OracleParams oracle = dataset_oracle(d, rules);
      Predictor predict;
      if (eval_oracle) {
        predict = oracle_predictor(oracle, rules);
      } else {
        model.emplace(load_checkpoint_checked(eval_ckpt));
        m.input(eval_ckpt);
        predict = model_predictor(*model, rules);
      }
      const auto report = evaluate(predict, d.systems, grid, g.workers);
      const fs::path dir = prepare_out_dir(eval_out);
      write_metrics_csv(dir / "metrics.csv", report);
      write_dsg_csv(dir / "dsg.csv", report);
      const json summary = summary_json(report);
      write_text(dir / "summary.json", summary.dump(2) + "\n");
      m.config({{"dataset", eval_data}, {"model", eval_oracle ? "oracle" : eval_ckpt}});
      for (const char* f : {"metrics.csv", "dsg.csv", "summary.json"}) m.output(dir / f);
      m.write(dir / "manifest.json");
      out << summary.dump() << "\n";
      return 0;
    }

    if (*scan_cmd) {
      Manifest m("scan", args, g);
      const auto model = load_checkpoint_checked(scan_ckpt);
      const Dataset d = load_dataset_checked(scan_data);
      m.input(scan_ckpt);
      m.input(scan_data);
      const auto rules = dataset_rules(d);
      const auto oracle = dataset_oracle(d, rules);
      ChemicalSystem scratch;
      const auto& stable = find_stable(d.systems, scan_system, scratch);
      const auto truth = oracle_predictor(oracle, rules);
      const auto rows = energy_scan(model_predictor(model, rules), stable, dataset_grid(d), &truth);
      const fs::path dir = prepare_out_dir(scan_out);
      write_scan_csv(dir / "scan.csv", rows);
      m.config({{"system", scan_system}});
      m.output(dir / "scan.csv");
      m.write(dir / "manifest.json");
      return 0;
    }

    if (*contrib_cmd) {
      Manifest m("contrib", args, g);
      const auto model = load_checkpoint_checked(contrib_ckpt);
      m.input(contrib_ckpt);
      std::optional<Dataset> d;
      if (!contrib_data.empty()) {
        d = load_dataset_checked(contrib_data);
        m.input(contrib_data);
      }
      const fs::path dir = prepare_out_dir(contrib_out);
      if (contrib_scenario == "moving-atom") {
        const auto rules = d ? dataset_rules(*d) : BondRuleSet::crystals();
        const auto rows = moving_atom_sweep(model, rules, contrib_element,
                                            d ? dataset_grid(*d) : default_scaling_grid());
        write_sweep_csv(dir / "sweep.csv", rows);
        m.output(dir / "sweep.csv");
      } else if (contrib_scenario == "system") {
        if (!d || contrib_system.empty()) {
          throw UsageError("contrib: the system scenario needs --dataset and --system");
        }
        const auto rules = dataset_rules(*d);
        ChemicalSystem scratch;
        const auto& s = find_stable(d->systems, contrib_system, scratch);
        const auto c = atom_contributions(model, s, rules);
        std::ostringstream os;
        os.precision(17);
        os << "atom,element,raw,normalised\n";
        for (std::size_t i = 0; i < c.raw.size(); ++i) {
          os << i << ',' << s.elements[i] << ',' << c.raw[i] << ',';
          if (c.normalised) os << (*c.normalised)[i];
          os << '\n';
        }
        write_text(dir / "contributions.csv", os.str());
        m.output(dir / "contributions.csv");
      } else {
        throw UsageError("contrib: unknown scenario '" + contrib_scenario +
                         "' (expected moving-atom or system)");
      }
      m.config({{"scenario", contrib_scenario}, {"element", contrib_element}});
      m.write(dir / "manifest.json");
      return 0;
    }

    if (*exp_cmd) {
      const fs::path cfg_path = exp_config;
      const json j = read_json_file(cfg_path);
      require_schema(j, kExperimentSchema, cfg_path);
      require_known_keys(j,
                         {"schema", "data", "variants", "full", "include_base", "seeds",
                          "num_seeds", "cap", "include_uncapped", "fractions", "points", "axis"},
                         "experiment");
      if (!j.contains("data")) throw UsageError("experiment: missing 'data'");
      Manifest m("experiment " + exp_kind, args, g);
      m.input(cfg_path);
      const auto dc = DataConfig::from_json(j["data"], cfg_path.parent_path());
      const auto data = load_experiment_data(dc, g.seed, m);
      const auto seeds = experiment_seeds(j, g.seed);
      const fs::path dir = prepare_out_dir(exp_out);
      json resolved{{"kind", exp_kind}, {"data", dc.to_json()}, {"seeds", seeds}};
      if (exp_kind == "size-gen") {
        const auto variants = experiment_variants(j, data, g.seed);
        const int cap = get_or(j, "cap", 25);
        const bool uncapped = get_or(j, "include_uncapped", true);
        const auto r = as_usage(
            [&] { return size_generalization(variants, data, seeds, cap, uncapped, g.workers); });
        write_size_gen_csv(dir / "size_gen_table.csv", dir / "size_gen_summary.csv", r);
        m.output(dir / "size_gen_table.csv");
        m.output(dir / "size_gen_summary.csv");
        resolved["cap"] = cap;
        resolved["include_uncapped"] = uncapped;
        json vs = json::array();
        for (const auto& v : variants) vs.push_back({{"name", v.name}, {"train", v.config.to_json()}});
        resolved["variants"] = vs;
      } else if (exp_kind == "reduced") {
        const auto variants = experiment_variants(j, data, g.seed);
        const auto axis = parse_reduce_axis(get_or<std::string>(j, "axis", "scalings"));
        std::vector<double> fractions;
        if (j.contains("points")) {
          for (int p : j["points"].get<std::vector<int>>()) {
            fractions.push_back(static_cast<double>(p) / static_cast<double>(data.grid.size()));
          }
        } else {
          fractions = get_or<std::vector<double>>(j, "fractions", {1.0, 9.0 / 13, 5.0 / 13, 3.0 / 13});
        }
        const auto rows = as_usage(
            [&] { return reduced_training(variants, data, fractions, axis, seeds, g.workers); });
        write_reduced_csv(dir / "reduced.csv", rows);
        m.output(dir / "reduced.csv");
        resolved["axis"] = to_string(axis);
        resolved["fractions"] = fractions;
        json vs = json::array();
        for (const auto& v : variants) vs.push_back({{"name", v.name}, {"train", v.config.to_json()}});
        resolved["variants"] = vs;
      } else {
        if (!j.contains("full")) throw UsageError("ablation: missing 'full'");
        const auto full = parse_train_config(j["full"], data, g.seed);
        const bool base = get_or(j, "include_base", false);
        const auto rows =
            as_usage([&] { return ablation(full, data, seeds.front(), base, g.workers); });
        write_ablation_csv(dir / "ablation.csv", rows);
        m.output(dir / "ablation.csv");
        resolved["full"] = full.to_json();
        resolved["include_base"] = base;
      }
      m.config(resolved);
      m.write(dir / "manifest.json");
      return 0;
    }

    if (*replay_cmd) {
      const json man = read_json_file(replay_manifest);
      require_schema(man, kManifestSchema, replay_manifest);
      const auto recorded = man.at("args").get<std::vector<std::string>>();
      if (!recorded.empty() && recorded.front() == "replay") {
        throw UsageError("replay: refusing to replay a replay");
      }
      const int status = run_command(recorded, out, err);
      if (status != 0) return status;
      int mismatches = 0;
      for (const auto& o : man.at("outputs")) {
        const std::string path = o.at("path");
        if (sha256_file(path) != o.at("sha256").get<std::string>()) {
          print_error(err, "data", "hash mismatch for '" + path + "'");
          ++mismatches;
        }
      }
      out << json{{"replayed", man.at("command")}, {"mismatches", mismatches}}.dump() << "\n";
      return mismatches == 0 ? 0 : 1;
    }
  } catch (const UsageError& e) {
    print_error(err, "usage", e.what());
    return 2;
  } catch (const Error& e) {
    print_error(err, e.kind(), e.what());
    return 1;
  } catch (const json::exception& e) {
    print_error(err, "usage", e.what());
    return 2;
  } catch (const std::exception& e) {
    print_error(err, "internal", e.what());
    return 1;
  }
  return 0;
}

}  // namespace dignn
