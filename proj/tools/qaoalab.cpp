// qaoalab: instance generation, penalty tuning, landscape scans, single
// optimizations and restart benchmarks.
//
// Exit codes: 0 success, 1 malformed configuration or arguments, 2 unwritable
// output path, 3 infeasible instance, 4 any other failure (including a
// benchmark in which a run errored).

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>

#include "CLI11.hpp"
#include "qaoalab/bench.hpp"
#include "qaoalab/config.hpp"
#include "qaoalab/encoding.hpp"
#include "qaoalab/landscape.hpp"
#include "qaoalab/optimizers.hpp"
#include "qaoalab/problems.hpp"
#include "qaoalab/simulator.hpp"

namespace fs = std::filesystem;
using namespace qaoalab;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitUnwritable = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitFailure = 4;

int exit_code_for(Errc code) {
  switch (code) {
    case Errc::configuration:
    case Errc::instance_shape:
    case Errc::invalid_argument:
    case Errc::dimension_mismatch:
      return kExitConfig;
    case Errc::io:
      return kExitUnwritable;
    case Errc::infeasible_instance:
    case Errc::infeasible_problem:
      return kExitInfeasible;
    default:
      return kExitFailure;
  }
}

fs::path default_out_dir() {
  if (const char* env = std::getenv("QAOALAB_OUT_DIR"); env != nullptr && *env != '\0') return env;
  return fs::current_path();
}

fs::path resolve_output(const std::string& flag, const std::optional<fs::path>& from_config, const std::string& fallback) {
  if (!flag.empty()) return flag;
  if (from_config) return *from_config;
  return default_out_dir() / fallback;
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
  return out;
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) throw Error(Errc::io, "cannot create directory " + dir.string());
  const fs::path probe = dir / ".qaoalab_write_probe";
  {
    std::ofstream out(probe);
    if (!out) throw Error(Errc::io, "directory not writable: " + dir.string());
  }
  fs::remove(probe, ec);
}

std::string format_double(double value) {
  std::ostringstream out;
  out << std::setprecision(10) << value;
  return out.str();
}

// ---- generate -----------------------------------------------------------------

struct GenerateArgs {
  std::string kind;
  int units = 4;
  int cities = 3;
  int machines = 2;
  int positions = 3;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_generate(const GenerateArgs& args) {
  Instance inst;
  std::string stem;
  if (args.kind == "uc") {
    inst = generate_uc_instance(args.units, args.seed);
    stem = "uc_" + std::to_string(args.units);
  } else if (args.kind == "tsp") {
    inst = generate_tsp_instance(args.cities, args.seed);
    stem = "tsp_" + std::to_string(args.cities);
  } else {
    inst = generate_fl_instance(args.machines, args.positions, args.seed);
    stem = "fl_" + std::to_string(args.machines) + "x" + std::to_string(args.positions);
  }
  const fs::path path =
      resolve_output(args.out, std::nullopt, stem + "_seed" + std::to_string(args.seed) + ".json");
  auto out = open_output(path);
  out << instance_to_json(inst).dump(2) << '\n';
  out.close();
  if (!out) throw Error(Errc::io, "cannot write " + path.string());

  const ProblemFunctions funcs = build(inst);
  std::cout << "wrote " << path.string() << '\n';
  std::cout << "kind: " << funcs.kind << "\nqubits: " << funcs.n << '\n';
  if (funcs.n <= kMaxEnumerationQubits) {
    std::uint64_t valid = 0;
    const Bitstring count = Bitstring{1} << funcs.n;
    for (Bitstring x = 0; x < count; ++x) valid += funcs.validity(x) ? 1 : 0;
    std::cout << "valid bitstrings: " << valid << " of " << count << (valid > 0 ? " (feasible)" : " (infeasible)")
              << '\n';
  } else {
    std::cout << "valid bitstrings: not enumerated (more than " << kMaxEnumerationQubits << " qubits)\n";
  }
  return 0;
}

// ---- tune ---------------------------------------------------------------------

int cmd_tune(const std::string& instance_file, const std::string& out_flag) {
  const Instance inst = load_instance(instance_file);
  const ProblemFunctions funcs = build(inst);
  const PenaltyTuning tuning = tune_penalty(funcs);
  const Encoding enc = encode(funcs, EncodingPolicy{tuning.penalty, std::nullopt});
  const Spectrum<double> spectrum = brute_force(enc.ising);

  nlohmann::json report;
  report["kind"] = funcs.kind;
  report["qubits"] = funcs.n;
  report["penalty"] = tuning.penalty;
  report["penalty_iterations"] = tuning.iterations;
  report["penalty_history"] = tuning.history;
  report["min_valid_cost"] = tuning.min_valid_cost;
  report["mean_valid_cost"] = tuning.mean_valid_cost;
  report["threshold"] = tuning.threshold;
  report["min_wrong_value"] = tuning.min_wrong_value;
  report["cheapest_wrong"] = bitstring_label(tuning.cheapest_wrong, funcs.n);
  report["scale"] = enc.scale;
  report["mean_abs_coefficient"] = mean_abs_coefficient(enc.ising);
  report["c_min"] = spectrum.min_energy;
  std::vector<std::string> ground;
  for (Bitstring x : spectrum.argmin) ground.push_back(bitstring_label(x, funcs.n));
  report["ground_states"] = ground;
  report["ising"] = ising_to_json(enc.ising);

  const fs::path path = resolve_output(out_flag, std::nullopt, fs::path(instance_file).stem().string() + "_tune.json");
  auto out = open_output(path);
  out << report.dump(2) << '\n';

  std::cout << "qubits: " << funcs.n << '\n'
            << "P: " << format_double(tuning.penalty) << " (" << tuning.iterations << " increments)\n"
            << "s: " << format_double(enc.scale) << '\n'
            << "mean |coefficient|: " << format_double(mean_abs_coefficient(enc.ising)) << '\n'
            << "C_min: " << format_double(spectrum.min_energy) << '\n'
            << "ground states:";
  for (const auto& g : ground) std::cout << ' ' << g;
  std::cout << "\nwrote " << path.string() << '\n';
  return 0;
}

// ---- helpers shared by config-driven commands ------------------------------------

struct Prepared {
  Encoding encoding;
  std::shared_ptr<const DiagonalEnergies<double>> diag;
};

Prepared prepare(const RunConfig& config) {
  const ProblemFunctions funcs = build(config.require_instance());
  Prepared p{encode(funcs, config.encoding), nullptr};
  p.diag = std::make_shared<const DiagonalEnergies<double>>(precompute_diagonal(p.encoding.ising));
  return p;
}

// Shot-mode values seeded by the evaluated point so parallel scans stay
// reproducible regardless of scheduling.
Objective make_scan_objective(const Prepared& p, const RunConfig& config) {
  if (config.mode.kind == SimulationMode::Kind::exact) {
    auto objective = std::make_shared<QaoaObjective>(p.diag, config.layers, config.mode);
    return [objective](const Eigen::VectorXd& x) { return (*objective)(x); };
  }
  const auto diag = p.diag;
  const int layers = config.layers;
  const SimulationMode mode = config.mode;
  return [diag, layers, mode](const Eigen::VectorXd& x) {
    std::uint64_t h = mode.seed;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      std::uint64_t bits = 0;
      const double v = x(i);
      std::memcpy(&bits, &v, sizeof bits);
      h = mix_seed(h ^ bits);
    }
    QaoaObjective objective(diag, layers, SimulationMode::sampled(mode.shots, h));
    return objective(x);
  };
}

// ---- scan ---------------------------------------------------------------------

int cmd_scan(RunConfig config, const std::string& out_flag, std::optional<int> resolution) {
  if (resolution) config.scan.resolution = *resolution;
  const Prepared p = prepare(config);
  const Objective objective = make_scan_objective(p, config);
  ScanGrid grid;
  if (config.layers == 1) {
    grid = grid_scan(objective, 1, config.scan.beta, config.scan.gamma, config.scan.resolution, config.jobs);
  } else {
    QaoaParams center;
    if (config.scan.center) {
      center = *config.scan.center;
      if (center.layers() != config.layers)
        throw Error(Errc::configuration, "config.scan.center: expected " + std::to_string(config.layers) + " layers");
    } else {
      center = QaoaParams(Eigen::VectorXd::Constant(config.layers, std::numbers::pi / 2),
                          Eigen::VectorXd::Constant(config.layers, std::numbers::pi));
    }
    grid = random_plane_scan(objective, center, config.scan.seed, config.scan.a, config.scan.b, config.scan.resolution,
                             config.jobs);
  }
  grid.metadata["kind"] = kind_of(config.require_instance());
  grid.metadata["qubits"] = std::to_string(p.encoding.ising.n);
  grid.metadata["p"] = std::to_string(config.layers);
  grid.metadata["s"] = format_double(p.encoding.scale);
  grid.metadata["P"] = format_double(p.encoding.penalty);
  grid.metadata["mode"] = config.mode.kind == SimulationMode::Kind::exact ? "exact" : "shots";

  const fs::path path = resolve_output(out_flag, config.output, "scan.csv");
  auto out = open_output(path);
  write_scan_csv(grid, out);
  std::cout << "scan " << grid.rows.resolution << 'x' << grid.cols.resolution << " ("
            << (config.layers == 1 ? "beta/gamma grid" : "random plane") << ") min "
            << format_double(grid.values.minCoeff()) << " max " << format_double(grid.values.maxCoeff()) << '\n'
            << "wrote " << path.string() << '\n';
  return 0;
}

// ---- optimize -----------------------------------------------------------------

int cmd_optimize(const RunConfig& config, const std::string& out_flag, std::size_t index) {
  if (config.optimizers.empty()) throw Error(Errc::configuration, "config.optimizers: at least one optimizer required");
  if (index >= config.optimizers.size()) throw Error(Errc::configuration, "--index out of range");
  const OptimizerSpec& spec = config.optimizers[index];
  const Prepared p = prepare(config);
  QaoaObjective objective(p.diag, config.layers, config.mode);
  const Objective f = [&objective](const Eigen::VectorXd& x) { return objective(x); };
  const std::uint64_t seed = spec.seed.value_or(config.seed);
  OptimizerRun run = minimize(spec.kind, f, SearchSpace::qaoa(config.layers), spec.budget, seed, spec.options);
  run.optimizer_id = spec.name();

  const double c_min = p.diag->table.minCoeff();
  RunRecord record{spec.name(), 0, seed, run, std::nullopt, std::nullopt};
  if (c_min < 0.0) record.normalized_cost = normalized_cost(run.best_value, c_min);

  const fs::path dir = resolve_output(out_flag, config.output, "optimize");
  ensure_directory(dir);
  {
    auto out = open_output(dir / "run.json");
    nlohmann::json j = run_record_json(record);
    j["penalty"] = p.encoding.penalty;
    j["scale"] = p.encoding.scale;
    j["c_min"] = c_min;
    out << j.dump(2) << '\n';
  }
  {
    auto out = open_output(dir / "trace.csv");
    write_trace_csv(run, out);
  }
  std::cout << spec.name() << ": best " << format_double(run.best_value);
  if (record.normalized_cost) std::cout << " (normalized " << format_double(*record.normalized_cost) << ")";
  std::cout << ", " << run.n_evals << " evaluations, " << run.iterations << " iterations\n"
            << "wrote " << dir.string() << '\n';
  return 0;
}

// ---- benchmark ----------------------------------------------------------------

int cmd_benchmark(const RunConfig& config, const std::string& out_flag) {
  const fs::path dir = resolve_output(out_flag, config.output, "benchmark");
  ensure_directory(dir);
  const ResultTable table = run_benchmark(config.benchmark());
  persist(table, dir);

  std::cout << "qubits " << table.qubits << ", p " << table.layers << ", P " << format_double(table.penalty) << ", s "
            << format_double(table.scale);
  if (table.c_min) std::cout << ", C_min " << format_double(*table.c_min);
  std::cout << '\n';
  std::cout << std::left << std::setw(12) << "optimizer" << std::setw(24) << "evals" << "normalized cost\n";
  for (const auto& row : table.aggregates) {
    std::ostringstream evals, norm;
    evals << std::fixed << std::setprecision(1) << row.evals_mean << " +- " << row.evals_std;
    if (row.norm_mean) norm << std::fixed << std::setprecision(3) << *row.norm_mean << " +- " << *row.norm_std;
    else norm << "n/a";
    std::cout << std::left << std::setw(12) << row.optimizer << std::setw(24) << evals.str() << norm.str() << '\n';
  }
  std::cout << "wrote " << (dir / "raw.jsonl").string() << " and " << (dir / "aggregate.csv").string() << '\n';
  if (table.any_errors()) {
    for (const auto& r : table.runs)
      if (r.error) std::cerr << "error: " << r.optimizer << " restart " << r.restart << ": " << *r.error << '\n';
    return kExitFailure;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"QAOA landscape, encoding and optimizer benchmarking toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "qaoalab 0.1.0");

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write a seeded random problem instance");
  generate->add_option("kind", gen.kind, "Problem kind")->required()->check(CLI::IsMember({"uc", "tsp", "fl"}));
  generate->add_option("--units", gen.units, "UC units (qubits)")->check(CLI::Range(1, 62));
  generate->add_option("--cities", gen.cities, "TSP cities (qubits = cities^2)")->check(CLI::Range(1, 7));
  generate->add_option("--machines", gen.machines, "FL machines")->check(CLI::Range(1, 62));
  generate->add_option("--positions", gen.positions, "FL positions")->check(CLI::Range(1, 62));
  generate->add_option("--seed", gen.seed, "Generator seed");
  generate->add_option("--out,-o", gen.out, "Output file");

  std::string tune_instance, tune_out;
  auto* tune = app.add_subcommand("tune", "Tune the penalty factor and scaling factor of an instance");
  tune->add_option("instance", tune_instance, "Instance JSON file")->required();
  tune->add_option("--out,-o", tune_out, "Report JSON file");

  std::string config_path, out_flag;
  int jobs = 0;
  std::optional<int> resolution;
  std::optional<std::uint64_t> seed_flag;
  std::optional<int> restarts_flag;
  std::size_t optimizer_index = 0;

  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("config", config_path, "Run configuration JSON file")->required();
    cmd->add_option("--out,-o", out_flag, "Output path");
    cmd->add_option("--jobs,-j", jobs, "Worker thread cap")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", seed_flag, "Override the configured seed");
  };
  auto* scan = app.add_subcommand("scan", "Cost landscape grid (p = 1) or random-plane scan (p > 1)");
  add_config(scan);
  scan->add_option("--resolution", resolution, "Points per axis")->check(CLI::Range(2, 100000));
  auto* optimize = app.add_subcommand("optimize", "Single optimization run");
  add_config(optimize);
  optimize->add_option("--index", optimizer_index, "Which optimizer block to run");
  auto* benchmark = app.add_subcommand("benchmark", "Seeded restarts for every configured optimizer");
  add_config(benchmark);
  benchmark->add_option("--restarts", restarts_flag, "Override the configured restart count")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (generate->parsed()) return cmd_generate(gen);
    if (tune->parsed()) return cmd_tune(tune_instance, tune_out);

    RunConfig config = load_run_config(config_path);
    if (jobs > 0) config.jobs = jobs;
    if (seed_flag) {
      config.seed = *seed_flag;
      config.scan.seed = *seed_flag;
    }
    if (restarts_flag) config.restarts = *restarts_flag;
    if (scan->parsed()) return cmd_scan(config, out_flag, resolution);
    if (optimize->parsed()) {
      if (seed_flag && optimizer_index < config.optimizers.size()) config.optimizers[optimizer_index].seed = *seed_flag;
      return cmd_optimize(config, out_flag, optimizer_index);
    }
    return cmd_benchmark(config, out_flag);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}
