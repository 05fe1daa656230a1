#pragma once

// JSON run configuration shared by the command-line subcommands.
//
// {
//   "instance": {...} | "instance_file": "uc.json",
//   "encoding": {"penalty": "auto" | number, "scale": "auto" | number},
//   "layers": 1,
//   "mode": {"type": "exact" | "shots", "shots": 4096, "seed": 0},
//   "optimizers": [{"kind": "DE", "label": "DE", "max_evals": 1000, "max_iters": 200,
//                   "seed": 0, "options": {...}}],
//   "restarts": 25, "seed": 0, "jobs": 1,
//   "scan": {"resolution": 50, "beta": [lo, hi], "gamma": [lo, hi], "a": [lo, hi],
//            "b": [lo, hi], "seed": 0, "center": {"beta": [...], "gamma": [...]}},
//   "output": "results"
// }

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "qaoalab/bench.hpp"
#include "qaoalab/landscape.hpp"

namespace qaoalab {

struct ScanSettings {
  int resolution = 50;
  Range beta{0.0, 3.141592653589793};
  Range gamma{0.0, 6.283185307179586};
  Range a{-3.141592653589793, 3.141592653589793};
  Range b{-3.141592653589793, 3.141592653589793};
  std::uint64_t seed = 0;
  std::optional<QaoaParams> center;  // middle of the search space when unset
};

struct RunConfig {
  std::optional<Instance> instance;
  EncodingPolicy encoding;
  int layers = 1;
  SimulationMode mode;
  std::vector<OptimizerSpec> optimizers;
  int restarts = 1;
  std::uint64_t seed = 0;
  int jobs = 1;
  ScanSettings scan;
  std::optional<std::filesystem::path> output;

  const Instance& require_instance() const;
  BenchmarkConfig benchmark() const;
};

/// Parses JSON text. Syntax errors become configuration errors naming
/// `source`, line and column.
nlohmann::json parse_json_text(const std::string& text, const std::string& source);

/// Reads and parses a JSON file; a missing or unreadable file is an io error.
nlohmann::json read_json_file(const std::filesystem::path& path);

/// Relative instance_file entries resolve against `base_dir`.
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

/// Schema errors carry the line of the offending key when it can be located.
RunConfig load_run_config(const std::filesystem::path& path);

Instance load_instance(const std::filesystem::path& path);

/// Overrides hyperparameters of `kind` from a JSON object; unknown keys are
/// configuration errors.
void apply_optimizer_options(OptimizerKind kind, const nlohmann::json& options, OptimizerOptions& target);

}  // namespace qaoalab
