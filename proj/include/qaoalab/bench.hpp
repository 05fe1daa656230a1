#pragma once

// Restart campaigns: N seeded runs per optimizer on one encoded instance,
// normalized-cost and evaluation-count aggregation, and result files.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qaoalab/encoding.hpp"
#include "qaoalab/optimizers.hpp"
#include "qaoalab/problems.hpp"
#include "qaoalab/simulator.hpp"

namespace qaoalab {

/// C / C_min. Requires C_min < 0, which holds for every non-constant
/// Hamiltonian because the offset-free energies sum to zero.
double normalized_cost(double value, double c_min);

struct OptimizerSpec {
  OptimizerKind kind = OptimizerKind::nelder_mead;
  Budget budget;
  OptimizerOptions options;
  std::string label;  // defaults to the optimizer id
  std::optional<std::uint64_t> seed;  // single runs only; restarts derive their own

  std::string name() const { return label.empty() ? to_string(kind) : label; }
};

struct BenchmarkConfig {
  Instance instance;
  EncodingPolicy encoding;
  int layers = 1;
  SimulationMode mode;
  std::vector<OptimizerSpec> optimizers;
  int restarts = 25;
  std::uint64_t seed = 0;
  int jobs = 1;

  void validate() const;
};

struct RunRecord {
  std::string optimizer;
  int restart = 0;
  std::uint64_t seed = 0;
  OptimizerRun run;
  std::optional<double> normalized_cost;
  std::optional<std::string> error;
};

struct AggregateRow {
  std::string optimizer;
  int runs = 0;
  double evals_mean = 0.0;
  double evals_std = 0.0;
  double value_mean = 0.0;
  double value_std = 0.0;
  std::optional<double> norm_mean;
  std::optional<double> norm_std;
};

struct ResultTable {
  int qubits = 0;
  int layers = 1;
  double penalty = 0.0;
  double scale = 1.0;
  std::optional<double> c_min;
  std::vector<RunRecord> runs;  // ordered by (optimizer position, restart)
  std::vector<AggregateRow> aggregates;

  bool any_errors() const;
};

/// Depends only on (master seed, optimizer label, restart index).
std::uint64_t restart_seed(std::uint64_t master, const std::string& optimizer, int restart);

/// Mean and sample standard deviation (N - 1 denominator; 0 for one value).
std::pair<double, double> mean_and_std(const std::vector<double>& values);

/// Aggregate rows in first-appearance order of the optimizer labels.
std::vector<AggregateRow> aggregate(const std::vector<RunRecord>& runs);

/// Runs every restart of every optimizer on a shared energy table; each run
/// owns a cloned objective. Per-run failures are recorded, not thrown.
ResultTable run_benchmark(const BenchmarkConfig& config);

/// Same, for an already encoded Hamiltonian.
ResultTable run_benchmark(const Ising& ham, const BenchmarkConfig& config);

nlohmann::json run_record_json(const RunRecord& record);
void write_raw_jsonl(const ResultTable& table, std::ostream& out);
void write_aggregate_csv(const ResultTable& table, std::ostream& out);

/// raw.jsonl and aggregate.csv under `dir` (created if missing).
void persist(const ResultTable& table, const std::filesystem::path& dir);

}  // namespace qaoalab
