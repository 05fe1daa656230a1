#include "qaoalab/bench.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <thread>

namespace qaoalab {

double normalized_cost(double value, double c_min) {
  if (!(c_min < 0.0)) {
    throw Error(Errc::metric_undefined, "C_min must be negative for a normalized cost (got " + std::to_string(c_min) + ")");
  }
  return value / c_min;
}

void BenchmarkConfig::validate() const {
  if (restarts < 1) throw Error(Errc::configuration, "restarts must be >= 1");
  if (layers < 1) throw Error(Errc::configuration, "layers must be >= 1");
  if (optimizers.empty()) throw Error(Errc::configuration, "no optimizers configured");
  for (const auto& spec : optimizers) spec.budget.validate();
}

bool ResultTable::any_errors() const {
  return std::any_of(runs.begin(), runs.end(), [](const RunRecord& r) { return r.error.has_value(); });
}

std::uint64_t restart_seed(std::uint64_t master, const std::string& optimizer, int restart) {
  std::uint64_t label_hash = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : optimizer) {
    label_hash ^= c;
    label_hash *= 0x100000001b3ULL;
  }
  return mix_seed(mix_seed(master) ^ mix_seed(label_hash) ^ mix_seed(0x51ed270b27a3bULL + static_cast<std::uint64_t>(restart)));
}

std::pair<double, double> mean_and_std(const std::vector<double>& values) {
  if (values.empty()) return {0.0, 0.0};
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

std::vector<AggregateRow> aggregate(const std::vector<RunRecord>& runs) {
  std::vector<std::string> order;
  for (const auto& r : runs)
    if (std::find(order.begin(), order.end(), r.optimizer) == order.end()) order.push_back(r.optimizer);

  std::vector<AggregateRow> rows;
  for (const auto& name : order) {
    std::vector<double> evals, values, norms;
    for (const auto& r : runs) {
      if (r.optimizer != name || r.error) continue;
      evals.push_back(static_cast<double>(r.run.n_evals));
      values.push_back(r.run.best_value);
      if (r.normalized_cost) norms.push_back(*r.normalized_cost);
    }
    AggregateRow row;
    row.optimizer = name;
    row.runs = static_cast<int>(evals.size());
    std::tie(row.evals_mean, row.evals_std) = mean_and_std(evals);
    std::tie(row.value_mean, row.value_std) = mean_and_std(values);
    if (!norms.empty() && norms.size() == evals.size()) {
      const auto [m, s] = mean_and_std(norms);
      row.norm_mean = m;
      row.norm_std = s;
    }
    rows.push_back(row);
  }
  return rows;
}

ResultTable run_benchmark(const Ising& ham, const BenchmarkConfig& config) {
  config.validate();
  ResultTable table;
  table.qubits = ham.n;
  table.layers = config.layers;

  const auto diag = std::make_shared<const DiagonalEnergies<double>>(precompute_diagonal(ham));
  const double c_min = diag->table.minCoeff();
  if (c_min < 0.0) table.c_min = c_min;

  const QaoaObjective prototype(diag, config.layers, config.mode);
  const SearchSpace space = SearchSpace::qaoa(config.layers);

  struct Task {
    std::size_t optimizer;
    int restart;
  };
  std::vector<Task> tasks;
  for (std::size_t o = 0; o < config.optimizers.size(); ++o)
    for (int r = 0; r < config.restarts; ++r) tasks.push_back({o, r});
  table.runs.resize(tasks.size());

  auto execute = [&](std::size_t index) {
    const Task& task = tasks[index];
    const OptimizerSpec& spec = config.optimizers[task.optimizer];
    RunRecord record;
    record.optimizer = spec.name();
    record.restart = task.restart;
    record.seed = restart_seed(config.seed, record.optimizer, task.restart);
    try {
      QaoaObjective objective = prototype.clone();
      if (config.mode.kind == SimulationMode::Kind::shots) {
        SimulationMode mode = config.mode;
        mode.seed = mix_seed(config.mode.seed ^ record.seed);
        objective = QaoaObjective(diag, config.layers, mode);
      }
      const Objective f = [&objective](const Eigen::VectorXd& x) { return objective(x); };
      record.run = minimize(spec.kind, f, space, spec.budget, record.seed, spec.options);
      record.run.optimizer_id = record.optimizer;
      if (table.c_min) record.normalized_cost = normalized_cost(record.run.best_value, *table.c_min);
    } catch (const Error& e) {
      record.error = e.what();
    }
    table.runs[index] = std::move(record);
  };

  const int workers = std::clamp(config.jobs, 1, static_cast<int>(tasks.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) execute(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1)) execute(i);
      });
    }
  }

  table.aggregates = aggregate(table.runs);
  return table;
}

ResultTable run_benchmark(const BenchmarkConfig& config) {
  config.validate();
  const ProblemFunctions funcs = build(config.instance);
  const Encoding enc = encode(funcs, config.encoding);
  ResultTable table = run_benchmark(enc.ising, config);
  table.penalty = enc.penalty;
  table.scale = enc.scale;
  return table;
}

nlohmann::json run_record_json(const RunRecord& r) {
  nlohmann::json j;
  j["optimizer"] = r.optimizer;
  j["restart"] = r.restart;
  j["seed"] = r.seed;
  if (r.error) {
    j["error"] = *r.error;
    return j;
  }
  j["best_value"] = r.run.best_value;
  j["normalized_cost"] = r.normalized_cost ? nlohmann::json(*r.normalized_cost) : nlohmann::json(nullptr);
  j["n_evals"] = r.run.n_evals;
  j["iterations"] = r.run.iterations;
  j["converged"] = r.run.converged;
  j["best_point"] = std::vector<double>(r.run.best_point.data(), r.run.best_point.data() + r.run.best_point.size());
  j["notes"] = r.run.notes;
  j["trace"] = r.run.trace;
  return j;
}

void write_raw_jsonl(const ResultTable& table, std::ostream& out) {
  for (const auto& r : table.runs) out << run_record_json(r).dump() << '\n';
}

void write_aggregate_csv(const ResultTable& table, std::ostream& out) {
  out << "optimizer,runs,evals_mean,evals_std,norm_cost_mean,norm_cost_std,best_value_mean,best_value_std\n";
  const auto old_precision = out.precision(17);
  for (const auto& row : table.aggregates) {
    out << row.optimizer << ',' << row.runs << ',' << row.evals_mean << ',' << row.evals_std << ',';
    if (row.norm_mean) out << *row.norm_mean << ',' << *row.norm_std;
    else out << ',';
    out << ',' << row.value_mean << ',' << row.value_std << '\n';
  }
  out.precision(old_precision);
}

void persist(const ResultTable& table, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::ofstream raw(dir / "raw.jsonl");
  std::ofstream agg(dir / "aggregate.csv");
  if (!raw || !agg) throw Error(Errc::io, "cannot write results under " + dir.string());
  write_raw_jsonl(table, raw);
  write_aggregate_csv(table, agg);
}

}  // namespace qaoalab
