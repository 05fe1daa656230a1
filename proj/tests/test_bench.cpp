#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qaoalab/bench.hpp"
#include "test_support.hpp"

using namespace qaoalab;

namespace {

OptimizerSpec spec(OptimizerKind kind, Budget budget) {
  OptimizerSpec s;
  s.kind = kind;
  s.budget = budget;
  return s;
}

BenchmarkConfig small_config() {
  BenchmarkConfig config;
  config.instance = generate_uc_instance(4, 12);
  config.restarts = 4;
  config.seed = 99;
  config.optimizers = {spec(OptimizerKind::nelder_mead, Budget::iterations(50)),
                       spec(OptimizerKind::differential_evolution, Budget::evals(200)),
                       spec(OptimizerKind::fast_slow, Budget::evals(150))};
  return config;
}

std::string raw_text(const ResultTable& table) {
  std::ostringstream out;
  write_raw_jsonl(table, out);
  return out.str();
}

}  // namespace

TEST_CASE("normalized cost") {
  CHECK(normalized_cost(-5.0, -10.0) == 0.5);
  CHECK(normalized_cost(-10.0, -10.0) == 1.0);
  CHECK(normalized_cost(2.0, -10.0) == -0.2);
  for (double c_min : {0.0, 1.0}) {
    try {
      normalized_cost(-1.0, c_min);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::metric_undefined);
    }
  }
}

TEST_CASE("single optimizer, single restart") {
  BenchmarkConfig config;
  config.instance = test_support::two_unit_uc();
  config.restarts = 1;
  config.optimizers = {spec(OptimizerKind::nelder_mead, Budget::iterations(100))};
  const ResultTable table = run_benchmark(config);
  REQUIRE(table.runs.size() == 1);
  REQUIRE(table.c_min.has_value());
  const RunRecord& r = table.runs.front();
  CHECK(*r.normalized_cost == r.run.best_value / *table.c_min);
  CHECK(*r.normalized_cost <= 1.0);
  REQUIRE(table.aggregates.size() == 1);
  CHECK(table.aggregates[0].runs == 1);
  CHECK(table.aggregates[0].norm_std == 0.0);
  CHECK(table.penalty == 1.0);
}

TEST_CASE("identical configs give byte-identical raw results") {
  const BenchmarkConfig config = small_config();
  const ResultTable a = run_benchmark(config);
  const ResultTable b = run_benchmark(config);
  CHECK(raw_text(a) == raw_text(b));
  BenchmarkConfig threaded = config;
  threaded.jobs = 3;
  CHECK(raw_text(run_benchmark(threaded)) == raw_text(a));
}

TEST_CASE("aggregates recompute from raw rows") {
  const ResultTable table = run_benchmark(small_config());
  CHECK_FALSE(table.any_errors());
  for (const auto& row : table.aggregates) {
    std::vector<double> evals, norms;
    for (const auto& r : table.runs) {
      if (r.optimizer != row.optimizer) continue;
      evals.push_back(static_cast<double>(r.run.n_evals));
      norms.push_back(*r.normalized_cost);
      CHECK(*r.normalized_cost <= 1.0 + 1e-12);
      CHECK(r.run.best_value == *std::min_element(r.run.trace.begin(), r.run.trace.end()));
    }
    // Two-pass sample statistics, computed independently.
    auto stats = [](const std::vector<double>& v) {
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= static_cast<double>(v.size());
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      return std::make_pair(mean, std::sqrt(ss / static_cast<double>(v.size() - 1)));
    };
    const auto [em, es] = stats(evals);
    const auto [nm, ns] = stats(norms);
    CHECK(std::abs(row.evals_mean - em) <= 1e-12 * std::max(1.0, em));
    CHECK(std::abs(row.evals_std - es) <= 1e-12 * std::max(1.0, es));
    CHECK(std::abs(*row.norm_mean - nm) <= 1e-12);
    CHECK(std::abs(*row.norm_std - ns) <= 1e-12);
    CHECK(row.runs == 4);
  }
}

TEST_CASE("restart order does not change aggregates") {
  const ResultTable table = run_benchmark(small_config());
  std::vector<RunRecord> reversed(table.runs.rbegin(), table.runs.rend());
  const auto again = aggregate(reversed);
  for (const auto& row : again) {
    const auto it = std::find_if(table.aggregates.begin(), table.aggregates.end(),
                                 [&](const AggregateRow& r) { return r.optimizer == row.optimizer; });
    REQUIRE(it != table.aggregates.end());
    CHECK(std::abs(row.evals_mean - it->evals_mean) <= 1e-12 * std::max(1.0, row.evals_mean));
    CHECK(std::abs(*row.norm_mean - *it->norm_mean) <= 1e-12);
    CHECK(std::abs(*row.norm_std - *it->norm_std) <= 1e-12);
  }
}

TEST_CASE("adding an optimizer leaves other seeds alone") {
  BenchmarkConfig config = small_config();
  const ResultTable before = run_benchmark(config);
  config.optimizers.insert(config.optimizers.begin(), spec(OptimizerKind::powell, Budget::iterations(20)));
  const ResultTable after = run_benchmark(config);
  for (const auto& r : before.runs) {
    const auto it = std::find_if(after.runs.begin(), after.runs.end(), [&](const RunRecord& o) {
      return o.optimizer == r.optimizer && o.restart == r.restart;
    });
    REQUIRE(it != after.runs.end());
    CHECK(it->seed == r.seed);
    CHECK(it->run.trace == r.run.trace);
  }
  CHECK(restart_seed(1, "NM", 0) != restart_seed(1, "NM", 1));
  CHECK(restart_seed(1, "NM", 0) != restart_seed(1, "DE", 0));
  CHECK(restart_seed(1, "NM", 0) != restart_seed(2, "NM", 0));
}

TEST_CASE("failed runs are recorded") {
  BenchmarkConfig config;
  config.instance = test_support::two_unit_uc();
  config.restarts = 2;
  OptimizerSpec de = spec(OptimizerKind::differential_evolution, Budget::evals(10));
  de.options.de.population = 20;
  config.optimizers = {de, spec(OptimizerKind::nelder_mead, Budget::iterations(10))};
  const ResultTable table = run_benchmark(config);
  CHECK(table.any_errors());
  CHECK(table.runs[0].error.has_value());
  CHECK_FALSE(table.runs[2].error.has_value());
  CHECK(run_record_json(table.runs[0]).contains("error"));
}

TEST_CASE("configuration errors") {
  BenchmarkConfig config = small_config();
  config.restarts = 0;
  CHECK_THROWS_AS(run_benchmark(config), Error);
  config = small_config();
  config.optimizers.clear();
  CHECK_THROWS_AS(run_benchmark(config), Error);
}

TEST_CASE("shot mode is reproducible") {
  BenchmarkConfig config = small_config();
  config.mode = SimulationMode::sampled(256, 3);
  config.restarts = 2;
  CHECK(raw_text(run_benchmark(config)) == raw_text(run_benchmark(config)));
}

TEST_CASE("persisted files") {
  const ResultTable table = run_benchmark(small_config());
  const auto dir = std::filesystem::temp_directory_path() / "qaoalab_bench_test";
  std::filesystem::remove_all(dir);
  persist(table, dir);
  std::ifstream raw(dir / "raw.jsonl");
  int lines = 0;
  for (std::string line; std::getline(raw, line);) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.contains("best_value"));
    CHECK(j.contains("n_evals"));
    ++lines;
  }
  CHECK(lines == 12);
  std::ifstream agg(dir / "aggregate.csv");
  std::string header;
  std::getline(agg, header);
  CHECK(header == "optimizer,runs,evals_mean,evals_std,norm_cost_mean,norm_cost_std,best_value_mean,best_value_std");
  std::filesystem::remove_all(dir);
}
