#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "qaoalab/config.hpp"
#include "test_support.hpp"

using namespace qaoalab;
using nlohmann::json;

namespace {

json base_config() {
  return {{"instance", instance_to_json(test_support::two_unit_uc())},
          {"optimizers", json::array({{{"kind", "NM"}, {"max_iters", 50}}})}};
}

std::string config_error(const json& j) {
  try {
    parse_run_config(j);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::configuration);
    return e.detail();
  }
  FAIL("expected a configuration error");
  return {};
}

std::filesystem::path scratch_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "qaoalab_config_test";
  std::filesystem::create_directories(dir);
  return dir;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path) << text;
}

}  // namespace

TEST_CASE("defaults") {
  const RunConfig config = parse_run_config(base_config());
  CHECK(config.layers == 1);
  CHECK(config.restarts == 1);
  CHECK(config.jobs == 1);
  CHECK(config.mode.kind == SimulationMode::Kind::exact);
  CHECK_FALSE(config.encoding.penalty.has_value());
  CHECK_FALSE(config.encoding.scale.has_value());
  CHECK(config.scan.resolution == 50);
  REQUIRE(config.optimizers.size() == 1);
  CHECK(config.optimizers[0].kind == OptimizerKind::nelder_mead);
  CHECK(*config.optimizers[0].budget.max_iters == 50);
  CHECK(std::holds_alternative<UcInstance>(config.require_instance()));
}

TEST_CASE("explicit values") {
  json j = base_config();
  j["encoding"] = {{"penalty", 3.5}, {"scale", "auto"}};
  j["layers"] = 2;
  j["mode"] = {{"type", "shots"}, {"shots", 128}, {"seed", 7}};
  j["restarts"] = 5;
  j["seed"] = 11;
  j["jobs"] = 2;
  j["scan"] = {{"resolution", 8}, {"a", {-1.0, 1.0}}, {"center", {{"beta", {0.1, 0.2}}, {"gamma", {0.3, 0.4}}}}};
  j["optimizers"] = json::array({{{"kind", "de"},
                                  {"label", "DE-small"},
                                  {"max_evals", 300},
                                  {"seed", 4},
                                  {"options", {{"population", 6}, {"polish", false}, {"mutation", 0.6}}}},
                                 {{"kind", "FS"}, {"max_evals", 100}, {"options", {{"n_samples", 20}, {"local", "powell"}}}}});
  const RunConfig config = parse_run_config(j);
  CHECK(*config.encoding.penalty == 3.5);
  CHECK_FALSE(config.encoding.scale.has_value());
  CHECK(config.layers == 2);
  CHECK(config.mode.kind == SimulationMode::Kind::shots);
  CHECK(config.mode.shots == 128);
  CHECK(config.mode.seed == 7);
  CHECK(config.scan.resolution == 8);
  CHECK(config.scan.a.lower == -1.0);
  CHECK(config.scan.center->layers() == 2);
  const auto& de = config.optimizers[0];
  CHECK(de.name() == "DE-small");
  CHECK(*de.seed == 4);
  CHECK(*de.options.de.population == 6);
  CHECK_FALSE(de.options.de.polish);
  CHECK(de.options.de.mutation == 0.6);
  const auto& fs = config.optimizers[1];
  CHECK(*fs.options.fs.n_samples == 20);
  CHECK(fs.options.fs.local_kind == OptimizerKind::powell);
  const BenchmarkConfig bench = config.benchmark();
  CHECK(bench.restarts == 5);
  CHECK(bench.seed == 11);
  CHECK(bench.jobs == 2);
}

TEST_CASE("schema errors name the offending path") {
  json j = base_config();
  j["bogus"] = 1;
  CHECK(config_error(j).find("config.bogus") != std::string::npos);

  j = base_config();
  j["optimizers"][0]["options"] = {{"tol", 0.1}};
  CHECK(config_error(j).find("config.optimizers[0].options.tol") != std::string::npos);

  j = base_config();
  j["optimizers"][0]["kind"] = "XYZ";
  CHECK(config_error(j).find("unknown optimizer") != std::string::npos);

  j = base_config();
  j["optimizers"][0].erase("max_iters");
  CHECK(config_error(j).find("max_evals or max_iters") != std::string::npos);

  j = base_config();
  j["encoding"] = {{"penalty", "big"}};
  CHECK(config_error(j).find("config.encoding.penalty") != std::string::npos);

  j = base_config();
  j["layers"] = 0;
  CHECK(config_error(j).find("config.layers") != std::string::npos);

  j = base_config();
  j["mode"] = {{"type", "noisy"}};
  CHECK(config_error(j).find("config.mode.type") != std::string::npos);

  j = base_config();
  j["optimizers"][0]["options"] = {{"local", "DE"}};
  j["optimizers"][0]["kind"] = "FS";
  CHECK(config_error(j).find("local optimizer") != std::string::npos);

  j = base_config();
  j["instance_file"] = "x.json";
  CHECK(config_error(j).find("not both") != std::string::npos);
}

TEST_CASE("missing instance is reported on use") {
  json j = base_config();
  j.erase("instance");
  const RunConfig config = parse_run_config(j);
  CHECK_THROWS_AS(config.require_instance(), Error);
  CHECK_THROWS_AS(config.benchmark(), Error);
}

TEST_CASE("instance_file resolves against the config directory") {
  const auto dir = scratch_dir();
  write_text(dir / "uc.json", instance_to_json(test_support::two_unit_uc()).dump());
  json j = base_config();
  j.erase("instance");
  j["instance_file"] = "uc.json";
  write_text(dir / "run.json", j.dump(2));
  const RunConfig config = load_run_config(dir / "run.json");
  REQUIRE(config.instance.has_value());
  CHECK(instance_to_json(*config.instance) == instance_to_json(test_support::two_unit_uc()));
}

TEST_CASE("file diagnostics carry line and column") {
  const auto dir = scratch_dir();
  write_text(dir / "syntax.json", "{\n  \"layers\": 1,\n  \"seed\": ,\n}\n");
  try {
    load_run_config(dir / "syntax.json");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::configuration);
    CHECK(e.detail().find("syntax.json:3:") != std::string::npos);
  }
  write_text(dir / "schema.json", "{\n  \"layers\": 1,\n  \"bogus\": 2\n}\n");
  try {
    load_run_config(dir / "schema.json");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.detail().find("schema.json:3:3: config.bogus") != std::string::npos);
  }
  try {
    load_run_config(dir / "absent.json");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::io);
  }
}

TEST_CASE("option overrides by kind") {
  OptimizerOptions options;
  apply_optimizer_options(OptimizerKind::spsa, {{"learning_rate", 0.3}, {"calibration_steps", 10}}, options);
  CHECK(options.spsa.learning_rate == 0.3);
  apply_optimizer_options(OptimizerKind::basin_hopping, {{"hops", 4}}, options);
  CHECK(options.bh.hops == 4);
  CHECK_THROWS_AS(apply_optimizer_options(OptimizerKind::nelder_mead, {{"hops", 4}}, options), Error);
  CHECK_THROWS_AS(apply_optimizer_options(OptimizerKind::basin_hopping, {{"hops", "four"}}, options), Error);
  CHECK_THROWS_AS(apply_optimizer_options(OptimizerKind::powell, json::array(), options), Error);
}
