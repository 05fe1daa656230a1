#include "qaoalab/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

namespace qaoalab {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& message) {
  throw Error(Errc::configuration, where + ": " + message);
}

std::pair<std::size_t, std::size_t> line_and_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(where, "expected an object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : allowed) known = known || item.key() == key;
    if (!known) fail(where + "." + item.key(), "unknown key");
  }
}

double get_number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

std::int64_t get_integer(const json& j, const std::string& where, std::int64_t min_value) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  const auto value = j.get<std::int64_t>();
  if (value < min_value) fail(where, "must be >= " + std::to_string(min_value));
  return value;
}

std::uint64_t get_seed(const json& j, const std::string& where) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  return static_cast<std::uint64_t>(get_integer(j, where, 0));
}

bool get_bool(const json& j, const std::string& where) {
  if (!j.is_boolean()) fail(where, "expected true or false");
  return j.get<bool>();
}

Range get_range(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) fail(where, "expected [lower, upper]");
  Range r{get_number(j[0], where + "[0]"), get_number(j[1], where + "[1]")};
  if (!(r.lower < r.upper)) fail(where, "lower must be below upper");
  return r;
}

Eigen::VectorXd get_vector(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a nonempty array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = get_number(j[i], where + "[" + std::to_string(i) + "]");
  return v;
}

std::optional<double> get_auto_or_number(const json& j, const std::string& where) {
  if (j.is_string() && j.get<std::string>() == "auto") return std::nullopt;
  if (!j.is_number()) fail(where, "expected \"auto\" or a number");
  return j.get<double>();
}

using Setter = std::function<void(const json&, const std::string&, OptimizerOptions&)>;

template <class Field>
Setter number_setter(Field field) {
  return [field](const json& j, const std::string& where, OptimizerOptions& o) { field(o) = get_number(j, where); };
}

template <class Field>
Setter integer_setter(Field field, int min_value) {
  return [field, min_value](const json& j, const std::string& where, OptimizerOptions& o) {
    field(o) = static_cast<int>(get_integer(j, where, min_value));
  };
}

const std::map<std::string, Setter>& option_table(OptimizerKind kind) {
  using K = OptimizerKind;
  static const std::map<K, std::map<std::string, Setter>> tables = {
      {K::nelder_mead,
       {{"reflection", number_setter([](OptimizerOptions& o) -> double& { return o.nm.reflection; })},
        {"expansion", number_setter([](OptimizerOptions& o) -> double& { return o.nm.expansion; })},
        {"contraction", number_setter([](OptimizerOptions& o) -> double& { return o.nm.contraction; })},
        {"shrink", number_setter([](OptimizerOptions& o) -> double& { return o.nm.shrink; })},
        {"initial_step", number_setter([](OptimizerOptions& o) -> double& { return o.nm.initial_step; })},
        {"xatol", number_setter([](OptimizerOptions& o) -> double& { return o.nm.xatol; })},
        {"fatol", number_setter([](OptimizerOptions& o) -> double& { return o.nm.fatol; })}}},
      {K::powell,
       {{"ftol", number_setter([](OptimizerOptions& o) -> double& { return o.powell.ftol; })},
        {"xtol", number_setter([](OptimizerOptions& o) -> double& { return o.powell.xtol; })}}},
      {K::spsa,
       {{"learning_rate", number_setter([](OptimizerOptions& o) -> std::optional<double>& { return o.spsa.learning_rate; })},
        {"perturbation", number_setter([](OptimizerOptions& o) -> double& { return o.spsa.perturbation; })},
        {"alpha", number_setter([](OptimizerOptions& o) -> double& { return o.spsa.alpha; })},
        {"gamma", number_setter([](OptimizerOptions& o) -> double& { return o.spsa.gamma; })},
        {"target_magnitude", number_setter([](OptimizerOptions& o) -> double& { return o.spsa.target_magnitude; })},
        {"calibration_steps", integer_setter([](OptimizerOptions& o) -> int& { return o.spsa.calibration_steps; }, 1)},
        {"stability", number_setter([](OptimizerOptions& o) -> std::optional<double>& { return o.spsa.stability; })}}},
      {K::umda,
       {{"population", integer_setter([](OptimizerOptions& o) -> int& { return o.umda.population; }, 2)},
        {"elite_fraction", number_setter([](OptimizerOptions& o) -> double& { return o.umda.elite_fraction; })}}},
      {K::differential_evolution,
       {{"population", integer_setter([](OptimizerOptions& o) -> std::optional<int>& { return o.de.population; }, 4)},
        {"mutation", number_setter([](OptimizerOptions& o) -> double& { return o.de.mutation; })},
        {"crossover", number_setter([](OptimizerOptions& o) -> double& { return o.de.crossover; })},
        {"tol", number_setter([](OptimizerOptions& o) -> double& { return o.de.tol; })},
        {"polish", [](const json& j, const std::string& w, OptimizerOptions& o) { o.de.polish = get_bool(j, w); }}}},
      {K::basin_hopping,
       {{"step_fraction", number_setter([](OptimizerOptions& o) -> double& { return o.bh.step_fraction; })},
        {"temperature", number_setter([](OptimizerOptions& o) -> std::optional<double>& { return o.bh.temperature; })},
        {"probe_points", integer_setter([](OptimizerOptions& o) -> int& { return o.bh.probe_points; }, 2)},
        {"local_iters", integer_setter([](OptimizerOptions& o) -> int& { return o.bh.local_iters; }, 1)},
        {"hops", integer_setter([](OptimizerOptions& o) -> int& { return o.bh.hops; }, 1)}}},
      {K::dual_annealing,
       {{"initial_temp", number_setter([](OptimizerOptions& o) -> double& { return o.da.initial_temp; })},
        {"restart_temp_ratio", number_setter([](OptimizerOptions& o) -> double& { return o.da.restart_temp_ratio; })},
        {"visit", number_setter([](OptimizerOptions& o) -> double& { return o.da.visit; })},
        {"accept", number_setter([](OptimizerOptions& o) -> double& { return o.da.accept; })},
        {"max_iters", integer_setter([](OptimizerOptions& o) -> int& { return o.da.max_iters; }, 1)}}},
      {K::fast_slow,
       {{"n_samples", integer_setter([](OptimizerOptions& o) -> std::optional<int>& { return o.fs.n_samples; }, 1)},
        {"local",
         [](const json& j, const std::string& w, OptimizerOptions& o) {
           if (!j.is_string()) fail(w, "expected an optimizer name");
           try {
             o.fs.local_kind = parse_optimizer_kind(j.get<std::string>());
           } catch (const Error& e) {
             fail(w, e.detail());
           }
           if (!is_local(o.fs.local_kind)) fail(w, "must name a local optimizer");
         }},
        {"surrogate_starts", integer_setter([](OptimizerOptions& o) -> int& { return o.fs.surrogate_starts; }, 1)},
        {"length_scale_fraction", number_setter([](OptimizerOptions& o) -> double& { return o.fs.length_scale_fraction; })},
        {"noise", number_setter([](OptimizerOptions& o) -> std::optional<double>& { return o.fs.noise; })}}},
  };
  return tables.at(kind);
}

void apply_options_at(OptimizerKind kind, const json& options, OptimizerOptions& target, const std::string& where) {
  if (!options.is_object()) fail(where, "expected an object");
  const auto& table = option_table(kind);
  for (const auto& item : options.items()) {
    const auto it = table.find(item.key());
    if (it == table.end()) fail(where + "." + item.key(), "unknown option for " + to_string(kind));
    it->second(item.value(), where + "." + item.key(), target);
  }
}

OptimizerSpec parse_optimizer(const json& j, const std::string& where) {
  check_keys(j, where, {"kind", "label", "max_evals", "max_iters", "seed", "options"});
  if (!j.contains("kind") || !j["kind"].is_string()) fail(where + ".kind", "expected an optimizer name");
  OptimizerSpec spec;
  try {
    spec.kind = parse_optimizer_kind(j["kind"].get<std::string>());
  } catch (const Error& e) {
    fail(where + ".kind", e.detail());
  }
  if (j.contains("label")) {
    if (!j["label"].is_string()) fail(where + ".label", "expected a string");
    spec.label = j["label"].get<std::string>();
  }
  if (j.contains("max_evals")) spec.budget.max_evals = static_cast<std::uint64_t>(get_integer(j["max_evals"], where + ".max_evals", 1));
  if (j.contains("max_iters")) spec.budget.max_iters = static_cast<int>(get_integer(j["max_iters"], where + ".max_iters", 1));
  if (!spec.budget.max_evals && !spec.budget.max_iters) fail(where, "needs max_evals or max_iters");
  if (j.contains("seed")) spec.seed = get_seed(j["seed"], where + ".seed");
  if (j.contains("options")) apply_options_at(spec.kind, j["options"], spec.options, where + ".options");
  return spec;
}

ScanSettings parse_scan(const json& j, const std::string& where) {
  check_keys(j, where, {"resolution", "beta", "gamma", "a", "b", "seed", "center"});
  ScanSettings scan;
  if (j.contains("resolution")) scan.resolution = static_cast<int>(get_integer(j["resolution"], where + ".resolution", 2));
  if (j.contains("beta")) scan.beta = get_range(j["beta"], where + ".beta");
  if (j.contains("gamma")) scan.gamma = get_range(j["gamma"], where + ".gamma");
  if (j.contains("a")) scan.a = get_range(j["a"], where + ".a");
  if (j.contains("b")) scan.b = get_range(j["b"], where + ".b");
  if (j.contains("seed")) scan.seed = get_seed(j["seed"], where + ".seed");
  if (j.contains("center")) {
    const json& c = j["center"];
    check_keys(c, where + ".center", {"beta", "gamma"});
    if (!c.contains("beta") || !c.contains("gamma")) fail(where + ".center", "needs beta and gamma");
    try {
      scan.center = QaoaParams(get_vector(c["beta"], where + ".center.beta"), get_vector(c["gamma"], where + ".center.gamma"));
    } catch (const Error& e) {
      if (e.code() == Errc::configuration) throw;
      fail(where + ".center", e.detail());
    }
  }
  return scan;
}

SimulationMode parse_mode(const json& j, const std::string& where) {
  check_keys(j, where, {"type", "shots", "seed"});
  SimulationMode mode;
  if (j.contains("type")) {
    const std::string type = j["type"].is_string() ? j["type"].get<std::string>() : "";
    if (type == "exact") mode.kind = SimulationMode::Kind::exact;
    else if (type == "shots") mode.kind = SimulationMode::Kind::shots;
    else fail(where + ".type", "expected \"exact\" or \"shots\"");
  }
  if (j.contains("shots")) mode.shots = static_cast<std::uint64_t>(get_integer(j["shots"], where + ".shots", 1));
  if (j.contains("seed")) mode.seed = get_seed(j["seed"], where + ".seed");
  return mode;
}

std::string last_key(const std::string& message) {
  // Messages start with a dotted path such as "optimizers[0].options.tol: ...".
  const std::string path = message.substr(0, message.find(": "));
  std::string key = path.substr(path.find_last_of('.') == std::string::npos ? 0 : path.find_last_of('.') + 1);
  return key.substr(0, key.find('['));
}

}  // namespace

const Instance& RunConfig::require_instance() const {
  if (!instance) throw Error(Errc::configuration, "config: no instance or instance_file given");
  return *instance;
}

BenchmarkConfig RunConfig::benchmark() const {
  BenchmarkConfig bench;
  bench.instance = require_instance();
  bench.encoding = encoding;
  bench.layers = layers;
  bench.mode = mode;
  bench.optimizers = optimizers;
  bench.restarts = restarts;
  bench.seed = seed;
  bench.jobs = jobs;
  return bench;
}

nlohmann::json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_and_column(text, e.byte == 0 ? 0 : e.byte - 1);
    std::string detail = e.what();
    if (const auto pos = detail.find("syntax error"); pos != std::string::npos) detail = detail.substr(pos);
    throw Error(Errc::configuration,
                source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + detail);
  }
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_json_text(buffer.str(), path.string());
}

Instance load_instance(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  try {
    return instance_from_json(j);
  } catch (const json::exception& e) {
    throw Error(Errc::configuration, path.string() + ": " + e.what());
  }
}

void apply_optimizer_options(OptimizerKind kind, const nlohmann::json& options, OptimizerOptions& target) {
  apply_options_at(kind, options, target, "options");
}

RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  check_keys(j, "config",
             {"instance", "instance_file", "encoding", "layers", "mode", "optimizers", "restarts", "seed", "jobs",
              "scan", "output"});
  RunConfig config;
  if (j.contains("instance") && j.contains("instance_file")) fail("config.instance", "give instance or instance_file, not both");
  if (j.contains("instance")) {
    try {
      config.instance = instance_from_json(j["instance"]);
    } catch (const json::exception& e) {
      fail("config.instance", e.what());
    }
  }
  if (j.contains("instance_file")) {
    if (!j["instance_file"].is_string()) fail("config.instance_file", "expected a path");
    std::filesystem::path file = j["instance_file"].get<std::string>();
    if (file.is_relative() && !base_dir.empty()) file = base_dir / file;
    config.instance = load_instance(file);
  }
  if (j.contains("encoding")) {
    const json& e = j["encoding"];
    check_keys(e, "config.encoding", {"penalty", "scale"});
    if (e.contains("penalty")) config.encoding.penalty = get_auto_or_number(e["penalty"], "config.encoding.penalty");
    if (e.contains("scale")) config.encoding.scale = get_auto_or_number(e["scale"], "config.encoding.scale");
  }
  if (j.contains("layers")) config.layers = static_cast<int>(get_integer(j["layers"], "config.layers", 1));
  if (j.contains("mode")) config.mode = parse_mode(j["mode"], "config.mode");
  if (j.contains("optimizers")) {
    const json& list = j["optimizers"];
    if (!list.is_array()) fail("config.optimizers", "expected an array");
    for (std::size_t i = 0; i < list.size(); ++i)
      config.optimizers.push_back(parse_optimizer(list[i], "config.optimizers[" + std::to_string(i) + "]"));
  }
  if (j.contains("restarts")) config.restarts = static_cast<int>(get_integer(j["restarts"], "config.restarts", 1));
  if (j.contains("seed")) config.seed = get_seed(j["seed"], "config.seed");
  if (j.contains("jobs")) config.jobs = static_cast<int>(get_integer(j["jobs"], "config.jobs", 1));
  if (j.contains("scan")) config.scan = parse_scan(j["scan"], "config.scan");
  if (j.contains("output")) {
    if (!j["output"].is_string()) fail("config.output", "expected a path");
    config.output = j["output"].get<std::string>();
  }
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  const json j = parse_json_text(text, path.string());
  try {
    return parse_run_config(j, path.parent_path());
  } catch (const Error& e) {
    if (e.code() != Errc::configuration) throw;
    const std::string key = last_key(e.detail());
    const auto pos = key.empty() ? std::string::npos : text.find("\"" + key + "\"");
    if (pos == std::string::npos) throw Error(Errc::configuration, path.string() + ": " + e.detail());
    const auto [line, column] = line_and_column(text, pos);
    throw Error(Errc::configuration,
                path.string() + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + e.detail());
  }
}

}  // namespace qaoalab
