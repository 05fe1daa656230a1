#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <ostream>

#include "detail.hpp"

namespace qaoalab {

namespace {

// Bounds the cubic cost of the surrogate fit.
constexpr std::uint64_t kMaxDefaultSamples = 2000;

}  // namespace

SearchSpace::SearchSpace(Eigen::VectorXd lower, Eigen::VectorXd upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() == 0 || lower_.size() != upper_.size()) {
    throw Error(Errc::invalid_argument, "search space bounds must be nonempty and of equal length");
  }
  if (!lower_.allFinite() || !upper_.allFinite() || !(lower_.array() < upper_.array()).all()) {
    throw Error(Errc::invalid_argument, "degenerate search space: need finite lower < upper in every dimension");
  }
}

SearchSpace SearchSpace::qaoa(int layers) {
  if (layers < 1) throw Error(Errc::invalid_argument, "need at least one layer");
  Eigen::VectorXd upper(2 * layers);
  upper << Eigen::VectorXd::Constant(layers, std::numbers::pi), Eigen::VectorXd::Constant(layers, 2 * std::numbers::pi);
  return SearchSpace(Eigen::VectorXd::Zero(2 * layers), upper);
}

Eigen::VectorXd SearchSpace::uniform(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::VectorXd x(lower_.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = lower_(i) + unit(rng) * (upper_(i) - lower_(i));
  return x;
}

void Budget::validate() const {
  if (!max_evals && !max_iters) throw Error(Errc::configuration, "empty budget: set max_evals or max_iters");
  if (max_evals && *max_evals == 0) throw Error(Errc::configuration, "max_evals must be positive");
  if (max_iters && *max_iters <= 0) throw Error(Errc::configuration, "max_iters must be positive");
}

std::string to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::nelder_mead: return "NM";
    case OptimizerKind::powell: return "Powell";
    case OptimizerKind::spsa: return "SPSA";
    case OptimizerKind::umda: return "UMDA";
    case OptimizerKind::differential_evolution: return "DE";
    case OptimizerKind::basin_hopping: return "BH";
    case OptimizerKind::dual_annealing: return "DA";
    case OptimizerKind::fast_slow: return "FS";
  }
  return "?";
}

OptimizerKind parse_optimizer_kind(const std::string& name) {
  std::string key;
  for (char c : name) key.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  static const std::pair<const char*, OptimizerKind> table[] = {
      {"NM", OptimizerKind::nelder_mead},          {"NELDER-MEAD", OptimizerKind::nelder_mead},
      {"POWELL", OptimizerKind::powell},           {"SPSA", OptimizerKind::spsa},
      {"UMDA", OptimizerKind::umda},               {"DE", OptimizerKind::differential_evolution},
      {"BH", OptimizerKind::basin_hopping},        {"DA", OptimizerKind::dual_annealing},
      {"FS", OptimizerKind::fast_slow},            {"FAST-SLOW", OptimizerKind::fast_slow},
  };
  for (const auto& [label, kind] : table)
    if (key == label) return kind;
  throw Error(Errc::configuration, "unknown optimizer '" + name + "'");
}

bool is_local(OptimizerKind kind) {
  return kind == OptimizerKind::nelder_mead || kind == OptimizerKind::powell || kind == OptimizerKind::spsa ||
         kind == OptimizerKind::umda;
}

namespace {

OptimizerRun drive(OptimizerKind kind, const Objective& objective, const SearchSpace& space, const Budget& budget,
                   std::uint64_t seed, const OptimizerOptions& options,
                   const std::function<void(detail::Context&)>& body) {
  budget.validate();
  detail::Evaluator eval(objective, space, budget.max_evals);
  std::mt19937_64 rng(seed);
  detail::RunState state;
  detail::Context ctx{eval, space, budget, rng, options, state};
  try {
    body(ctx);
  } catch (const detail::BudgetExhausted&) {
    state.notes.emplace_back("evaluation budget exhausted");
  }
  if (eval.count() == 0) throw Error(Errc::configuration, "optimizer finished without evaluating the objective");

  OptimizerRun run;
  run.best_point = eval.best_point();
  run.best_value = eval.best_value();
  run.n_evals = eval.count();
  run.iterations = state.iterations;
  run.converged = state.converged;
  run.trace = eval.trace();
  run.seed = seed;
  run.optimizer_id = to_string(kind);
  run.notes = std::move(state.notes);
  return run;
}

}  // namespace

namespace detail {

void run_local(OptimizerKind kind, Context& ctx, const Eigen::VectorXd& x0) {
  switch (kind) {
    case OptimizerKind::nelder_mead: return run_nelder_mead(ctx, x0);
    case OptimizerKind::powell: return run_powell(ctx, x0);
    case OptimizerKind::spsa: return run_spsa(ctx, x0);
    case OptimizerKind::umda: return run_umda(ctx);
    default: throw Error(Errc::invalid_argument, to_string(kind) + " is not a local optimizer");
  }
}

}  // namespace detail

OptimizerRun minimize(OptimizerKind kind, const Objective& objective, const SearchSpace& space, const Budget& budget,
                      std::uint64_t seed, const OptimizerOptions& options) {
  if (kind == OptimizerKind::fast_slow) {
    int samples = 0;
    if (options.fs.n_samples) {
      samples = *options.fs.n_samples;
    } else {
      samples = budget.max_evals ? static_cast<int>(std::min<std::uint64_t>(*budget.max_evals / 2, kMaxDefaultSamples))
                                 : 50 * space.dimension();
    }
    return fast_slow(objective, space, budget, seed, samples, options.fs.local_kind, options);
  }
  if (is_local(kind)) return minimize_local(kind, objective, space, budget, seed, options);
  return minimize_global(kind, objective, space, budget, seed, options);
}

OptimizerRun minimize_local(OptimizerKind kind, const Objective& objective, const SearchSpace& space,
                            const Budget& budget, std::uint64_t seed, const OptimizerOptions& options) {
  if (!is_local(kind)) throw Error(Errc::invalid_argument, to_string(kind) + " is not a local optimizer");
  return drive(kind, objective, space, budget, seed, options, [kind](detail::Context& ctx) {
    const Eigen::VectorXd x0 = ctx.space.uniform(ctx.rng);
    detail::run_local(kind, ctx, x0);
  });
}

OptimizerRun minimize_global(OptimizerKind kind, const Objective& objective, const SearchSpace& space,
                             const Budget& budget, std::uint64_t seed, const OptimizerOptions& options) {
  switch (kind) {
    case OptimizerKind::differential_evolution:
      return drive(kind, objective, space, budget, seed, options, detail::run_differential_evolution);
    case OptimizerKind::basin_hopping:
      return drive(kind, objective, space, budget, seed, options, detail::run_basin_hopping);
    case OptimizerKind::dual_annealing:
      return drive(kind, objective, space, budget, seed, options, detail::run_dual_annealing);
    default: throw Error(Errc::invalid_argument, to_string(kind) + " is not a DE/BH/DA global optimizer");
  }
}

OptimizerRun fast_slow(const Objective& objective, const SearchSpace& space, const Budget& budget,
                       std::uint64_t seed, int n_samples, OptimizerKind local_kind, const OptimizerOptions& options) {
  if (!is_local(local_kind)) throw Error(Errc::configuration, "fast-slow needs a local optimizer for phase 2");
  if (n_samples < 1) throw Error(Errc::configuration, "fast-slow needs at least one sample");
  if (budget.max_evals && static_cast<std::uint64_t>(n_samples) >= *budget.max_evals) {
    throw Error(Errc::configuration, "fast-slow sample count must be below max_evals");
  }
  return drive(OptimizerKind::fast_slow, objective, space, budget, seed, options,
               [n_samples, local_kind](detail::Context& ctx) { detail::run_fast_slow(ctx, n_samples, local_kind); });
}

Eigen::MatrixXd latin_hypercube(const SearchSpace& space, int count, std::mt19937_64& rng) {
  const int dim = space.dimension();
  Eigen::MatrixXd points(count, dim);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<int> strata(static_cast<std::size_t>(count));
  for (int d = 0; d < dim; ++d) {
    for (int k = 0; k < count; ++k) strata[static_cast<std::size_t>(k)] = k;
    std::shuffle(strata.begin(), strata.end(), rng);
    for (int k = 0; k < count; ++k) {
      const double u = (strata[static_cast<std::size_t>(k)] + unit(rng)) / count;
      points(k, d) = space.lower()(d) + u * (space.upper()(d) - space.lower()(d));
    }
  }
  return points;
}

void write_trace_csv(const OptimizerRun& run, std::ostream& out) {
  out << "eval_index,value\n";
  const auto old_precision = out.precision(17);
  for (std::size_t i = 0; i < run.trace.size(); ++i) out << i << ',' << run.trace[i] << '\n';
  out.precision(old_precision);
}

}  // namespace qaoalab
