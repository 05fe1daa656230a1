#pragma once

#include <limits>
#include <string>
#include <vector>

#include "qaoalab/optimizers.hpp"

namespace qaoalab::detail {

/// Thrown by Evaluator instead of issuing a call beyond max_evals.
struct BudgetExhausted {};

class Evaluator {
 public:
  Evaluator(const Objective& objective, const SearchSpace& space, std::optional<std::uint64_t> max_evals)
      : objective_(objective), space_(space), max_evals_(max_evals) {}

  double operator()(const Eigen::VectorXd& x) {
    if (exhausted()) throw BudgetExhausted{};
    const Eigen::VectorXd point = space_.clip(x);
    const double value = objective_(point);
    trace_.push_back(value);
    if (trace_.size() == 1 || value < best_value_) {
      best_value_ = value;
      best_point_ = point;
    }
    return value;
  }

  bool exhausted() const { return max_evals_ && trace_.size() >= *max_evals_; }
  std::uint64_t count() const { return trace_.size(); }
  std::optional<std::uint64_t> remaining() const {
    if (!max_evals_) return std::nullopt;
    return *max_evals_ - trace_.size();
  }
  std::optional<std::uint64_t> max_evals() const { return max_evals_; }

  double best_value() const { return best_value_; }
  const Eigen::VectorXd& best_point() const { return best_point_; }
  const std::vector<double>& trace() const { return trace_; }

 private:
  const Objective& objective_;
  const SearchSpace& space_;
  std::optional<std::uint64_t> max_evals_;
  std::vector<double> trace_;
  double best_value_ = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_point_;
};

/// Shared state of one optimizer run; fields survive BudgetExhausted.
struct RunState {
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> notes;
};

struct Context {
  Evaluator& eval;
  const SearchSpace& space;
  const Budget& budget;
  std::mt19937_64& rng;
  const OptimizerOptions& options;
  RunState& state;

  bool iteration_allowed() const { return !budget.max_iters || state.iterations < *budget.max_iters; }
};

struct LocalResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

using ScalarFunction = std::function<double(const Eigen::VectorXd&)>;

/// Bounded Nelder-Mead on an arbitrary function (used for the objective and
/// for surrogate minimization). `on_iteration` runs after each completed
/// iteration. Vertices are clipped into the space.
LocalResult nelder_mead(const ScalarFunction& f, const SearchSpace& space, const Eigen::VectorXd& x0,
                        const NelderMeadOptions& options, std::optional<int> max_iters,
                        const std::function<void()>& on_iteration = {});

// Local algorithms starting from x0; iterations count into ctx.state.
void run_nelder_mead(Context& ctx, const Eigen::VectorXd& x0);
void run_powell(Context& ctx, const Eigen::VectorXd& x0);
void run_spsa(Context& ctx, const Eigen::VectorXd& x0);
void run_umda(Context& ctx);
void run_local(OptimizerKind kind, Context& ctx, const Eigen::VectorXd& x0);

void run_differential_evolution(Context& ctx);
void run_basin_hopping(Context& ctx);
void run_dual_annealing(Context& ctx);
void run_fast_slow(Context& ctx, int n_samples, OptimizerKind local_kind);

}  // namespace qaoalab::detail
