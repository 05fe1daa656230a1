#pragma once

// Derivative-free local and global minimizers sharing one budgeted contract.
//
// Every evaluation goes through a budget guard: points are clipped into the
// search space, no call is issued once max_evals is reached, and the full
// trace of values is recorded in evaluation order.

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "qaoalab/simulator.hpp"

namespace qaoalab {

using Objective = std::function<double(const Eigen::VectorXd&)>;

class SearchSpace {
 public:
  SearchSpace(Eigen::VectorXd lower, Eigen::VectorXd upper);

  /// beta in [0, pi], gamma in [0, 2 pi] for each of the p layers.
  static SearchSpace qaoa(int layers);

  int dimension() const { return static_cast<int>(lower_.size()); }
  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }
  Eigen::VectorXd width() const { return upper_ - lower_; }
  Eigen::VectorXd clip(const Eigen::VectorXd& x) const { return x.cwiseMax(lower_).cwiseMin(upper_); }
  bool contains(const Eigen::VectorXd& x) const {
    return x.size() == lower_.size() && (x.array() >= lower_.array()).all() && (x.array() <= upper_.array()).all();
  }
  Eigen::VectorXd uniform(std::mt19937_64& rng) const;

 private:
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
};

/// One iteration is a simplex update (NM), a sweep over all directions
/// (Powell), a gradient estimate (SPSA), a generation (UMDA, DE), a hop (BH),
/// an annealing step (DA), or a step of the local phase (FS).
struct Budget {
  std::optional<std::uint64_t> max_evals;
  std::optional<int> max_iters;

  static Budget evals(std::uint64_t n) { return {n, std::nullopt}; }
  static Budget iterations(int n) { return {std::nullopt, n}; }

  void validate() const;
};

struct OptimizerRun {
  Eigen::VectorXd best_point;
  double best_value = 0.0;
  std::uint64_t n_evals = 0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;  // value of evaluation i at position i
  std::uint64_t seed = 0;
  std::string optimizer_id;
  std::vector<std::string> notes;

  QaoaParams best_params() const { return QaoaParams::from_flat(best_point); }
};

enum class OptimizerKind {
  nelder_mead,
  powell,
  spsa,
  umda,
  differential_evolution,
  basin_hopping,
  dual_annealing,
  fast_slow,
};

std::string to_string(OptimizerKind kind);
OptimizerKind parse_optimizer_kind(const std::string& name);  // "NM", "Powell", ..., case-insensitive
bool is_local(OptimizerKind kind);

struct NelderMeadOptions {
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  double initial_step = 0.05;  // fraction of each bound width
  double xatol = 1e-4;
  double fatol = 1e-4;
};

struct PowellOptions {
  double ftol = 1e-4;
  double xtol = 1e-4;
};

struct SpsaOptions {
  std::optional<double> learning_rate;  // a; calibrated when unset
  double perturbation = 0.2;            // c
  double alpha = 0.602;
  double gamma = 0.101;
  double target_magnitude = 0.6283185307179586;  // first step size targeted by calibration
  int calibration_steps = 10;
  std::optional<double> stability;  // A; 10% of the iteration cap when unset
};

struct UmdaOptions {
  int population = 20;
  double elite_fraction = 0.5;
};

struct DifferentialEvolutionOptions {
  std::optional<int> population;  // 15 * dim, capped to the eval budget
  double mutation = 0.8;
  double crossover = 0.7;
  double tol = 0.01;
  bool polish = true;  // Nelder-Mead refinement of the best member
};

struct BasinHoppingOptions {
  double step_fraction = 0.25;
  std::optional<double> temperature;  // std. dev. over probe points when unset
  int probe_points = 20;
  int local_iters = 200;
  int hops = 100;  // used when the budget has no iteration cap
};

struct DualAnnealingOptions {
  double initial_temp = 5230.0;
  double restart_temp_ratio = 2e-5;
  double visit = 2.62;
  double accept = -5.0;
  int max_iters = 1000;  // used when the budget has no iteration cap
};

struct FastSlowOptions {
  std::optional<int> n_samples;  // min(max_evals / 2, 2000), or 50 * dim without an eval cap
  OptimizerKind local_kind = OptimizerKind::nelder_mead;
  int surrogate_starts = 10;
  double length_scale_fraction = 0.2;
  std::optional<double> noise;  // 1e-6 when unset
};

struct OptimizerOptions {
  NelderMeadOptions nm;
  PowellOptions powell;
  SpsaOptions spsa;
  UmdaOptions umda;
  DifferentialEvolutionOptions de;
  BasinHoppingOptions bh;
  DualAnnealingOptions da;
  FastSlowOptions fs;
};

/// Any optimizer by kind. The initial point (where one is used) is drawn
/// uniformly from the space.
OptimizerRun minimize(OptimizerKind kind, const Objective& objective, const SearchSpace& space,
                      const Budget& budget, std::uint64_t seed, const OptimizerOptions& options = {});

/// NM, Powell, SPSA or UMDA.
OptimizerRun minimize_local(OptimizerKind kind, const Objective& objective, const SearchSpace& space,
                            const Budget& budget, std::uint64_t seed, const OptimizerOptions& options = {});

/// DE, BH or DA.
OptimizerRun minimize_global(OptimizerKind kind, const Objective& objective, const SearchSpace& space,
                             const Budget& budget, std::uint64_t seed, const OptimizerOptions& options = {});

/// Space-filling sampling, Gaussian-process surrogate, then a local descent
/// from the surrogate minimum with the remaining budget.
OptimizerRun fast_slow(const Objective& objective, const SearchSpace& space, const Budget& budget,
                       std::uint64_t seed, int n_samples, OptimizerKind local_kind,
                       const OptimizerOptions& options = {});

// ---- Gaussian-process surrogate ----------------------------------------------

struct KernelParams {
  Eigen::VectorXd length_scales;  // squared-exponential, one per dimension
  double signal_variance = 1.0;
  double noise_variance = 1e-6;
  double jitter = 1e-8;
};

/// Exact GP regression with a zero prior mean.
class GpSurrogate {
 public:
  /// points: one sample per row.
  static GpSurrogate fit(const Eigen::MatrixXd& points, const Eigen::VectorXd& values, const KernelParams& kernel);

  double mean(const Eigen::VectorXd& x) const;
  double variance(const Eigen::VectorXd& x) const;

  const Eigen::MatrixXd& points() const { return points_; }
  const Eigen::VectorXd& values() const { return values_; }
  const KernelParams& kernel() const { return kernel_; }

 private:
  Eigen::VectorXd cross_covariance(const Eigen::VectorXd& x) const;

  Eigen::MatrixXd points_;
  Eigen::VectorXd values_;
  KernelParams kernel_;
  Eigen::LLT<Eigen::MatrixXd> factor_;
  Eigen::VectorXd weights_;
};

GpSurrogate fit_surrogate(const Eigen::MatrixXd& points, const Eigen::VectorXd& values, const KernelParams& kernel);

/// One point per stratum along every axis, strata independently permuted.
Eigen::MatrixXd latin_hypercube(const SearchSpace& space, int count, std::mt19937_64& rng);

void write_trace_csv(const OptimizerRun& run, std::ostream& out);

}  // namespace qaoalab
