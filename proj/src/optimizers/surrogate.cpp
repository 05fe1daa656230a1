#include <algorithm>
#include <numeric>

#include "detail.hpp"

namespace qaoalab {

GpSurrogate GpSurrogate::fit(const Eigen::MatrixXd& points, const Eigen::VectorXd& values,
                             const KernelParams& kernel) {
  if (points.rows() < 1) throw Error(Errc::invalid_argument, "surrogate needs at least one training point");
  if (values.size() != points.rows()) throw Error(Errc::dimension_mismatch, "one value per training point required");
  if (kernel.length_scales.size() != points.cols()) {
    throw Error(Errc::dimension_mismatch, "one length-scale per dimension required");
  }
  if (!(kernel.length_scales.array() > 0.0).all() || !(kernel.signal_variance > 0.0) ||
      kernel.noise_variance < 0.0 || kernel.jitter < 0.0) {
    throw Error(Errc::invalid_argument, "kernel hyperparameters must be positive");
  }

  GpSurrogate gp;
  gp.points_ = points;
  gp.values_ = values;
  gp.kernel_ = kernel;

  const Eigen::Index m = points.rows();
  const Eigen::MatrixXd scaled = points.array().rowwise() / kernel.length_scales.transpose().array();
  Eigen::MatrixXd cov(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    cov(i, i) = kernel.signal_variance;
    for (Eigen::Index j = i + 1; j < m; ++j) {
      const double d2 = (scaled.row(i) - scaled.row(j)).squaredNorm();
      cov(i, j) = cov(j, i) = kernel.signal_variance * std::exp(-0.5 * d2);
    }
  }
  cov.diagonal().array() += kernel.noise_variance + kernel.jitter;
  gp.factor_.compute(cov);
  if (gp.factor_.info() != Eigen::Success) {
    throw Error(Errc::conditioning, "kernel matrix is not positive definite after jitter");
  }
  gp.weights_ = gp.factor_.solve(values);
  if (!gp.weights_.allFinite()) throw Error(Errc::conditioning, "kernel solve produced non-finite weights");
  return gp;
}

Eigen::VectorXd GpSurrogate::cross_covariance(const Eigen::VectorXd& x) const {
  if (x.size() != points_.cols()) throw Error(Errc::dimension_mismatch, "query dimension mismatch");
  const Eigen::VectorXd inv = kernel_.length_scales.cwiseInverse();
  Eigen::VectorXd k(points_.rows());
  for (Eigen::Index i = 0; i < points_.rows(); ++i) {
    const double d2 = ((points_.row(i).transpose() - x).cwiseProduct(inv)).squaredNorm();
    k(i) = kernel_.signal_variance * std::exp(-0.5 * d2);
  }
  return k;
}

double GpSurrogate::mean(const Eigen::VectorXd& x) const { return cross_covariance(x).dot(weights_); }

double GpSurrogate::variance(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd k = cross_covariance(x);
  const Eigen::VectorXd v = factor_.matrixL().solve(k);
  return std::max(0.0, kernel_.signal_variance - v.squaredNorm());
}

GpSurrogate fit_surrogate(const Eigen::MatrixXd& points, const Eigen::VectorXd& values, const KernelParams& kernel) {
  return GpSurrogate::fit(points, values, kernel);
}

namespace detail {

void run_fast_slow(Context& ctx, int n_samples, OptimizerKind local_kind) {
  const auto& o = ctx.options.fs;
  const int dim = ctx.space.dimension();

  // Phase 1: space-filling samples of the true objective.
  const Eigen::MatrixXd samples = latin_hypercube(ctx.space, n_samples, ctx.rng);
  Eigen::VectorXd values(n_samples);
  for (int i = 0; i < n_samples; ++i) values(i) = ctx.eval(samples.row(i).transpose());

  std::vector<int> order(static_cast<std::size_t>(n_samples));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return values(a) < values(b); });
  Eigen::VectorXd start = samples.row(order.front()).transpose();

  try {
    KernelParams kernel;
    kernel.length_scales = o.length_scale_fraction * ctx.space.width();
    const double mean = values.mean();
    const double var = n_samples > 1 ? (values.array() - mean).square().sum() / (n_samples - 1) : 0.0;
    kernel.signal_variance = std::max(var, 1e-12);
    kernel.noise_variance = o.noise.value_or(1e-6);
    const GpSurrogate gp = GpSurrogate::fit(samples, values, kernel);

    // Minimize the posterior mean from the best samples plus random starts.
    std::vector<Eigen::VectorXd> starts;
    const int from_samples = std::min({5, n_samples, o.surrogate_starts});
    for (int i = 0; i < from_samples; ++i) starts.push_back(samples.row(order[static_cast<std::size_t>(i)]).transpose());
    while (static_cast<int>(starts.size()) < std::max(o.surrogate_starts, 1)) starts.push_back(ctx.space.uniform(ctx.rng));

    auto posterior_mean = [&gp](const Eigen::VectorXd& x) { return gp.mean(x); };
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : starts) {
      const auto res = nelder_mead(posterior_mean, ctx.space, s, ctx.options.nm, 100 * dim);
      if (res.value < best) {
        best = res.value;
        start = res.x;
      }
    }
  } catch (const Error& e) {
    if (e.code() != Errc::conditioning) throw;
    ctx.state.notes.emplace_back("surrogate fit failed; phase 2 starts from the best sample");
  }

  // Phase 2: local descent on the true objective with the remaining budget.
  run_local(local_kind, ctx, start);
}

}  // namespace detail
}  // namespace qaoalab
