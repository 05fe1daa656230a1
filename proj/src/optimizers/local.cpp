#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/tools/minima.hpp>

#include "detail.hpp"

namespace qaoalab::detail {

LocalResult nelder_mead(const ScalarFunction& f, const SearchSpace& space, const Eigen::VectorXd& x0,
                        const NelderMeadOptions& o, std::optional<int> max_iters,
                        const std::function<void()>& on_iteration) {
  const int n = space.dimension();
  const Eigen::VectorXd width = space.width();
  std::vector<Eigen::VectorXd> simplex(static_cast<std::size_t>(n + 1));
  std::vector<double> values(static_cast<std::size_t>(n + 1));

  simplex[0] = space.clip(x0);
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXd v = simplex[0];
    const double step = o.initial_step * width(k);
    if (v(k) + step <= space.upper()(k)) v(k) += step;
    else v(k) -= step;
    simplex[static_cast<std::size_t>(k + 1)] = v;
  }
  for (int i = 0; i <= n; ++i) values[static_cast<std::size_t>(i)] = f(simplex[static_cast<std::size_t>(i)]);

  std::vector<int> order(static_cast<std::size_t>(n + 1));
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return values[a] < values[b]; });
    std::vector<Eigen::VectorXd> s(simplex.size());
    std::vector<double> v(values.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      s[i] = simplex[static_cast<std::size_t>(order[i])];
      v[i] = values[static_cast<std::size_t>(order[i])];
    }
    simplex.swap(s);
    values.swap(v);
  };

  LocalResult result;
  const auto last = static_cast<std::size_t>(n);
  while (true) {
    sort_simplex();
    double spread_x = 0.0;
    double spread_f = 0.0;
    for (std::size_t i = 1; i <= last; ++i) {
      spread_x = std::max(spread_x, (simplex[i] - simplex[0]).cwiseAbs().maxCoeff());
      spread_f = std::max(spread_f, std::abs(values[i] - values[0]));
    }
    if (spread_x <= o.xatol && spread_f <= o.fatol) {
      result.converged = true;
      break;
    }
    if (max_iters && result.iterations >= *max_iters) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < last; ++i) centroid += simplex[i];
    centroid /= n;
    const Eigen::VectorXd& worst = simplex[last];

    const Eigen::VectorXd reflected = space.clip(centroid + o.reflection * (centroid - worst));
    const double f_reflected = f(reflected);
    bool shrink = false;

    if (f_reflected < values[0]) {
      const Eigen::VectorXd expanded = space.clip(centroid + o.expansion * (reflected - centroid));
      const double f_expanded = f(expanded);
      if (f_expanded < f_reflected) {
        simplex[last] = expanded;
        values[last] = f_expanded;
      } else {
        simplex[last] = reflected;
        values[last] = f_reflected;
      }
    } else if (f_reflected < values[last - 1]) {
      simplex[last] = reflected;
      values[last] = f_reflected;
    } else if (f_reflected < values[last]) {
      const Eigen::VectorXd outside = space.clip(centroid + o.contraction * (reflected - centroid));
      const double f_outside = f(outside);
      if (f_outside <= f_reflected) {
        simplex[last] = outside;
        values[last] = f_outside;
      } else {
        shrink = true;
      }
    } else {
      const Eigen::VectorXd inside = space.clip(centroid + o.contraction * (worst - centroid));
      const double f_inside = f(inside);
      if (f_inside < values[last]) {
        simplex[last] = inside;
        values[last] = f_inside;
      } else {
        shrink = true;
      }
    }

    if (shrink) {
      for (std::size_t i = 1; i <= last; ++i) {
        simplex[i] = space.clip(simplex[0] + o.shrink * (simplex[i] - simplex[0]));
        values[i] = f(simplex[i]);
      }
    }
    ++result.iterations;
    if (on_iteration) on_iteration();
  }
  result.x = simplex[0];
  result.value = values[0];
  return result;
}

void run_nelder_mead(Context& ctx, const Eigen::VectorXd& x0) {
  const auto res = nelder_mead([&ctx](const Eigen::VectorXd& x) { return ctx.eval(x); }, ctx.space, x0,
                               ctx.options.nm, ctx.budget.max_iters, [&ctx] { ++ctx.state.iterations; });
  ctx.state.converged = res.converged;
}

namespace {

struct LineResult {
  double step = 0.0;
  double value = 0.0;
};

// Bounded Brent search along x + t d over the feasible segment.
LineResult line_search(Context& ctx, const Eigen::VectorXd& x, const Eigen::VectorXd& d, double fx) {
  double t_min = -std::numeric_limits<double>::infinity();
  double t_max = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < d.size(); ++k) {
    if (d(k) == 0.0) continue;
    double a = (ctx.space.lower()(k) - x(k)) / d(k);
    double b = (ctx.space.upper()(k) - x(k)) / d(k);
    if (a > b) std::swap(a, b);
    t_min = std::max(t_min, a);
    t_max = std::min(t_max, b);
  }
  if (!(t_min < t_max) || !std::isfinite(t_min) || !std::isfinite(t_max)) return {0.0, fx};

  auto along = [&](double t) { return ctx.eval(x + t * d); };
  std::uintmax_t max_iter = 100;
  const auto [t, value] = boost::math::tools::brent_find_minima(along, t_min, t_max, 20, max_iter);
  if (value < fx) return {t, value};
  return {0.0, fx};
}

}  // namespace

void run_powell(Context& ctx, const Eigen::VectorXd& x0) {
  const int n = ctx.space.dimension();
  const auto& o = ctx.options.powell;
  Eigen::MatrixXd directions = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd x = ctx.space.clip(x0);
  double fx = ctx.eval(x);

  while (ctx.iteration_allowed()) {
    const double f_start = fx;
    const Eigen::VectorXd x_start = x;
    double biggest_drop = 0.0;
    int biggest_index = 0;
    for (int i = 0; i < n; ++i) {
      const auto line = line_search(ctx, x, directions.col(i), fx);
      if (fx - line.value > biggest_drop) {
        biggest_drop = fx - line.value;
        biggest_index = i;
      }
      x = ctx.space.clip(x + line.step * directions.col(i));
      fx = line.value;
    }
    ++ctx.state.iterations;

    if (2.0 * (f_start - fx) <= o.ftol * (std::abs(f_start) + std::abs(fx)) + 1e-20) {
      ctx.state.converged = true;
      break;
    }
    const Eigen::VectorXd shift = x - x_start;
    if (shift.cwiseAbs().maxCoeff() <= o.xtol * 1e-3) {
      ctx.state.converged = true;
      break;
    }

    // Extrapolate along the net displacement, limited to the box.
    double t_max = 1.0;
    for (int k = 0; k < n; ++k) {
      if (shift(k) > 0) t_max = std::min(t_max, (ctx.space.upper()(k) - x(k)) / shift(k));
      else if (shift(k) < 0) t_max = std::min(t_max, (ctx.space.lower()(k) - x(k)) / shift(k));
    }
    const double f_ext = ctx.eval(x + t_max * shift);
    if (f_start > f_ext) {
      double t = 2.0 * (f_start + f_ext - 2.0 * fx);
      const double a = f_start - fx - biggest_drop;
      const double b = f_start - f_ext;
      t = t * a * a - biggest_drop * b * b;
      if (t < 0.0) {
        const auto line = line_search(ctx, x, shift, fx);
        x = ctx.space.clip(x + line.step * shift);
        fx = line.value;
        directions.col(biggest_index) = directions.col(n - 1);
        directions.col(n - 1) = shift;
      }
    }
  }
}

void run_spsa(Context& ctx, const Eigen::VectorXd& x0) {
  const auto& o = ctx.options.spsa;
  const int n = ctx.space.dimension();
  int cap = 0;
  if (ctx.budget.max_iters) cap = *ctx.budget.max_iters;
  else cap = static_cast<int>(std::max<std::uint64_t>(1, *ctx.budget.max_evals / 2));
  const double stability = o.stability.value_or(0.1 * cap);

  std::bernoulli_distribution coin(0.5);
  auto rademacher = [&] {
    Eigen::VectorXd delta(n);
    for (int k = 0; k < n; ++k) delta(k) = coin(ctx.rng) ? 1.0 : -1.0;
    return delta;
  };

  Eigen::VectorXd x = ctx.space.clip(x0);
  double a = 0.0;
  if (o.learning_rate) {
    a = *o.learning_rate;
  } else {
    double magnitude = 0.0;
    for (int s = 0; s < o.calibration_steps; ++s) {
      const Eigen::VectorXd delta = rademacher();
      const double plus = ctx.eval(x + o.perturbation * delta);
      const double minus = ctx.eval(x - o.perturbation * delta);
      magnitude += std::abs(plus - minus) / (2.0 * o.perturbation);
    }
    magnitude /= std::max(1, o.calibration_steps);
    a = o.target_magnitude * std::pow(stability + 1.0, o.alpha);
    if (magnitude > 1e-300) a /= magnitude;
  }

  for (int k = 0; ctx.iteration_allowed(); ++k) {
    const double gain = a / std::pow(k + 1.0 + stability, o.alpha);
    const double width = o.perturbation / std::pow(k + 1.0, o.gamma);
    const Eigen::VectorXd delta = rademacher();
    const double plus = ctx.eval(x + width * delta);
    const double minus = ctx.eval(x - width * delta);
    const Eigen::VectorXd gradient = (plus - minus) / (2.0 * width) * delta;
    x = ctx.space.clip(x - gain * gradient);
    ++ctx.state.iterations;
  }
  // Only perturbed points are evaluated inside the loop.
  ctx.eval(x);
}

void run_umda(Context& ctx) {
  const auto& o = ctx.options.umda;
  if (o.population < 2) throw Error(Errc::configuration, "UMDA population must be >= 2");
  if (ctx.budget.max_evals && static_cast<std::uint64_t>(o.population) > *ctx.budget.max_evals) {
    throw Error(Errc::configuration, "UMDA population larger than the evaluation budget");
  }
  const int n = ctx.space.dimension();
  const int pop = o.population;
  const int elite = std::clamp(static_cast<int>(std::lround(o.elite_fraction * pop)), 1, pop);
  const Eigen::VectorXd width = ctx.space.width();

  std::vector<Eigen::VectorXd> members(static_cast<std::size_t>(pop));
  std::vector<double> values(static_cast<std::size_t>(pop));
  for (int i = 0; i < pop; ++i) {
    members[static_cast<std::size_t>(i)] = ctx.space.uniform(ctx.rng);
    values[static_cast<std::size_t>(i)] = ctx.eval(members[static_cast<std::size_t>(i)]);
  }
  ++ctx.state.iterations;

  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<int> order(static_cast<std::size_t>(pop));
  while (ctx.iteration_allowed()) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return values[a] < values[b]; });
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < elite; ++i) mean += members[static_cast<std::size_t>(order[i])];
    mean /= elite;
    Eigen::VectorXd var = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < elite; ++i) var += (members[static_cast<std::size_t>(order[i])] - mean).cwiseAbs2();
    const Eigen::VectorXd sd = (var / elite).cwiseSqrt();
    if ((sd.array() / width.array()).maxCoeff() < 1e-8) {
      ctx.state.converged = true;
      break;
    }

    // The best member survives unchanged.
    const auto best = static_cast<std::size_t>(order[0]);
    std::swap(members[0], members[best]);
    std::swap(values[0], values[best]);
    for (int i = 1; i < pop; ++i) {
      Eigen::VectorXd x(n);
      for (int k = 0; k < n; ++k) x(k) = mean(k) + sd(k) * normal(ctx.rng);
      members[static_cast<std::size_t>(i)] = ctx.space.clip(x);
      values[static_cast<std::size_t>(i)] = ctx.eval(members[static_cast<std::size_t>(i)]);
    }
    ++ctx.state.iterations;
  }
}

}  // namespace qaoalab::detail
