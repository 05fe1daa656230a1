#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "detail.hpp"

namespace qaoalab::detail {

namespace {

constexpr int kMinGenerations = 10;
constexpr int kMinPopulation = 5;

int de_population(const Context& ctx) {
  const auto& o = ctx.options.de;
  const auto& max_evals = ctx.budget.max_evals;
  int pop = 0;
  if (o.population) {
    pop = *o.population;
  } else {
    pop = 15 * ctx.space.dimension();
    if (max_evals) {
      const auto fit = static_cast<int>(std::min<std::uint64_t>(*max_evals / kMinGenerations, 1u << 20));
      pop = std::min(pop, std::max(kMinPopulation, fit));
    }
  }
  if (pop < 4) throw Error(Errc::configuration, "differential evolution needs a population of at least 4");
  if (max_evals && static_cast<std::uint64_t>(pop) > *max_evals) {
    throw Error(Errc::configuration, "population of " + std::to_string(pop) + " exceeds the budget of " +
                                         std::to_string(*max_evals) + " evaluations");
  }
  return pop;
}

}  // namespace

void run_differential_evolution(Context& ctx) {
  const auto& o = ctx.options.de;
  const int n = ctx.space.dimension();
  const int pop = de_population(ctx);

  const Eigen::MatrixXd init = latin_hypercube(ctx.space, pop, ctx.rng);
  std::vector<Eigen::VectorXd> members(static_cast<std::size_t>(pop));
  std::vector<double> values(static_cast<std::size_t>(pop));
  for (int i = 0; i < pop; ++i) {
    members[static_cast<std::size_t>(i)] = init.row(i).transpose();
    values[static_cast<std::size_t>(i)] = ctx.eval(members[static_cast<std::size_t>(i)]);
  }

  std::uniform_int_distribution<int> pick(0, pop - 1);
  std::uniform_int_distribution<int> pick_dim(0, n - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // A capped run keeps a tenth of its budget (at most 200 calls) for polishing.
  const std::uint64_t reserve =
      o.polish && ctx.budget.max_evals ? std::min<std::uint64_t>(*ctx.budget.max_evals / 10, 200) : 0;
  const auto generation_fits = [&] {
    const auto remaining = ctx.eval.remaining();
    return !remaining || *remaining >= static_cast<std::uint64_t>(pop) + reserve;
  };

  while (ctx.iteration_allowed() && generation_fits()) {
    for (int i = 0; i < pop; ++i) {
      int r1 = 0, r2 = 0, r3 = 0;
      do r1 = pick(ctx.rng); while (r1 == i);
      do r2 = pick(ctx.rng); while (r2 == i || r2 == r1);
      do r3 = pick(ctx.rng); while (r3 == i || r3 == r1 || r3 == r2);
      const auto& a = members[static_cast<std::size_t>(r1)];
      const auto& b = members[static_cast<std::size_t>(r2)];
      const auto& c = members[static_cast<std::size_t>(r3)];
      Eigen::VectorXd trial = members[static_cast<std::size_t>(i)];
      const int forced = pick_dim(ctx.rng);
      for (int k = 0; k < n; ++k) {
        if (k == forced || unit(ctx.rng) < o.crossover) {
          trial(k) = a(k) + o.mutation * (b(k) - c(k));
          // Out-of-range components are redrawn inside the box.
          if (trial(k) < ctx.space.lower()(k) || trial(k) > ctx.space.upper()(k)) {
            trial(k) = ctx.space.lower()(k) + unit(ctx.rng) * (ctx.space.upper()(k) - ctx.space.lower()(k));
          }
        }
      }
      const double f = ctx.eval(trial);
      if (f <= values[static_cast<std::size_t>(i)]) {
        members[static_cast<std::size_t>(i)] = trial;
        values[static_cast<std::size_t>(i)] = f;
      }
    }
    ++ctx.state.iterations;

    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / pop;
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    if (std::sqrt(var / pop) <= o.tol * std::abs(mean)) {
      ctx.state.converged = true;
      break;
    }
  }

  if (o.polish) {
    const auto best = std::min_element(values.begin(), values.end()) - values.begin();
    NelderMeadOptions polish = ctx.options.nm;
    polish.initial_step = std::min(polish.initial_step, 0.01);
    polish.xatol = 1e-8;
    polish.fatol = 1e-10;
    nelder_mead([&ctx](const Eigen::VectorXd& x) { return ctx.eval(x); }, ctx.space,
                members[static_cast<std::size_t>(best)], polish, 200);
  }
}

void run_basin_hopping(Context& ctx) {
  const auto& o = ctx.options.bh;
  const int n = ctx.space.dimension();
  const Eigen::VectorXd width = ctx.space.width();
  auto f = [&ctx](const Eigen::VectorXd& x) { return ctx.eval(x); };

  double temperature = 1.0;
  if (o.temperature) {
    temperature = *o.temperature;
  } else {
    std::vector<double> probes;
    for (int i = 0; i < o.probe_points; ++i) probes.push_back(ctx.eval(ctx.space.uniform(ctx.rng)));
    if (probes.size() > 1) {
      const double mean = std::accumulate(probes.begin(), probes.end(), 0.0) / probes.size();
      double var = 0.0;
      for (double v : probes) var += (v - mean) * (v - mean);
      var /= static_cast<double>(probes.size() - 1);
      if (var > 0.0) temperature = std::sqrt(var);
    }
  }

  auto local = nelder_mead(f, ctx.space, ctx.space.uniform(ctx.rng), ctx.options.nm, o.local_iters);
  Eigen::VectorXd current = local.x;
  double f_current = local.value;

  const int hops = ctx.budget.max_iters.value_or(o.hops);
  std::uniform_real_distribution<double> symmetric(-1.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (ctx.state.iterations < hops) {
    Eigen::VectorXd trial = current;
    for (int k = 0; k < n; ++k) trial(k) += symmetric(ctx.rng) * o.step_fraction * width(k);
    local = nelder_mead(f, ctx.space, ctx.space.clip(trial), ctx.options.nm, o.local_iters);
    // Acceptance looks only at the function value reached.
    const bool accept =
        local.value < f_current || unit(ctx.rng) < std::exp(-(local.value - f_current) / temperature);
    if (accept) {
      current = local.x;
      f_current = local.value;
    }
    ++ctx.state.iterations;
  }
}

// ---- generalized simulated annealing --------------------------------------

namespace {

constexpr double kTailLimit = 1e8;
constexpr double kMinVisitBound = 1e-10;

class VisitingDistribution {
 public:
  VisitingDistribution(const SearchSpace& space, double visit, std::mt19937_64& rng)
      : lower_(space.lower()), range_(space.width()), qv_(visit), rng_(rng) {
    factor2_ = std::exp((4.0 - qv_) * std::log(qv_ - 1.0));
    factor3_ = std::exp((2.0 - qv_) * std::log(2.0) / (qv_ - 1.0));
    factor4_p_ = std::sqrt(std::numbers::pi) * factor2_ / (factor3_ * (3.0 - qv_));
    factor5_ = 1.0 / (qv_ - 1.0) - 0.5;
    d1_ = 2.0 - factor5_;
    factor6_ = std::numbers::pi * (1.0 - factor5_) / std::sin(std::numbers::pi * (1.0 - factor5_)) / std::exp(std::lgamma(d1_));
  }

  Eigen::VectorXd visit(const Eigen::VectorXd& x, int step, double temperature) {
    const auto dim = static_cast<int>(x.size());
    Eigen::VectorXd out = x;
    if (step < dim) {
      Eigen::VectorXd visits = draw(temperature, dim);
      const double upper_sample = unit_(rng_);
      const double lower_sample = unit_(rng_);
      for (int k = 0; k < dim; ++k) {
        if (visits(k) > kTailLimit) visits(k) = kTailLimit * upper_sample;
        else if (visits(k) < -kTailLimit) visits(k) = -kTailLimit * lower_sample;
        out(k) = wrap(x(k) + visits(k), k);
        if (std::abs(out(k) - lower_(k)) < kMinVisitBound) out(k) += 1e-10;
      }
    } else {
      double v = draw(temperature, 1)(0);
      if (v > kTailLimit) v = kTailLimit * unit_(rng_);
      else if (v < -kTailLimit) v = -kTailLimit * unit_(rng_);
      const int k = step - dim;
      out(k) = wrap(x(k) + v, k);
      if (std::abs(out(k) - lower_(k)) < kMinVisitBound) out(k) += kMinVisitBound;
    }
    return out;
  }

 private:
  Eigen::VectorXd draw(double temperature, int dim) {
    const double factor1 = std::exp(std::log(temperature) / (qv_ - 1.0));
    const double factor4 = factor4_p_ * factor1;
    const double sigma = std::exp(-(qv_ - 1.0) * std::log(factor6_ / factor4) / (3.0 - qv_));
    Eigen::VectorXd out(dim);
    for (int k = 0; k < dim; ++k) {
      const double x = normal_(rng_) * sigma;
      const double y = normal_(rng_);
      const double den = std::exp((qv_ - 1.0) * std::log(std::abs(y)) / (3.0 - qv_));
      out(k) = x / den;
    }
    return out;
  }

  double wrap(double value, int k) const {
    const double a = value - lower_(k);
    const double b = std::fmod(a, range_(k)) + range_(k);
    return std::fmod(b, range_(k)) + lower_(k);
  }

  Eigen::VectorXd lower_;
  Eigen::VectorXd range_;
  double qv_;
  std::mt19937_64& rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  double factor2_, factor3_, factor4_p_, factor5_, d1_, factor6_;
};

struct EnergyState {
  Eigen::VectorXd current;
  double f_current = 0.0;
  Eigen::VectorXd best;
  double f_best = std::numeric_limits<double>::infinity();

  void update_current(double f, const Eigen::VectorXd& x) {
    f_current = f;
    current = x;
  }
  void update_best(double f, const Eigen::VectorXd& x) {
    f_best = f;
    best = x;
  }
};

}  // namespace

void run_dual_annealing(Context& ctx) {
  const auto& o = ctx.options.da;
  const int n = ctx.space.dimension();
  const double qv = o.visit;
  const double qa = o.accept;
  const int max_iters = ctx.budget.max_iters.value_or(o.max_iters);
  const double restart_temperature = o.initial_temp * o.restart_temp_ratio;
  const int local_iters = std::min(std::max(6 * n, 100), 1000);

  VisitingDistribution visiting(ctx.space, qv, ctx.rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto f = [&ctx](const Eigen::VectorXd& x) { return ctx.eval(x); };

  EnergyState es;
  auto reset = [&] {
    es.current = ctx.space.uniform(ctx.rng);
    es.f_current = ctx.eval(es.current);
    if (es.f_current < es.f_best) es.update_best(es.f_current, es.current);
  };
  reset();

  Eigen::VectorXd x_min = es.current;
  double e_min = es.f_current;
  int not_improved = 0;
  int not_improved_max = 1000;
  const double K = 100.0 * n;
  bool improved = false;

  auto local_search = [&](const Eigen::VectorXd& x0) {
    return nelder_mead(f, ctx.space, x0, ctx.options.nm, local_iters);
  };

  const double t1 = std::exp((qv - 1.0) * std::log(2.0)) - 1.0;
  bool stop = false;
  while (!stop) {
    for (int i = 0; i < max_iters; ++i) {
      const double s = i + 2.0;
      const double t2 = std::exp((qv - 1.0) * std::log(s)) - 1.0;
      const double temperature = o.initial_temp * t1 / t2;
      if (ctx.state.iterations >= max_iters) {
        stop = true;
        break;
      }
      if (temperature < restart_temperature) {
        if (i == 0) {
          stop = true;
          break;
        }
        reset();
        break;
      }

      // Strategy chain: 2 * dim visits at this temperature.
      const double temperature_step = temperature / (i + 1.0);
      ++not_improved;
      for (int j = 0; j < 2 * n; ++j) {
        if (j == 0) improved = (i == 0);
        const Eigen::VectorXd x_visit = visiting.visit(es.current, j, temperature);
        const double e = ctx.eval(x_visit);
        if (e < es.f_current) {
          es.update_current(e, x_visit);
          if (e < es.f_best) {
            es.update_best(e, x_visit);
            improved = true;
            not_improved = 0;
          }
        } else {
          const double r = unit(ctx.rng);
          const double pqv_temp = 1.0 - ((1.0 - qa) * (e - es.f_current) / temperature_step);
          const double pqv = pqv_temp <= 0.0 ? 0.0 : std::exp(std::log(pqv_temp) / (1.0 - qa));
          if (r <= pqv) {
            es.update_current(e, x_visit);
            x_min = es.current;
          }
          if (not_improved >= not_improved_max && (j == 0 || es.f_current < e_min)) {
            e_min = es.f_current;
            x_min = es.current;
          }
        }
      }

      // Local refinement.
      if (improved) {
        const auto res = local_search(es.best);
        if (res.value < es.f_best) {
          not_improved = 0;
          es.update_best(res.value, res.x);
          es.update_current(res.value, res.x);
        }
      }
      bool do_local = false;
      if (K < 90.0 * n) {
        const double pls = std::exp(K * (es.f_best - es.f_current) / temperature_step);
        if (pls >= unit(ctx.rng)) do_local = true;
      }
      if (not_improved >= not_improved_max) do_local = true;
      if (do_local) {
        const auto res = local_search(x_min);
        x_min = res.x;
        e_min = res.value;
        not_improved = 0;
        not_improved_max = n;
        if (res.value < es.f_best) {
          es.update_best(res.value, res.x);
          es.update_current(res.value, res.x);
        }
      }
      ++ctx.state.iterations;
    }
  }
}

}  // namespace qaoalab::detail
