#include "qaoalab/simulator.hpp"

#include <algorithm>
#include <random>

namespace qaoalab {

std::uint64_t mix_seed(std::uint64_t value) noexcept {
  value += 0x9e3779b97f4a7c15ULL;
  value = (value ^ (value >> 30)) * 0xbf58476d1ce4e5b9ULL;
  value = (value ^ (value >> 27)) * 0x94d049bb133111ebULL;
  return value ^ (value >> 31);
}

Counts sample(const StateVector<double>& state, std::uint64_t shots, std::uint64_t seed) {
  if (shots == 0) throw Error(Errc::invalid_argument, "shots must be >= 1");
  const Eigen::Index dim = state.amplitudes.size();
  std::vector<double> cumulative(static_cast<std::size_t>(dim));
  double running = 0.0;
  for (Eigen::Index x = 0; x < dim; ++x) {
    running += std::norm(state.amplitudes(x));
    cumulative[static_cast<std::size_t>(x)] = running;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, running);
  Counts counts;
  for (std::uint64_t s = 0; s < shots; ++s) {
    const double u = uniform(rng);
    // Zero-probability entries repeat the previous cumulative value and are
    // never the first element greater than u.
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) it = std::lower_bound(cumulative.begin(), cumulative.end(), running);
    ++counts[static_cast<Bitstring>(it - cumulative.begin())];
  }
  return counts;
}

double sample_mean(const Counts& counts, const DiagonalEnergies<double>& diag) {
  double total = 0.0;
  std::uint64_t shots = 0;
  for (const auto& [x, k] : counts) {
    total += static_cast<double>(k) * diag.table(static_cast<Eigen::Index>(x));
    shots += k;
  }
  if (shots == 0) throw Error(Errc::invalid_argument, "empty counts");
  return total / static_cast<double>(shots);
}

double energy_variance(const StateVector<double>& state, const DiagonalEnergies<double>& diag) {
  const Eigen::VectorXd prob = state.probabilities();
  const double mean = prob.dot(diag.table);
  return prob.dot((diag.table.array() - mean).square().matrix());
}

QaoaObjective::QaoaObjective(const Ising& ham, int layers, SimulationMode mode)
    : QaoaObjective(std::make_shared<const DiagonalEnergies<double>>(precompute_diagonal(ham)), layers, mode) {}

QaoaObjective::QaoaObjective(std::shared_ptr<const DiagonalEnergies<double>> diag, int layers,
                             SimulationMode mode)
    : diag_(std::move(diag)), layers_(layers), mode_(mode) {
  if (layers_ < 1) throw Error(Errc::invalid_argument, "need at least one layer");
  if (mode_.kind == SimulationMode::Kind::shots && mode_.shots == 0) {
    throw Error(Errc::invalid_argument, "shots must be >= 1");
  }
}

QaoaObjective::QaoaObjective(const QaoaObjective& other)
    : diag_(other.diag_), layers_(other.layers_), mode_(other.mode_), counter_(other.counter_.load()) {}

QaoaObjective& QaoaObjective::operator=(const QaoaObjective& other) {
  diag_ = other.diag_;
  layers_ = other.layers_;
  mode_ = other.mode_;
  counter_.store(other.counter_.load());
  return *this;
}

QaoaObjective QaoaObjective::clone() const {
  QaoaObjective copy(diag_, layers_, mode_);
  return copy;
}

double QaoaObjective::operator()(const QaoaParams& params) {
  if (params.layers() != layers_) throw Error(Errc::dimension_mismatch, "parameter layer count mismatch");
  const std::uint64_t call = counter_.fetch_add(1);
  const auto state = evolve(params, *diag_);
  if (mode_.kind == SimulationMode::Kind::exact) return expectation(state, *diag_);
  const std::uint64_t seed = mix_seed(mode_.seed ^ mix_seed(call));
  return sample_mean(sample(state, mode_.shots, seed), *diag_);
}

}  // namespace qaoalab
