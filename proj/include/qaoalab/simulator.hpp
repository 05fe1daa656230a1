#pragma once

// Statevector QAOA: diagonal cost phases followed by a product of
// single-qubit X rotations per layer, starting from |+>^n.

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>

#include <Eigen/Dense>

#include "qaoalab/encoding.hpp"
#include "qaoalab/errors.hpp"

namespace qaoalab {

/// Variational point. Flattened layout used by the optimizers:
/// [beta_1 .. beta_p, gamma_1 .. gamma_p].
struct QaoaParams {
  Eigen::VectorXd beta;
  Eigen::VectorXd gamma;

  QaoaParams() = default;
  QaoaParams(Eigen::VectorXd b, Eigen::VectorXd g) : beta(std::move(b)), gamma(std::move(g)) { validate(); }

  int layers() const { return static_cast<int>(beta.size()); }

  void validate() const {
    if (beta.size() != gamma.size()) throw Error(Errc::invalid_argument, "beta and gamma lengths differ");
    if (beta.size() < 1) throw Error(Errc::invalid_argument, "need at least one layer");
  }

  Eigen::VectorXd flat() const {
    Eigen::VectorXd v(beta.size() + gamma.size());
    v << beta, gamma;
    return v;
  }

  static QaoaParams from_flat(const Eigen::VectorXd& v) {
    if (v.size() < 2 || v.size() % 2 != 0) {
      throw Error(Errc::dimension_mismatch, "flat parameter vector must have even length >= 2");
    }
    const Eigen::Index p = v.size() / 2;
    return QaoaParams(v.head(p), v.tail(p));
  }
};

template <typename Scalar>
struct DiagonalEnergies {
  int n = 0;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> table;
};

template <typename Scalar>
DiagonalEnergies<Scalar> precompute_diagonal(const IsingHamiltonian<Scalar>& ham) {
  return DiagonalEnergies<Scalar>{ham.n, energy_table(ham)};
}

template <typename Scalar>
struct StateVector {
  using Complex = std::complex<Scalar>;
  int n = 0;
  Eigen::Matrix<Complex, Eigen::Dynamic, 1> amplitudes;

  static StateVector plus(int n) {
    StateVector s;
    s.n = n;
    const auto dim = Eigen::Index{1} << n;
    s.amplitudes = Eigen::Matrix<Complex, Eigen::Dynamic, 1>::Constant(dim, Complex(Scalar(1) / std::sqrt(Scalar(dim))));
    return s;
  }

  static StateVector basis(int n, Bitstring x) {
    StateVector s;
    s.n = n;
    s.amplitudes = Eigen::Matrix<Complex, Eigen::Dynamic, 1>::Zero(Eigen::Index{1} << n);
    s.amplitudes(static_cast<Eigen::Index>(x)) = Complex(1);
    return s;
  }

  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> probabilities() const { return amplitudes.cwiseAbs2(); }
};

/// exp(-i beta X) on every qubit.
template <typename Scalar>
void apply_mixer(StateVector<Scalar>& state, Scalar beta) {
  using Complex = std::complex<Scalar>;
  const Scalar c = std::cos(beta);
  const Complex minus_i_s(0, -std::sin(beta));
  const Eigen::Index dim = state.amplitudes.size();
  auto* amp = state.amplitudes.data();
  for (int k = 0; k < state.n; ++k) {
    const Eigen::Index stride = Eigen::Index{1} << k;
    for (Eigen::Index block = 0; block < dim; block += 2 * stride) {
      for (Eigen::Index x = block; x < block + stride; ++x) {
        const Complex a = amp[x];
        const Complex b = amp[x + stride];
        amp[x] = c * a + minus_i_s * b;
        amp[x + stride] = c * b + minus_i_s * a;
      }
    }
  }
}

/// exp(-i gamma H_C), diagonal in the computational basis.
template <typename Scalar>
void apply_phase(StateVector<Scalar>& state, const DiagonalEnergies<Scalar>& diag, Scalar gamma) {
  using Complex = std::complex<Scalar>;
  for (Eigen::Index x = 0; x < state.amplitudes.size(); ++x) {
    const Scalar angle = -gamma * diag.table(x);
    state.amplitudes(x) *= Complex(std::cos(angle), std::sin(angle));
  }
}

template <typename Scalar>
StateVector<Scalar> evolve(const QaoaParams& params, const DiagonalEnergies<Scalar>& diag) {
  params.validate();
  auto state = StateVector<Scalar>::plus(diag.n);
  for (int layer = 0; layer < params.layers(); ++layer) {
    apply_phase(state, diag, static_cast<Scalar>(params.gamma(layer)));
    apply_mixer(state, static_cast<Scalar>(params.beta(layer)));
  }
  state.amplitudes /= state.amplitudes.norm();
  return state;
}

template <typename Scalar>
Scalar expectation(const StateVector<Scalar>& state, const DiagonalEnergies<Scalar>& diag) {
  if (state.amplitudes.size() != diag.table.size()) {
    throw Error(Errc::dimension_mismatch, "state and energy table sizes differ");
  }
  return state.amplitudes.cwiseAbs2().dot(diag.table);
}

using Counts = std::map<Bitstring, std::uint64_t>;

/// Draws `shots` basis states from |amplitude|^2. Deterministic in seed.
Counts sample(const StateVector<double>& state, std::uint64_t shots, std::uint64_t seed);

/// Mean energy over sampled outcomes.
double sample_mean(const Counts& counts, const DiagonalEnergies<double>& diag);

/// Variance of the energy under |psi|^2; the standard error of a k-shot
/// estimate is sqrt(variance / k).
double energy_variance(const StateVector<double>& state, const DiagonalEnergies<double>& diag);

struct SimulationMode {
  enum class Kind { exact, shots };
  Kind kind = Kind::exact;
  std::uint64_t shots = 4096;
  std::uint64_t seed = 0;

  static SimulationMode exact() { return {}; }
  static SimulationMode sampled(std::uint64_t shots, std::uint64_t seed) { return {Kind::shots, shots, seed}; }
};

/// C(beta, gamma) for a fixed Hamiltonian with an evaluation counter. Copies
/// share the energy table; clone() starts a fresh counter.
class QaoaObjective {
 public:
  QaoaObjective(const Ising& ham, int layers, SimulationMode mode = SimulationMode::exact());
  QaoaObjective(std::shared_ptr<const DiagonalEnergies<double>> diag, int layers, SimulationMode mode);
  QaoaObjective(const QaoaObjective& other);
  QaoaObjective& operator=(const QaoaObjective& other);

  double operator()(const QaoaParams& params);
  double operator()(const Eigen::VectorXd& flat) { return (*this)(QaoaParams::from_flat(flat)); }

  std::uint64_t evaluations() const { return counter_.load(); }
  QaoaObjective clone() const;

  int layers() const { return layers_; }
  int dimension() const { return 2 * layers_; }
  int qubits() const { return diag_->n; }
  const SimulationMode& mode() const { return mode_; }
  const DiagonalEnergies<double>& diagonal() const { return *diag_; }

 private:
  std::shared_ptr<const DiagonalEnergies<double>> diag_;
  int layers_;
  SimulationMode mode_;
  std::atomic<std::uint64_t> counter_{0};
};

/// splitmix64 finalizer; used wherever seeds are derived from other seeds.
std::uint64_t mix_seed(std::uint64_t value) noexcept;

}  // namespace qaoalab
