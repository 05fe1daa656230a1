#pragma once

// QUBO assembly, QUBO -> Ising conversion, coefficient scaling, adaptive
// penalty tuning and the exhaustive spectrum oracle.
//
// Spin convention: x_i = (1 - z_i) / 2, so bit 1 corresponds to spin -1.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "qaoalab/errors.hpp"
#include "qaoalab/problems.hpp"

namespace qaoalab {

/// Largest qubit count accepted by exhaustive enumeration and the diagonal
/// energy table.
inline constexpr int kMaxEnumerationQubits = 24;

inline void check_enumerable(int n) {
  if (n < 0 || n > kMaxEnumerationQubits) {
    throw Error(Errc::capacity, std::to_string(n) + " qubits exceeds the enumeration limit of " +
                                    std::to_string(kMaxEnumerationQubits));
  }
}

/// c(x) = constant + sum_i linear_i x_i + sum_{i<j} quadratic_ij x_i x_j.
/// Entries of `quadratic` on or below the diagonal are always zero.
template <typename Scalar>
struct QuboProblem {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  int n = 0;
  Vector linear;
  Matrix quadratic;
  Scalar constant = 0;
  Scalar scale = 1;
  std::vector<Scalar> penalty_factors;

  static QuboProblem zero(int n) {
    QuboProblem q;
    q.n = n;
    q.linear = Vector::Zero(n);
    q.quadratic = Matrix::Zero(n, n);
    return q;
  }

  Scalar operator()(Bitstring x) const {
    Scalar value = constant;
    for (int i = 0; i < n; ++i) {
      if (!bit(x, i)) continue;
      value += linear(i);
      for (int j = i + 1; j < n; ++j)
        if (bit(x, j)) value += quadratic(i, j);
    }
    return value;
  }
};

/// E(z) = sum_{i<j} J_ij z_i z_j + sum_i h_i z_i. The constant removed during
/// conversion lives in dropped_offset and is not part of E.
template <typename Scalar>
struct IsingHamiltonian {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  int n = 0;
  Vector h;
  Matrix J;  // strictly upper triangular
  Scalar dropped_offset = 0;

  static IsingHamiltonian zero(int n) {
    IsingHamiltonian ham;
    ham.n = n;
    ham.h = Vector::Zero(n);
    ham.J = Matrix::Zero(n, n);
    return ham;
  }

  IsingHamiltonian scaled(Scalar k) const {
    IsingHamiltonian out = *this;
    out.h *= k;
    out.J *= k;
    out.dropped_offset *= k;
    return out;
  }
};

using Qubo = QuboProblem<double>;
using Ising = IsingHamiltonian<double>;

template <typename Scalar>
IsingHamiltonian<Scalar> qubo_to_ising(const QuboProblem<Scalar>& q) {
  auto ham = IsingHamiltonian<Scalar>::zero(q.n);
  ham.dropped_offset = q.constant;
  for (int i = 0; i < q.n; ++i) {
    // a x = a/2 - (a/2) z
    ham.h(i) -= q.linear(i) / 2;
    ham.dropped_offset += q.linear(i) / 2;
    for (int j = i + 1; j < q.n; ++j) {
      // b x_i x_j = (b/4)(1 - z_i - z_j + z_i z_j)
      const Scalar b = q.quadratic(i, j);
      if (b == Scalar(0)) continue;
      ham.J(i, j) += b / 4;
      ham.h(i) -= b / 4;
      ham.h(j) -= b / 4;
      ham.dropped_offset += b / 4;
    }
  }
  return ham;
}

/// Energy of one basis state evaluated term by term.
template <typename Scalar>
Scalar energy(const IsingHamiltonian<Scalar>& ham, Bitstring x) {
  Scalar e = 0;
  for (int i = 0; i < ham.n; ++i) {
    const Scalar zi = bit(x, i) ? Scalar(-1) : Scalar(1);
    e += ham.h(i) * zi;
    for (int j = i + 1; j < ham.n; ++j) {
      const Scalar zj = bit(x, j) ? Scalar(-1) : Scalar(1);
      e += ham.J(i, j) * zi * zj;
    }
  }
  return e;
}

/// All 2^n energies. Entry x is derived from x with its lowest set bit
/// cleared, so each entry costs O(n).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> energy_table(const IsingHamiltonian<Scalar>& ham) {
  check_enumerable(ham.n);
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const int n = ham.n;
  const std::uint64_t dim = std::uint64_t{1} << n;
  const typename IsingHamiltonian<Scalar>::Matrix coupling = ham.J + ham.J.transpose();

  Vector table(static_cast<Eigen::Index>(dim));
  table(0) = ham.h.sum() + ham.J.sum();
  for (std::uint64_t x = 1; x < dim; ++x) {
    const int k = std::countr_zero(x);
    const std::uint64_t prev = x & (x - 1);
    Scalar field = ham.h(k);
    for (int j = 0; j < n; ++j) {
      if (j == k) continue;
      field += bit(prev, j) ? -coupling(k, j) : coupling(k, j);
    }
    table(static_cast<Eigen::Index>(x)) = table(static_cast<Eigen::Index>(prev)) - 2 * field;
  }
  return table;
}

/// s such that the mean absolute value of the nonzero h and J coefficients of
/// the scaled Hamiltonian is 1.
template <typename Scalar>
Scalar scaling_factor(const IsingHamiltonian<Scalar>& ham) {
  Scalar total = 0;
  long count = 0;
  for (int i = 0; i < ham.n; ++i) {
    if (ham.h(i) != Scalar(0)) {
      total += std::abs(ham.h(i));
      ++count;
    }
    for (int j = i + 1; j < ham.n; ++j) {
      if (ham.J(i, j) != Scalar(0)) {
        total += std::abs(ham.J(i, j));
        ++count;
      }
    }
  }
  if (count == 0) throw Error(Errc::undefined_scale, "Hamiltonian has no nonzero coefficient");
  return Scalar(count) / total;
}

/// Mean absolute value of the nonzero coefficients.
template <typename Scalar>
Scalar mean_abs_coefficient(const IsingHamiltonian<Scalar>& ham) {
  return Scalar(1) / scaling_factor(ham);
}

/// Lexicographic order of labels written qubit 0 first.
inline bool label_less(Bitstring a, Bitstring b) noexcept {
  const Bitstring differ = a ^ b;
  return differ != 0 && (a & (differ & (~differ + 1))) == 0;
}

template <typename Scalar>
struct Spectrum {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> energies;
  Scalar min_energy = 0;
  std::vector<Bitstring> argmin;  // label order, qubit 0 first
};

/// Exhaustive enumeration. States within a relative 1e-12 of the minimum are
/// treated as degenerate minimizers.
template <typename Scalar>
Spectrum<Scalar> brute_force(const IsingHamiltonian<Scalar>& ham) {
  Spectrum<Scalar> spec;
  spec.energies = energy_table(ham);
  spec.min_energy = spec.energies.minCoeff();
  const Scalar scale = std::max<Scalar>(Scalar(1), spec.energies.cwiseAbs().maxCoeff());
  const Scalar tol = Scalar(1e-12) * scale;
  for (Eigen::Index x = 0; x < spec.energies.size(); ++x)
    if (spec.energies(x) <= spec.min_energy + tol) spec.argmin.push_back(static_cast<Bitstring>(x));
  std::sort(spec.argmin.begin(), spec.argmin.end(), label_less);
  return spec;
}

// ---- QUBO assembly --------------------------------------------------------

/// Recovers the quadratic polynomial of a binary function from its values at
/// 0, e_i and e_i + e_j, then checks the polynomial against the function (on
/// every bitstring up to 16 variables, on a seeded sample beyond). Throws
/// Errc::encoding if the function is not quadratic.
Qubo extract_quadratic(const BinaryFunction& f, int n);

/// s * (H_cost + sum_j P_j H_pen,j) as an explicit QUBO.
Qubo assemble(const ProblemFunctions& funcs, const std::vector<double>& penalty_factors, double scale);

/// Broadcasts one shared penalty factor to every penalty term.
Qubo assemble(const ProblemFunctions& funcs, double penalty_factor, double scale);

struct PenaltyTuning {
  double penalty = 0.0;           // P, rounded up to the next double if inexact
  int iterations = 0;             // number of increments applied
  std::vector<double> history;    // P before each increment, then the final P
  double min_valid_cost = 0.0;    // H_min,opt
  double mean_valid_cost = 0.0;   // mean cost over valid solutions
  double threshold = 0.0;         // (H_min,opt + mean) / 2
  double min_wrong_value = 0.0;   // H_min,wrong at the returned P
  Bitstring cheapest_wrong = 0;
};

/// Raises a single shared penalty factor from 0 until the cheapest invalid
/// bitstring costs at least the midpoint between the best and the mean valid
/// cost. Each step lifts the current cheapest invalid solution exactly onto the
/// threshold; the loop runs in exact rational arithmetic.
PenaltyTuning tune_penalty(const ProblemFunctions& funcs, int max_iterations = 100000);

/// Checks the termination inequality at P in exact arithmetic.
bool penalty_condition_holds(const ProblemFunctions& funcs, double penalty);

/// Tuned (or given) P, heuristic (or given) s, and the resulting encodings.
struct Encoding {
  double penalty = 0.0;
  double scale = 1.0;
  Qubo qubo;
  Ising ising;
};

struct EncodingPolicy {
  std::optional<double> penalty;  // nullopt: tune
  std::optional<double> scale;    // nullopt: mean-|coefficient| heuristic
};

/// P is resolved first on the unscaled problem, then s from its Ising form.
Encoding encode(const ProblemFunctions& funcs, const EncodingPolicy& policy);

nlohmann::json ising_to_json(const Ising& ham);
Ising ising_from_json(const nlohmann::json& j);
std::string bitstring_label(Bitstring x, int n);  // qubit 0 first
void write_spectrum_csv(const Spectrum<double>& spec, int n, std::ostream& out);

}  // namespace qaoalab
