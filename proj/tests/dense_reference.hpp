#pragma once

// Literal dense-matrix QAOA reference: H_C and H_M assembled from Pauli
// Kronecker products, layer unitaries from eigendecompositions.

#include <complex>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "qaoalab/encoding.hpp"
#include "qaoalab/simulator.hpp"

namespace dense_reference {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Single-qubit operator `op` on qubit `k` of `n`; qubit 0 is the least
// significant index bit, so it is the rightmost Kronecker factor.
inline Matrix embed(const Eigen::Matrix2cd& op, int k, int n) {
  Matrix result = Matrix::Identity(1, 1);
  for (int q = n - 1; q >= 0; --q) {
    const Eigen::Matrix2cd factor = q == k ? op : Eigen::Matrix2cd::Identity();
    Matrix next(result.rows() * 2, result.cols() * 2);
    for (Eigen::Index r = 0; r < result.rows(); ++r)
      for (Eigen::Index c = 0; c < result.cols(); ++c) next.block(2 * r, 2 * c, 2, 2) = result(r, c) * factor;
    result = next;
  }
  return result;
}

inline Eigen::Matrix2cd pauli_x() {
  Eigen::Matrix2cd m;
  m << 0, 1, 1, 0;
  return m;
}

inline Eigen::Matrix2cd pauli_z() {
  Eigen::Matrix2cd m;
  m << 1, 0, 0, -1;
  return m;
}

inline Matrix cost_hamiltonian(const qaoalab::Ising& ham) {
  const Eigen::Index dim = Eigen::Index{1} << ham.n;
  Matrix hc = Matrix::Zero(dim, dim);
  for (int i = 0; i < ham.n; ++i) {
    if (ham.h(i) != 0.0) hc += ham.h(i) * embed(pauli_z(), i, ham.n);
    for (int j = i + 1; j < ham.n; ++j)
      if (ham.J(i, j) != 0.0) hc += ham.J(i, j) * embed(pauli_z(), i, ham.n) * embed(pauli_z(), j, ham.n);
  }
  return hc;
}

inline Matrix mixer_hamiltonian(int n) {
  const Eigen::Index dim = Eigen::Index{1} << n;
  Matrix hm = Matrix::Zero(dim, dim);
  for (int i = 0; i < n; ++i) hm += embed(pauli_x(), i, n);
  return hm;
}

// exp(-i t H) for Hermitian H.
inline Matrix unitary(const Matrix& h, double t) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
  const Eigen::VectorXd lambda = eig.eigenvalues();
  Eigen::VectorXcd phases(lambda.size());
  for (Eigen::Index k = 0; k < lambda.size(); ++k) phases(k) = std::exp(std::complex<double>(0.0, -t * lambda(k)));
  return eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
}

inline Vector state(const qaoalab::Ising& ham, const qaoalab::QaoaParams& params) {
  const Eigen::Index dim = Eigen::Index{1} << ham.n;
  const Matrix hc = cost_hamiltonian(ham);
  const Matrix hm = mixer_hamiltonian(ham.n);
  Vector psi = Vector::Constant(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
  for (int l = 0; l < params.layers(); ++l) {
    psi = unitary(hc, params.gamma(l)) * psi;
    psi = unitary(hm, params.beta(l)) * psi;
  }
  return psi;
}

inline double expectation(const qaoalab::Ising& ham, const qaoalab::QaoaParams& params) {
  const Vector psi = state(ham, params);
  return (psi.adjoint() * cost_hamiltonian(ham) * psi)(0, 0).real();
}

}  // namespace dense_reference
