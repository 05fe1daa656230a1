#pragma once

#include <random>

#include "qaoalab/encoding.hpp"
#include "qaoalab/problems.hpp"
#include "qaoalab/simulator.hpp"

namespace test_support {

// Fields and couplings uniform in [-1, 1]; roughly a third of couplings zero.
inline qaoalab::Ising random_ising(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  std::bernoulli_distribution keep(2.0 / 3.0);
  qaoalab::Ising ham = qaoalab::Ising::zero(n);
  for (int i = 0; i < n; ++i) {
    ham.h(i) = coeff(rng);
    for (int j = i + 1; j < n; ++j)
      if (keep(rng)) ham.J(i, j) = coeff(rng);
  }
  ham.dropped_offset = coeff(rng);
  return ham;
}

inline qaoalab::QaoaParams random_params(int layers, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(-2.0 * 3.141592653589793, 2.0 * 3.141592653589793);
  Eigen::VectorXd beta(layers), gamma(layers);
  for (int l = 0; l < layers; ++l) {
    beta(l) = angle(rng);
    gamma(l) = angle(rng);
  }
  return qaoalab::QaoaParams(beta, gamma);
}

inline qaoalab::Ising single_qubit(double h = 1.0) {
  qaoalab::Ising ham = qaoalab::Ising::zero(1);
  ham.h(0) = h;
  return ham;
}

inline qaoalab::UcInstance two_unit_uc() {
  qaoalab::UcInstance inst;
  inst.n_units = 2;
  inst.A = Eigen::Vector2d(1, 1);
  inst.B = Eigen::Vector2d(1, 1);
  inst.C = Eigen::Vector2d(0, 0);
  inst.power = Eigen::Vector2i(2, 3);
  inst.demand = 3;
  return inst;
}

// Bitstring from a label written qubit 0 first.
inline qaoalab::Bitstring bits(const char* label) {
  qaoalab::Bitstring x = 0;
  for (int i = 0; label[i] != '\0'; ++i)
    if (label[i] == '1') x |= qaoalab::Bitstring{1} << i;
  return x;
}

}  // namespace test_support
