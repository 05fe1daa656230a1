#pragma once

// Use-case instances (unit commitment, travelling salesperson, factory
// layout) and their binary cost / penalty functions.
//
// Bit convention: variable i is bit i of a Bitstring (qubit 0 = LSB). Two-index
// variables x_{i,j} are flattened row-major, index = i * n_cols + j, where i is
// the city (TSP) or machine (FL) and j the time step or position.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace qaoalab {

using Bitstring = std::uint64_t;

constexpr bool bit(Bitstring x, int i) noexcept { return (x >> i) & 1U; }

/// Unit commitment: switch units on or off so their fixed outputs meet the
/// demand at minimal cost.
struct UcInstance {
  int n_units = 0;
  Eigen::VectorXd A;      // fixed cost per unit
  Eigen::VectorXd B;      // cost per unit of power
  Eigen::VectorXd C;      // cost per unit of power squared
  Eigen::VectorXi power;  // fixed integer output p_i
  int demand = 0;         // L
  std::optional<std::uint64_t> seed;
};

/// Travelling salesperson over a symmetric distance matrix.
struct TspInstance {
  int n_cit = 0;
  Eigen::MatrixXd D;
  std::optional<std::uint64_t> seed;
};

/// Factory layout: place n_mach machines on n_pos positions.
struct FlInstance {
  int n_mach = 0;
  int n_pos = 0;
  Eigen::MatrixXd D;  // n_pos x n_pos distances
  Eigen::MatrixXd T;  // n_mach x n_mach transport densities
  std::optional<std::uint64_t> seed;
};

using Instance = std::variant<UcInstance, TspInstance, FlInstance>;

using BinaryFunction = std::function<double(Bitstring)>;

struct ProblemFunctions {
  std::string kind;
  int n = 0;
  BinaryFunction cost;
  std::vector<BinaryFunction> penalties;
  std::function<bool(Bitstring)> validity;

  double penalty_sum(Bitstring x) const {
    double total = 0.0;
    for (const auto& pen : penalties) total += pen(x);
    return total;
  }
};

void validate(const UcInstance& inst);
void validate(const TspInstance& inst);
void validate(const FlInstance& inst);

ProblemFunctions build_uc(const UcInstance& inst);
ProblemFunctions build_tsp(const TspInstance& inst);
ProblemFunctions build_fl(const FlInstance& inst);
ProblemFunctions build(const Instance& inst);

int qubit_count(const Instance& inst);
std::string kind_of(const Instance& inst);

// Generators. Deterministic in seed.
//
// UC draws uniform integers A in [1,20], B in [1,10], C in [0,3], p in [1,50]
// and sets L to the output of a random nonempty proper subset of units.
UcInstance generate_uc_instance(int n_units, std::uint64_t seed);
// Cities / positions are random integer points in [0,100]^2; distances are
// rounded Euclidean distances, at least 1. Transport densities are integers in
// [0,10] with a zero diagonal.
TspInstance generate_tsp_instance(int n_cit, std::uint64_t seed);
FlInstance generate_fl_instance(int n_mach, int n_pos, std::uint64_t seed);

// Four-unit instance with demand L = 300 and outputs in the hundreds, so the
// raw Ising coefficients are in the thousands as in the published baseline.
UcInstance baseline_uc_instance();

nlohmann::json instance_to_json(const Instance& inst);
Instance instance_from_json(const nlohmann::json& j);

}  // namespace qaoalab
