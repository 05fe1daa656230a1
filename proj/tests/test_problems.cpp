#include "doctest.h"

#include "qaoalab/problems.hpp"
#include "test_support.hpp"

using namespace qaoalab;
using test_support::bits;

namespace {

std::uint64_t count_valid(const ProblemFunctions& funcs) {
  std::uint64_t valid = 0;
  for (Bitstring x = 0; x < (Bitstring{1} << funcs.n); ++x) valid += funcs.validity(x) ? 1 : 0;
  return valid;
}

void check_validity_matches_penalties(const ProblemFunctions& funcs) {
  for (Bitstring x = 0; x < (Bitstring{1} << funcs.n); ++x) {
    bool all_zero = true;
    for (const auto& pen : funcs.penalties) {
      CHECK(pen(x) >= 0.0);
      all_zero = all_zero && pen(x) == 0.0;
    }
    CHECK(funcs.validity(x) == all_zero);
  }
}

std::uint64_t factorial(int n) { return n <= 1 ? 1 : n * factorial(n - 1); }

}  // namespace

TEST_CASE("two-unit UC costs and penalties") {
  const ProblemFunctions f = build_uc(test_support::two_unit_uc());
  CHECK(f.n == 2);
  CHECK(f.cost(bits("01")) == 4.0);
  CHECK(f.cost(bits("10")) == 3.0);
  CHECK(f.cost(bits("11")) == 7.0);
  CHECK(f.cost(bits("00")) == 0.0);
  CHECK(f.penalties.at(0)(bits("01")) == 0.0);
  CHECK(f.penalties.at(0)(bits("10")) == 1.0);
  CHECK(f.penalties.at(0)(bits("00")) == 9.0);
  CHECK(f.penalties.at(0)(bits("11")) == 4.0);
  CHECK(f.validity(bits("01")));
  CHECK_FALSE(f.validity(bits("10")));
  CHECK_FALSE(f.validity(bits("00")));
  CHECK_FALSE(f.validity(bits("11")));
}

TEST_CASE("UC all-zero bitstring costs nothing and pays L squared") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const UcInstance inst = generate_uc_instance(6, seed);
    const ProblemFunctions f = build_uc(inst);
    CHECK(f.cost(0) == 0.0);
    CHECK(f.penalty_sum(0) == static_cast<double>(inst.demand) * inst.demand);
  }
}

TEST_CASE("UC shape errors") {
  UcInstance inst = test_support::two_unit_uc();
  inst.B = Eigen::Vector3d(1, 1, 1);
  CHECK_THROWS_AS(build_uc(inst), Error);
  try {
    build_uc(inst);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::instance_shape);
  }
}

TEST_CASE("UC generator is deterministic, feasible and in range") {
  for (int n = 2; n <= 12; ++n) {
    const UcInstance a = generate_uc_instance(n, 42 + n);
    const UcInstance b = generate_uc_instance(n, 42 + n);
    CHECK(a.A == b.A);
    CHECK(a.power == b.power);
    CHECK(a.demand == b.demand);
    CHECK(a.A.minCoeff() >= 1);
    CHECK(a.A.maxCoeff() <= 20);
    CHECK(a.B.minCoeff() >= 1);
    CHECK(a.B.maxCoeff() <= 10);
    CHECK(a.C.minCoeff() >= 0);
    CHECK(a.C.maxCoeff() <= 3);
    CHECK(a.power.minCoeff() >= 1);
    CHECK(a.power.maxCoeff() <= 50);
    const ProblemFunctions f = build_uc(a);
    CHECK(count_valid(f) >= 1);
    check_validity_matches_penalties(f);
  }
  CHECK_THROWS_AS(generate_uc_instance(1, 0), Error);
}

TEST_CASE("TSP two cities") {
  TspInstance inst;
  inst.n_cit = 2;
  inst.D = Eigen::Matrix2d{{0, 5}, {5, 0}};
  const ProblemFunctions f = build_tsp(inst);
  CHECK(f.n == 4);
  // x_{city, time} at flat index city * n + time.
  CHECK(f.validity(bits("1001")));
  CHECK(f.validity(bits("0110")));
  CHECK(f.cost(bits("1001")) == 10.0);
  CHECK(f.cost(bits("0110")) == 10.0);
  CHECK(count_valid(f) == 2);
}

TEST_CASE("TSP identity permutation on zero distances") {
  TspInstance inst;
  inst.n_cit = 3;
  inst.D = Eigen::Matrix3d::Zero();
  const ProblemFunctions f = build_tsp(inst);
  const Bitstring identity = bits("100010001");
  CHECK(f.cost(identity) == 0.0);
  CHECK(f.penalty_sum(identity) == 0.0);
}

TEST_CASE("TSP valid count is n_cit factorial") {
  for (int n = 2; n <= 3; ++n) {
    const ProblemFunctions f = build_tsp(generate_tsp_instance(n, 3));
    CHECK(f.n == n * n);
    CHECK(count_valid(f) == factorial(n));
    check_validity_matches_penalties(f);
  }
}

TEST_CASE("TSP rejects asymmetric or negative distances") {
  TspInstance inst;
  inst.n_cit = 2;
  inst.D = Eigen::Matrix2d{{0, 5}, {4, 0}};
  CHECK_THROWS_AS(build_tsp(inst), Error);
  inst.D = Eigen::Matrix2d{{0, -1}, {-1, 0}};
  CHECK_THROWS_AS(build_tsp(inst), Error);
}

TEST_CASE("FL single placement") {
  FlInstance inst;
  inst.n_mach = 1;
  inst.n_pos = 1;
  inst.D = Eigen::MatrixXd::Zero(1, 1);
  inst.T = Eigen::MatrixXd::Zero(1, 1);
  const ProblemFunctions f = build_fl(inst);
  CHECK(f.n == 1);
  CHECK(f.cost(1) == 0.0);
  CHECK(f.penalties.size() == 2);
  CHECK(f.penalties[0](1) == 0.0);
  CHECK(f.penalties[1](1) == 0.0);
}

TEST_CASE("FL two machines on two positions") {
  FlInstance inst;
  inst.n_mach = 2;
  inst.n_pos = 2;
  inst.D = Eigen::Matrix2d{{0, 1}, {1, 0}};
  inst.T = Eigen::Matrix2d{{0, 3}, {3, 0}};
  const ProblemFunctions f = build_fl(inst);
  CHECK(count_valid(f) == 2);
  // x_{machine, position} at flat index machine * n_pos + position.
  CHECK(f.validity(bits("1001")));
  CHECK(f.validity(bits("0110")));
  CHECK(f.cost(bits("1001")) == 6.0);
  CHECK(f.cost(bits("0110")) == 6.0);
  check_validity_matches_penalties(f);
}

TEST_CASE("FL valid count is n_pos! / (n_pos - n_mach)!") {
  for (auto [m, p] : std::vector<std::pair<int, int>>{{1, 3}, {2, 2}, {2, 3}, {3, 3}, {2, 4}, {3, 4}, {2, 5}}) {
    const ProblemFunctions f = build_fl(generate_fl_instance(m, p, 17));
    CHECK(f.n == m * p);
    CHECK(count_valid(f) == factorial(p) / factorial(p - m));
    check_validity_matches_penalties(f);
  }
}

TEST_CASE("FL with more machines than positions is infeasible") {
  FlInstance inst;
  inst.n_mach = 3;
  inst.n_pos = 2;
  inst.D = Eigen::Matrix2d{{0, 1}, {1, 0}};
  inst.T = Eigen::Matrix3d::Zero();
  try {
    build_fl(inst);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::infeasible_instance);
  }
}

TEST_CASE("UC penalty is zero exactly on valid bitstrings") {
  const ProblemFunctions f = build_uc(baseline_uc_instance());
  check_validity_matches_penalties(f);
  CHECK(count_valid(f) >= 1);
}

TEST_CASE("instance JSON round trip") {
  const std::vector<Instance> instances = {generate_uc_instance(5, 1), generate_tsp_instance(3, 2),
                                           generate_fl_instance(2, 3, 3)};
  for (const auto& inst : instances) {
    const nlohmann::json j = instance_to_json(inst);
    const Instance back = instance_from_json(j);
    CHECK(instance_to_json(back) == j);
    CHECK(kind_of(back) == kind_of(inst));
    CHECK(qubit_count(back) == qubit_count(inst));
  }
}

TEST_CASE("capacity limit on variables") {
  CHECK_THROWS_AS(build_tsp(generate_tsp_instance(8, 1)), Error);
}
