#include "qaoalab/problems.hpp"

#include <cmath>
#include <random>

#include "qaoalab/errors.hpp"

namespace qaoalab {

namespace {

constexpr int kMaxVariables = 62;

void check_capacity(int n) {
  if (n > kMaxVariables) {
    throw Error(Errc::capacity, "problem needs " + std::to_string(n) + " variables, limit is " +
                                    std::to_string(kMaxVariables));
  }
}

void check_distance_matrix(const Eigen::MatrixXd& D, int size, const char* what) {
  if (D.rows() != size || D.cols() != size) {
    throw Error(Errc::instance_shape, std::string(what) + " must be " + std::to_string(size) + "x" +
                                          std::to_string(size));
  }
  for (int i = 0; i < size; ++i) {
    if (D(i, i) != 0.0) throw Error(Errc::instance_shape, std::string(what) + " diagonal must be zero");
    for (int j = 0; j < size; ++j) {
      if (D(i, j) != D(j, i)) throw Error(Errc::instance_shape, std::string(what) + " must be symmetric");
      if (!(D(i, j) >= 0.0)) {
        throw Error(Errc::instance_shape, std::string(what) + " entries must be non-negative");
      }
    }
  }
}

double rounded_distance(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return std::max(1.0, std::round((a - b).norm()));
}

std::vector<Eigen::Vector2d> random_points(int count, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> coord(0, 100);
  std::vector<Eigen::Vector2d> pts(count);
  for (auto& pt : pts) {
    const int x = coord(rng);
    const int y = coord(rng);
    pt = Eigen::Vector2d(x, y);
  }
  return pts;
}

Eigen::MatrixXd distance_matrix(const std::vector<Eigen::Vector2d>& pts) {
  const int m = static_cast<int>(pts.size());
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) D(i, j) = D(j, i) = rounded_distance(pts[i], pts[j]);
  return D;
}

}  // namespace

void validate(const UcInstance& inst) {
  if (inst.n_units < 1) throw Error(Errc::instance_shape, "n_units must be positive");
  const auto n = static_cast<Eigen::Index>(inst.n_units);
  if (inst.A.size() != n || inst.B.size() != n || inst.C.size() != n || inst.power.size() != n) {
    throw Error(Errc::instance_shape, "A, B, C and p must all have n_units entries");
  }
  if ((inst.power.array() < 1).any()) throw Error(Errc::instance_shape, "unit outputs must be >= 1");
  check_capacity(inst.n_units);
}

void validate(const TspInstance& inst) {
  if (inst.n_cit < 1) throw Error(Errc::instance_shape, "n_cit must be positive");
  check_distance_matrix(inst.D, inst.n_cit, "TSP distance matrix");
  check_capacity(inst.n_cit * inst.n_cit);
}

void validate(const FlInstance& inst) {
  if (inst.n_mach < 1 || inst.n_pos < 1) throw Error(Errc::instance_shape, "n_mach and n_pos must be positive");
  if (inst.n_mach > inst.n_pos) {
    throw Error(Errc::infeasible_instance, "cannot place " + std::to_string(inst.n_mach) + " machines on " +
                                               std::to_string(inst.n_pos) + " positions");
  }
  check_distance_matrix(inst.D, inst.n_pos, "FL distance matrix");
  if (inst.T.rows() != inst.n_mach || inst.T.cols() != inst.n_mach) {
    throw Error(Errc::instance_shape, "transport matrix must be n_mach x n_mach");
  }
  if ((inst.T.array() < 0.0).any()) throw Error(Errc::instance_shape, "transport densities must be >= 0");
  check_capacity(inst.n_mach * inst.n_pos);
}

ProblemFunctions build_uc(const UcInstance& inst) {
  validate(inst);
  const int n = inst.n_units;
  Eigen::VectorXd unit_cost(n);
  for (int i = 0; i < n; ++i) {
    const double p = inst.power(i);
    unit_cost(i) = inst.A(i) + inst.B(i) * p + inst.C(i) * p * p;
  }
  const Eigen::VectorXi power = inst.power;
  const long long demand = inst.demand;

  auto produced = [power, n](Bitstring x) {
    long long total = 0;
    for (int i = 0; i < n; ++i)
      if (bit(x, i)) total += power(i);
    return total;
  };

  ProblemFunctions f;
  f.kind = "uc";
  f.n = n;
  f.cost = [unit_cost, n](Bitstring x) {
    double total = 0.0;
    for (int i = 0; i < n; ++i)
      if (bit(x, i)) total += unit_cost(i);
    return total;
  };
  f.penalties.push_back([produced, demand](Bitstring x) {
    const double miss = static_cast<double>(produced(x) - demand);
    return miss * miss;
  });
  f.validity = [produced, demand](Bitstring x) { return produced(x) == demand; };
  return f;
}

ProblemFunctions build_tsp(const TspInstance& inst) {
  validate(inst);
  const int m = inst.n_cit;
  const Eigen::MatrixXd D = inst.D;
  auto at = [m](Bitstring x, int city, int time) { return bit(x, city * m + time); };

  ProblemFunctions f;
  f.kind = "tsp";
  f.n = m * m;
  f.cost = [D, m, at](Bitstring x) {
    double total = 0.0;
    for (int j = 0; j < m; ++j) {
      const int next = (j + 1) % m;
      for (int i = 0; i < m; ++i) {
        if (!at(x, i, j)) continue;
        for (int k = 0; k < m; ++k)
          if (at(x, k, next)) total += D(i, k);
      }
    }
    return total;
  };
  f.penalties.push_back([m, at](Bitstring x) {
    double total = 0.0;
    for (int i = 0; i < m; ++i) {
      int row = 0;
      int col = 0;
      for (int j = 0; j < m; ++j) {
        row += at(x, i, j);
        col += at(x, j, i);
      }
      total += double(1 - row) * (1 - row) + double(1 - col) * (1 - col);
    }
    return total;
  });
  f.validity = [m, at](Bitstring x) {
    for (int i = 0; i < m; ++i) {
      int row = 0;
      int col = 0;
      for (int j = 0; j < m; ++j) {
        row += at(x, i, j);
        col += at(x, j, i);
      }
      if (row != 1 || col != 1) return false;
    }
    return true;
  };
  return f;
}

ProblemFunctions build_fl(const FlInstance& inst) {
  validate(inst);
  const int machines = inst.n_mach;
  const int positions = inst.n_pos;
  const Eigen::MatrixXd D = inst.D;
  const Eigen::MatrixXd T = inst.T;
  auto at = [positions](Bitstring x, int machine, int pos) { return bit(x, machine * positions + pos); };

  ProblemFunctions f;
  f.kind = "fl";
  f.n = machines * positions;
  // Ordered machine pairs in both directions; T need not be symmetric.
  f.cost = [=](Bitstring x) {
    double total = 0.0;
    for (int i = 0; i < machines; ++i)
      for (int j = 0; j < positions; ++j) {
        if (!at(x, i, j)) continue;
        for (int k = 0; k < machines; ++k)
          for (int l = 0; l < positions; ++l)
            if (at(x, k, l)) total += D(j, l) * T(i, k);
      }
    return total;
  };
  // Every machine placed exactly once.
  f.penalties.push_back([=](Bitstring x) {
    double total = 0.0;
    for (int i = 0; i < machines; ++i) {
      int placed = 0;
      for (int j = 0; j < positions; ++j) placed += at(x, i, j);
      total += double(placed - 1) * (placed - 1);
    }
    return total;
  });
  // No position shared by two distinct machines.
  f.penalties.push_back([=](Bitstring x) {
    double total = 0.0;
    for (int j = 0; j < positions; ++j) {
      int occupants = 0;
      for (int i = 0; i < machines; ++i) occupants += at(x, i, j);
      total += double(occupants) * (occupants - 1);
    }
    return total;
  });
  f.validity = [=](Bitstring x) {
    for (int i = 0; i < machines; ++i) {
      int placed = 0;
      for (int j = 0; j < positions; ++j) placed += at(x, i, j);
      if (placed != 1) return false;
    }
    for (int j = 0; j < positions; ++j) {
      int occupants = 0;
      for (int i = 0; i < machines; ++i) occupants += at(x, i, j);
      if (occupants > 1) return false;
    }
    return true;
  };
  return f;
}

ProblemFunctions build(const Instance& inst) {
  return std::visit(
      [](const auto& concrete) -> ProblemFunctions {
        using T = std::decay_t<decltype(concrete)>;
        if constexpr (std::is_same_v<T, UcInstance>) return build_uc(concrete);
        else if constexpr (std::is_same_v<T, TspInstance>) return build_tsp(concrete);
        else return build_fl(concrete);
      },
      inst);
}

int qubit_count(const Instance& inst) {
  return std::visit(
      [](const auto& concrete) -> int {
        using T = std::decay_t<decltype(concrete)>;
        if constexpr (std::is_same_v<T, UcInstance>) return concrete.n_units;
        else if constexpr (std::is_same_v<T, TspInstance>) return concrete.n_cit * concrete.n_cit;
        else return concrete.n_mach * concrete.n_pos;
      },
      inst);
}

std::string kind_of(const Instance& inst) {
  static const char* names[] = {"uc", "tsp", "fl"};
  return names[inst.index()];
}

UcInstance generate_uc_instance(int n_units, std::uint64_t seed) {
  if (n_units < 2) throw Error(Errc::degenerate_instance, "UC generator needs at least 2 units");
  check_capacity(n_units);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> a_dist(1, 20), b_dist(1, 10), c_dist(0, 3), p_dist(1, 50);

  UcInstance inst;
  inst.n_units = n_units;
  inst.A.resize(n_units);
  inst.B.resize(n_units);
  inst.C.resize(n_units);
  inst.power.resize(n_units);
  for (int i = 0; i < n_units; ++i) {
    inst.A(i) = a_dist(rng);
    inst.B(i) = b_dist(rng);
    inst.C(i) = c_dist(rng);
    inst.power(i) = p_dist(rng);
  }

  std::bernoulli_distribution coin(0.5);
  std::vector<bool> chosen(n_units);
  int count = 0;
  do {
    count = 0;
    for (int i = 0; i < n_units; ++i) {
      chosen[i] = coin(rng);
      count += chosen[i];
    }
  } while (count == 0 || count == n_units);
  inst.demand = 0;
  for (int i = 0; i < n_units; ++i)
    if (chosen[i]) inst.demand += inst.power(i);
  inst.seed = seed;
  return inst;
}

TspInstance generate_tsp_instance(int n_cit, std::uint64_t seed) {
  if (n_cit < 2) throw Error(Errc::degenerate_instance, "TSP generator needs at least 2 cities");
  check_capacity(n_cit * n_cit);
  std::mt19937_64 rng(seed);
  TspInstance inst;
  inst.n_cit = n_cit;
  inst.D = distance_matrix(random_points(n_cit, rng));
  inst.seed = seed;
  return inst;
}

FlInstance generate_fl_instance(int n_mach, int n_pos, std::uint64_t seed) {
  if (n_mach < 1 || n_pos < 2) throw Error(Errc::degenerate_instance, "FL generator needs n_mach >= 1, n_pos >= 2");
  if (n_mach > n_pos) throw Error(Errc::infeasible_instance, "more machines than positions");
  check_capacity(n_mach * n_pos);
  std::mt19937_64 rng(seed);
  FlInstance inst;
  inst.n_mach = n_mach;
  inst.n_pos = n_pos;
  inst.D = distance_matrix(random_points(n_pos, rng));
  std::uniform_int_distribution<int> flow(0, 10);
  inst.T = Eigen::MatrixXd::Zero(n_mach, n_mach);
  for (int i = 0; i < n_mach; ++i)
    for (int k = 0; k < n_mach; ++k)
      if (i != k) inst.T(i, k) = flow(rng);
  inst.seed = seed;
  return inst;
}

UcInstance baseline_uc_instance() {
  UcInstance inst;
  inst.n_units = 4;
  inst.A = Eigen::Vector4d(10, 12, 8, 5);
  inst.B = Eigen::Vector4d(2, 1, 2, 3);
  inst.C = Eigen::Vector4d(0.01, 0.005, 0.008, 0.02);
  inst.power = Eigen::Vector4i(100, 200, 150, 50);
  inst.demand = 300;
  return inst;
}

// ---- JSON ----------------------------------------------------------------

namespace {

using nlohmann::json;

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row(m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) row[j] = m(i, j);
    rows.push_back(row);
  }
  return rows;
}

Eigen::VectorXd vector_from(const json& j, const char* key) {
  const auto values = j.at(key).get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Eigen::MatrixXd matrix_from(const json& j, const char* key) {
  const auto rows = j.at(key).get<std::vector<std::vector<double>>>();
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = r == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(rows.front().size());
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != c) {
      throw Error(Errc::instance_shape, std::string("ragged matrix '") + key + "'");
    }
    for (Eigen::Index k = 0; k < c; ++k) m(i, k) = rows[i][k];
  }
  return m;
}

std::optional<std::uint64_t> seed_from(const json& j) {
  if (j.contains("seed") && !j.at("seed").is_null()) return j.at("seed").get<std::uint64_t>();
  return std::nullopt;
}

void put_seed(json& j, const std::optional<std::uint64_t>& seed) {
  if (seed) j["seed"] = *seed;
  else j["seed"] = nullptr;
}

}  // namespace

nlohmann::json instance_to_json(const Instance& inst) {
  return std::visit(
      [](const auto& c) -> json {
        using T = std::decay_t<decltype(c)>;
        json j;
        if constexpr (std::is_same_v<T, UcInstance>) {
          j["kind"] = "uc";
          j["n_units"] = c.n_units;
          j["A"] = vector_json(c.A);
          j["B"] = vector_json(c.B);
          j["C"] = vector_json(c.C);
          j["p"] = std::vector<int>(c.power.data(), c.power.data() + c.power.size());
          j["L"] = c.demand;
        } else if constexpr (std::is_same_v<T, TspInstance>) {
          j["kind"] = "tsp";
          j["n_cit"] = c.n_cit;
          j["D"] = matrix_json(c.D);
        } else {
          j["kind"] = "fl";
          j["n_mach"] = c.n_mach;
          j["n_pos"] = c.n_pos;
          j["D"] = matrix_json(c.D);
          j["T"] = matrix_json(c.T);
        }
        put_seed(j, c.seed);
        return j;
      },
      inst);
}

Instance instance_from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "uc") {
    UcInstance inst;
    inst.n_units = j.at("n_units").get<int>();
    inst.A = vector_from(j, "A");
    inst.B = vector_from(j, "B");
    inst.C = vector_from(j, "C");
    const auto p = j.at("p").get<std::vector<int>>();
    inst.power = Eigen::Map<const Eigen::VectorXi>(p.data(), static_cast<Eigen::Index>(p.size()));
    inst.demand = j.at("L").get<int>();
    inst.seed = seed_from(j);
    validate(inst);
    return inst;
  }
  if (kind == "tsp") {
    TspInstance inst;
    inst.n_cit = j.at("n_cit").get<int>();
    inst.D = matrix_from(j, "D");
    inst.seed = seed_from(j);
    validate(inst);
    return inst;
  }
  if (kind == "fl") {
    FlInstance inst;
    inst.n_mach = j.at("n_mach").get<int>();
    inst.n_pos = j.at("n_pos").get<int>();
    inst.D = matrix_from(j, "D");
    inst.T = matrix_from(j, "T");
    inst.seed = seed_from(j);
    validate(inst);
    return inst;
  }
  throw Error(Errc::instance_shape, "unknown instance kind '" + kind + "'");
}

}  // namespace qaoalab
