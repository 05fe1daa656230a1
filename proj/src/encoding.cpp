#include "qaoalab/encoding.hpp"

#include <limits>
#include <random>

#include <boost/multiprecision/cpp_int.hpp>

namespace qaoalab {

namespace {

using Rational = boost::multiprecision::cpp_rational;
using boost::multiprecision::cpp_int;

constexpr int kExhaustiveCheckLimit = 16;
constexpr int kSampledChecks = 4096;

Rational exact(double value) {
  if (value == 0.0) return Rational(0);
  if (!std::isfinite(value)) throw Error(Errc::invalid_argument, "non-finite value in exact conversion");
  int exponent = 0;
  const double mantissa = std::frexp(value, &exponent);
  const auto digits = static_cast<long long>(std::ldexp(mantissa, 53));
  exponent -= 53;
  cpp_int numerator(digits);
  if (exponent >= 0) return Rational(numerator << exponent);
  return Rational(numerator, cpp_int(1) << -exponent);
}

// Smallest double d with exact(d) >= value.
double round_up(const Rational& value) {
  double d = value.convert_to<double>();
  while (exact(d) < value) d = std::nextafter(d, std::numeric_limits<double>::infinity());
  while (true) {
    const double lower = std::nextafter(d, -std::numeric_limits<double>::infinity());
    if (exact(lower) >= value) d = lower;
    else break;
  }
  return d;
}

struct Enumeration {
  std::vector<double> cost;
  std::vector<double> penalty;
  std::vector<Bitstring> valid;
  std::vector<Bitstring> invalid;
};

Enumeration enumerate(const ProblemFunctions& funcs) {
  check_enumerable(funcs.n);
  const std::uint64_t dim = std::uint64_t{1} << funcs.n;
  Enumeration e;
  e.cost.resize(dim);
  e.penalty.resize(dim);
  for (Bitstring x = 0; x < dim; ++x) {
    e.cost[x] = funcs.cost(x);
    e.penalty[x] = funcs.penalty_sum(x);
    if (funcs.validity(x)) {
      if (e.penalty[x] != 0.0) {
        throw Error(Errc::internal_consistency,
                    "valid bitstring " + bitstring_label(x, funcs.n) + " has nonzero penalty");
      }
      e.valid.push_back(x);
    } else {
      e.invalid.push_back(x);
    }
  }
  if (e.valid.empty()) throw Error(Errc::infeasible_problem, "no valid solution exists");
  return e;
}

struct ValidStats {
  Rational min_cost;
  Rational mean_cost;
  Rational threshold;
};

ValidStats valid_stats(const Enumeration& e) {
  ValidStats s;
  Rational total(0);
  s.min_cost = exact(e.cost[e.valid.front()]);
  for (Bitstring x : e.valid) {
    const Rational c = exact(e.cost[x]);
    total += c;
    if (c < s.min_cost) s.min_cost = c;
  }
  s.mean_cost = total / Rational(static_cast<long long>(e.valid.size()));
  s.threshold = (s.min_cost + s.mean_cost) / 2;
  return s;
}

}  // namespace

Qubo extract_quadratic(const BinaryFunction& f, int n) {
  if (n < 0 || n > 62) throw Error(Errc::capacity, "too many variables for a Bitstring");
  Qubo q = Qubo::zero(n);
  q.constant = f(0);
  std::vector<double> single(n);
  for (int i = 0; i < n; ++i) {
    single[i] = f(Bitstring{1} << i);
    q.linear(i) = single[i] - q.constant;
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      q.quadratic(i, j) = f((Bitstring{1} << i) | (Bitstring{1} << j)) - single[i] - single[j] + q.constant;

  auto check = [&](Bitstring x) {
    const double expected = f(x);
    const double got = q(x);
    if (std::abs(expected - got) > 1e-9 * std::max(1.0, std::abs(expected))) {
      throw Error(Errc::encoding, "function is not quadratic (mismatch at " + bitstring_label(x, n) + ")");
    }
  };
  if (n <= kExhaustiveCheckLimit) {
    for (Bitstring x = 0; x < (Bitstring{1} << n); ++x) check(x);
  } else {
    std::mt19937_64 rng(0x5eedULL + n);
    const Bitstring mask = n == 64 ? ~Bitstring{0} : (Bitstring{1} << n) - 1;
    for (int k = 0; k < kSampledChecks; ++k) check(rng() & mask);
  }
  return q;
}

Qubo assemble(const ProblemFunctions& funcs, const std::vector<double>& penalty_factors, double scale) {
  if (penalty_factors.size() != funcs.penalties.size()) {
    throw Error(Errc::invalid_argument, "expected " + std::to_string(funcs.penalties.size()) +
                                            " penalty factors, got " + std::to_string(penalty_factors.size()));
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) throw Error(Errc::invalid_argument, "scaling factor must be > 0");

  Qubo total = extract_quadratic(funcs.cost, funcs.n);
  for (std::size_t j = 0; j < funcs.penalties.size(); ++j) {
    const Qubo pen = extract_quadratic(funcs.penalties[j], funcs.n);
    const double factor = penalty_factors[j];
    total.constant += factor * pen.constant;
    total.linear += factor * pen.linear;
    total.quadratic += factor * pen.quadratic;
  }
  total.constant *= scale;
  total.linear *= scale;
  total.quadratic *= scale;
  total.scale = scale;
  total.penalty_factors = penalty_factors;
  return total;
}

Qubo assemble(const ProblemFunctions& funcs, double penalty_factor, double scale) {
  return assemble(funcs, std::vector<double>(funcs.penalties.size(), penalty_factor), scale);
}

PenaltyTuning tune_penalty(const ProblemFunctions& funcs, int max_iterations) {
  const Enumeration e = enumerate(funcs);
  const ValidStats stats = valid_stats(e);

  PenaltyTuning out;
  out.min_valid_cost = stats.min_cost.convert_to<double>();
  out.mean_valid_cost = stats.mean_cost.convert_to<double>();
  out.threshold = stats.threshold.convert_to<double>();
  if (e.invalid.empty()) {
    out.history.push_back(0.0);
    return out;
  }

  Rational penalty(0);
  std::vector<Bitstring> candidates;
  while (true) {
    // Prefilter in double precision, decide exactly among near-minimal states.
    const double approx = penalty.convert_to<double>();
    double lowest = std::numeric_limits<double>::infinity();
    double largest = 0.0;
    for (Bitstring x : e.invalid) {
      const double value = e.cost[x] + approx * e.penalty[x];
      lowest = std::min(lowest, value);
      largest = std::max(largest, std::abs(e.cost[x]) + std::abs(approx * e.penalty[x]));
    }
    const double slack = 1e-9 * (1.0 + largest);
    candidates.clear();
    for (Bitstring x : e.invalid)
      if (e.cost[x] + approx * e.penalty[x] <= lowest + slack) candidates.push_back(x);

    Bitstring cheapest = candidates.front();
    Rational min_wrong = exact(e.cost[cheapest]) + penalty * exact(e.penalty[cheapest]);
    for (Bitstring x : candidates) {
      const Rational value = exact(e.cost[x]) + penalty * exact(e.penalty[x]);
      if (value < min_wrong) {
        min_wrong = value;
        cheapest = x;
      }
    }

    out.history.push_back(round_up(penalty));
    if (min_wrong >= stats.threshold) {
      out.penalty = round_up(penalty);
      out.min_wrong_value = min_wrong.convert_to<double>();
      out.cheapest_wrong = cheapest;
      return out;
    }
    if (e.penalty[cheapest] == 0.0) {
      throw Error(Errc::internal_consistency,
                  "invalid bitstring " + bitstring_label(cheapest, funcs.n) + " has zero penalty");
    }
    if (out.iterations >= max_iterations) {
      throw Error(Errc::internal_consistency, "penalty tuning did not terminate");
    }
    penalty += (stats.threshold - min_wrong) / exact(e.penalty[cheapest]);
    ++out.iterations;
  }
}

bool penalty_condition_holds(const ProblemFunctions& funcs, double penalty) {
  const Enumeration e = enumerate(funcs);
  const ValidStats stats = valid_stats(e);
  const Rational p = exact(penalty);
  for (Bitstring x : e.invalid)
    if (exact(e.cost[x]) + p * exact(e.penalty[x]) < stats.threshold) return false;
  return true;
}

Encoding encode(const ProblemFunctions& funcs, const EncodingPolicy& policy) {
  Encoding enc;
  if (policy.penalty) enc.penalty = *policy.penalty;
  else if (!funcs.penalties.empty()) enc.penalty = tune_penalty(funcs).penalty;

  if (policy.scale) {
    enc.scale = *policy.scale;
  } else {
    enc.scale = scaling_factor(qubo_to_ising(assemble(funcs, enc.penalty, 1.0)));
  }
  enc.qubo = assemble(funcs, enc.penalty, enc.scale);
  enc.ising = qubo_to_ising(enc.qubo);
  return enc;
}

nlohmann::json ising_to_json(const Ising& ham) {
  nlohmann::json j;
  j["n"] = ham.n;
  j["dropped_offset"] = ham.dropped_offset;
  j["h"] = nlohmann::json::array();
  j["J"] = nlohmann::json::array();
  for (int i = 0; i < ham.n; ++i) {
    if (ham.h(i) != 0.0) j["h"].push_back({{"i", i}, {"h", ham.h(i)}});
    for (int k = i + 1; k < ham.n; ++k)
      if (ham.J(i, k) != 0.0) j["J"].push_back({{"i", i}, {"j", k}, {"J", ham.J(i, k)}});
  }
  return j;
}

Ising ising_from_json(const nlohmann::json& j) {
  const int n = j.at("n").get<int>();
  if (n < 0 || n > 62) throw Error(Errc::capacity, "qubit count out of range");
  Ising ham = Ising::zero(n);
  ham.dropped_offset = j.value("dropped_offset", 0.0);
  for (const auto& term : j.at("h")) {
    const int i = term.at("i").get<int>();
    if (i < 0 || i >= n) throw Error(Errc::dimension_mismatch, "field index out of range");
    ham.h(i) += term.at("h").get<double>();
  }
  for (const auto& term : j.at("J")) {
    int a = term.at("i").get<int>();
    int b = term.at("j").get<int>();
    if (a == b || a < 0 || b < 0 || a >= n || b >= n) {
      throw Error(Errc::dimension_mismatch, "coupling indices out of range");
    }
    if (a > b) std::swap(a, b);
    ham.J(a, b) += term.at("J").get<double>();
  }
  return ham;
}

std::string bitstring_label(Bitstring x, int n) {
  std::string s(static_cast<std::size_t>(n), '0');
  for (int i = 0; i < n; ++i)
    if (bit(x, i)) s[static_cast<std::size_t>(i)] = '1';
  return s;
}

void write_spectrum_csv(const Spectrum<double>& spec, int n, std::ostream& out) {
  out << "bitstring,energy\n";
  out.precision(17);
  for (Eigen::Index x = 0; x < spec.energies.size(); ++x)
    out << bitstring_label(static_cast<Bitstring>(x), n) << ',' << spec.energies(x) << '\n';
}

}  // namespace qaoalab
