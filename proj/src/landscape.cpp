#include "qaoalab/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

namespace qaoalab {

namespace {

void check_resolution(int resolution) {
  if (resolution < 2) throw Error(Errc::invalid_argument, "scan resolution must be >= 2");
}

void fill(ScanGrid& grid, const Objective& objective, int jobs) {
  const int rows = grid.rows.resolution;
  const int cols = grid.cols.resolution;
  grid.values.resize(rows, cols);
  auto work = [&](int first, int stride) {
    for (int i = first; i < rows; i += stride)
      for (int j = 0; j < cols; ++j) grid.values(i, j) = objective(grid.point(i, j));
  };
  const int workers = std::clamp(jobs, 1, rows);
  if (workers == 1) {
    work(0, 1);
    return;
  }
  std::vector<std::jthread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
}

std::string join(const Eigen::VectorXd& v) {
  std::ostringstream s;
  s << std::setprecision(17);
  for (Eigen::Index i = 0; i < v.size(); ++i) s << (i ? ";" : "") << v(i);
  return s.str();
}

Eigen::VectorXd split(const std::string& text) {
  std::vector<double> values;
  std::istringstream s(text);
  std::string item;
  while (std::getline(s, item, ';'))
    if (!item.empty()) values.push_back(std::stod(item));
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::string axis_text(const Axis& axis) {
  std::ostringstream s;
  s << std::setprecision(17) << axis.name << ';' << axis.lower << ';' << axis.upper << ';' << axis.resolution;
  return s.str();
}

Axis parse_axis(const std::string& text) {
  std::istringstream s(text);
  Axis axis;
  std::string lower, upper, resolution;
  if (!std::getline(s, axis.name, ';') || !std::getline(s, lower, ';') || !std::getline(s, upper, ';') ||
      !std::getline(s, resolution, ';')) {
    throw Error(Errc::io, "malformed axis line '" + text + "'");
  }
  axis.lower = std::stod(lower);
  axis.upper = std::stod(upper);
  axis.resolution = std::stoi(resolution);
  check_resolution(axis.resolution);
  return axis;
}

}  // namespace

ScanGrid grid_scan(const Objective& objective, int layers, Range beta, Range gamma, int resolution, int jobs) {
  if (layers != 1) throw Error(Errc::invalid_argument, "grid_scan needs p = 1; use random_plane_scan for p > 1");
  check_resolution(resolution);
  ScanGrid grid;
  grid.rows = {"beta", beta.lower, beta.upper, resolution};
  grid.cols = {"gamma", gamma.lower, gamma.upper, resolution};
  grid.center = Eigen::VectorXd::Zero(2);
  grid.theta1 = Eigen::Vector2d(1.0, 0.0);
  grid.theta2 = Eigen::Vector2d(0.0, 1.0);
  grid.metadata["scan"] = "grid";
  grid.metadata["p"] = "1";
  fill(grid, objective, jobs);
  return grid;
}

ScanGrid plane_scan(const Objective& objective, const Eigen::VectorXd& center, const Eigen::VectorXd& theta1,
                    const Eigen::VectorXd& theta2, Range a, Range b, int resolution, int jobs) {
  check_resolution(resolution);
  if (theta1.size() != center.size() || theta2.size() != center.size()) {
    throw Error(Errc::dimension_mismatch, "plane directions must match the center dimension");
  }
  const double n1 = theta1.norm(), n2 = theta2.norm();
  if (!(n1 > 0.0) || !(n2 > 0.0) || std::abs(theta1.dot(theta2)) >= (1.0 - 1e-12) * n1 * n2) {
    throw Error(Errc::degenerate_plane, "plane directions must be nonzero and not parallel");
  }
  ScanGrid grid;
  grid.rows = {"a", a.lower, a.upper, resolution};
  grid.cols = {"b", b.lower, b.upper, resolution};
  grid.center = center;
  grid.theta1 = theta1;
  grid.theta2 = theta2;
  grid.metadata["scan"] = "plane";
  grid.metadata["p"] = std::to_string(center.size() / 2);
  fill(grid, objective, jobs);
  return grid;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> random_directions(int dim, std::uint64_t seed) {
  if (dim < 2) throw Error(Errc::invalid_argument, "a plane needs at least two dimensions");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd u(dim), v(dim);
  for (int k = 0; k < dim; ++k) u(k) = normal(rng);
  for (int k = 0; k < dim; ++k) v(k) = normal(rng);
  const double nu = u.norm();
  if (nu < 1e-12) throw Error(Errc::degenerate_plane, "zero first direction; choose another seed");
  u /= nu;
  v -= v.dot(u) * u;
  const double nv = v.norm();
  if (nv < 1e-12) throw Error(Errc::degenerate_plane, "directions are parallel; choose another seed");
  v /= nv;
  return {u, v};
}

ScanGrid random_plane_scan(const Objective& objective, const QaoaParams& center, std::uint64_t seed, Range a,
                           Range b, int resolution, int jobs) {
  center.validate();
  const Eigen::VectorXd origin = center.flat();
  auto [theta1, theta2] = random_directions(static_cast<int>(origin.size()), seed);
  ScanGrid grid = plane_scan(objective, origin, theta1, theta2, a, b, resolution, jobs);
  grid.metadata["direction_seed"] = std::to_string(seed);
  return grid;
}

void write_scan_csv(const ScanGrid& grid, std::ostream& out) {
  for (const auto& [key, value] : grid.metadata) out << "# " << key << '=' << value << '\n';
  out << "# center=" << join(grid.center) << '\n';
  out << "# theta1=" << join(grid.theta1) << '\n';
  out << "# theta2=" << join(grid.theta2) << '\n';
  out << "# row_axis=" << axis_text(grid.rows) << '\n';
  out << "# col_axis=" << axis_text(grid.cols) << '\n';
  const auto old_precision = out.precision(17);
  out << grid.rows.name << '\\' << grid.cols.name;
  for (int j = 0; j < grid.cols.resolution; ++j) out << ',' << grid.cols.value(j);
  out << '\n';
  for (int i = 0; i < grid.rows.resolution; ++i) {
    out << grid.rows.value(i);
    for (int j = 0; j < grid.cols.resolution; ++j) out << ',' << grid.values(i, j);
    out << '\n';
  }
  out.precision(old_precision);
}

ScanGrid read_scan_csv(std::istream& in) {
  ScanGrid grid;
  std::string line;
  bool header_seen = false;
  int row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw Error(Errc::io, "malformed metadata line '" + line + "'");
      const std::string key = line.substr(2, eq - 2);
      const std::string value = line.substr(eq + 1);
      if (key == "center") grid.center = split(value);
      else if (key == "theta1") grid.theta1 = split(value);
      else if (key == "theta2") grid.theta2 = split(value);
      else if (key == "row_axis") grid.rows = parse_axis(value);
      else if (key == "col_axis") grid.cols = parse_axis(value);
      else grid.metadata[key] = value;
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      grid.values.resize(grid.rows.resolution, grid.cols.resolution);
      continue;
    }
    if (row >= grid.rows.resolution) throw Error(Errc::io, "more data rows than the row axis declares");
    std::istringstream s(line);
    std::string cell;
    std::getline(s, cell, ',');
    for (int j = 0; j < grid.cols.resolution; ++j) {
      if (!std::getline(s, cell, ',')) throw Error(Errc::io, "short data row");
      grid.values(row, j) = std::stod(cell);
    }
    ++row;
  }
  if (row != grid.rows.resolution) throw Error(Errc::io, "missing data rows");
  return grid;
}

}  // namespace qaoalab
