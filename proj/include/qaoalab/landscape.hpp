#pragma once

// Cost-landscape scans: (beta, gamma) grids for one layer and random-plane
// sections center + a * theta1 + b * theta2 for any depth.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>

#include <Eigen/Dense>

#include "qaoalab/optimizers.hpp"

namespace qaoalab {

struct Axis {
  std::string name;
  double lower = 0.0;
  double upper = 1.0;
  int resolution = 2;

  /// Inclusive endpoints; the last node is exactly `upper`.
  double value(int i) const {
    if (i == resolution - 1) return upper;
    return lower + i * ((upper - lower) / (resolution - 1));
  }
};

struct ScanGrid {
  Axis rows;  // beta for grid scans, a for plane scans
  Axis cols;  // gamma for grid scans, b for plane scans
  Eigen::MatrixXd values;
  Eigen::VectorXd center;
  Eigen::VectorXd theta1;
  Eigen::VectorXd theta2;
  std::map<std::string, std::string> metadata;

  /// The parameter point evaluated for values(i, j).
  Eigen::VectorXd point(int i, int j) const { return center + rows.value(i) * theta1 + cols.value(j) * theta2; }
};

struct Range {
  double lower = 0.0;
  double upper = 1.0;
};

/// Objective evaluated on the Cartesian grid, rows indexed by beta. Requires a
/// single layer. With jobs > 1 rows are evaluated concurrently, so the
/// objective must then be safe to call from several threads.
ScanGrid grid_scan(const Objective& objective, int layers, Range beta, Range gamma, int resolution, int jobs = 1);

/// Plane through `center` spanned by the given directions.
ScanGrid plane_scan(const Objective& objective, const Eigen::VectorXd& center, const Eigen::VectorXd& theta1,
                    const Eigen::VectorXd& theta2, Range a, Range b, int resolution, int jobs = 1);

/// Plane spanned by two seeded random orthonormal directions.
ScanGrid random_plane_scan(const Objective& objective, const QaoaParams& center, std::uint64_t seed, Range a,
                           Range b, int resolution, int jobs = 1);

/// Seeded orthonormal pair in `dim` dimensions.
std::pair<Eigen::VectorXd, Eigen::VectorXd> random_directions(int dim, std::uint64_t seed);

/// '#'-prefixed key=value metadata lines, then the column axis row and one
/// line per row axis value. Numbers are written with 17 significant digits.
void write_scan_csv(const ScanGrid& grid, std::ostream& out);
ScanGrid read_scan_csv(std::istream& in);

}  // namespace qaoalab
