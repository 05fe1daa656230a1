#pragma once

#include <stdexcept>
#include <string>

namespace qaoalab {

enum class Errc {
  instance_shape,
  infeasible_instance,
  degenerate_instance,
  encoding,
  undefined_scale,
  infeasible_problem,
  internal_consistency,
  capacity,
  dimension_mismatch,
  invalid_argument,
  configuration,
  conditioning,
  metric_undefined,
  degenerate_plane,
  io,
};

const char* to_string(Errc code) noexcept;

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  Errc code() const noexcept { return code_; }
  /// Message without the category prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

inline const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::instance_shape: return "instance-shape error";
    case Errc::infeasible_instance: return "infeasible-instance error";
    case Errc::degenerate_instance: return "degenerate-instance error";
    case Errc::encoding: return "encoding error";
    case Errc::undefined_scale: return "undefined-scale error";
    case Errc::infeasible_problem: return "infeasible-problem error";
    case Errc::internal_consistency: return "internal-consistency error";
    case Errc::capacity: return "capacity error";
    case Errc::dimension_mismatch: return "dimension mismatch";
    case Errc::invalid_argument: return "invalid argument";
    case Errc::configuration: return "configuration error";
    case Errc::conditioning: return "conditioning error";
    case Errc::metric_undefined: return "metric-undefined error";
    case Errc::degenerate_plane: return "degenerate plane";
    case Errc::io: return "io error";
  }
  return "error";
}

}  // namespace qaoalab
