#pragma once

#include <Eigen/Geometry>
#include <cmath>
#include <optional>

#include "ltseval/angles.hpp"
#include "ltseval/errors.hpp"
#include "ltseval/time.hpp"

namespace ltseval {

// One timestamped pose sample with up to six degrees of freedom.
// Positions are millimetres, headings degrees in [0, 360). The vertical
// component, the heading, and the full 3-D orientation are each optional
// because many systems under test do not produce them.
struct Pose {
  Timestamp t{};
  double x_mm = 0.0;
  double y_mm = 0.0;
  std::optional<double> z_mm;
  std::optional<double> yaw_deg;
  std::optional<Eigen::Quaterniond> orientation;

  // Position as a 3-vector; a missing vertical component reads as 0.
  Eigen::Vector3d position() const { return {x_mm, y_mm, z_mm.value_or(0.0)}; }
};

inline constexpr double kQuatNormTolerance = 1e-9;
inline constexpr double kYawConsistencyToleranceDeg = 1e-6;

// Checks the per-sample invariants; throws ParameterError naming the first
// violation. `label` prefixes the message (e.g. "gt sample 17").
inline void validate_pose(const Pose& p, const std::string& label) {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(p.x_mm) || !finite(p.y_mm)) throw ParameterError(label + ": non-finite position");
  if (p.z_mm && !finite(*p.z_mm)) throw ParameterError(label + ": non-finite z");
  if (p.yaw_deg) {
    if (!finite(*p.yaw_deg)) throw ParameterError(label + ": non-finite yaw");
    if (*p.yaw_deg < 0.0 || *p.yaw_deg >= 360.0)
      throw ParameterError(label + ": yaw outside [0, 360)");
  }
  if (p.orientation) {
    const Eigen::Quaterniond& q = *p.orientation;
    if (!finite(q.w()) || !finite(q.x()) || !finite(q.y()) || !finite(q.z()))
      throw ParameterError(label + ": non-finite quaternion");
    if (std::abs(q.norm() - 1.0) > kQuatNormTolerance)
      throw ParameterError(label + ": quaternion not unit norm");
    if (p.yaw_deg &&
        std::abs(shortest_arc_deg(*p.yaw_deg, quat_yaw_deg(q))) > kYawConsistencyToleranceDeg)
      throw ParameterError(label + ": heading disagrees with quaternion yaw");
  }
}

}  // namespace ltseval
