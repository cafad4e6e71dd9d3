#pragma once

#include <Eigen/Geometry>
#include <cstddef>
#include <string>

#include "ltseval/angles.hpp"
#include "ltseval/errors.hpp"
#include "ltseval/trajectory.hpp"

namespace ltseval {

// Pose at time t. Positions interpolate linearly per axis, headings along the
// shortest angular arc, quaternions by slerp. A query landing exactly on a
// sample returns that sample unchanged. Queries outside [first, last] refuse
// to extrapolate.
inline Pose interpolate_pose(const Trajectory& traj, Timestamp t) {
  if (traj.size() < 2) throw ParameterError("interpolate_pose: trajectory needs >= 2 samples");
  if (t < traj.start_time() || t > traj.end_time())
    throw ExtrapolationError("interpolate_pose: t=" + std::to_string(t.ns) +
                             " ns outside sampled range [" + std::to_string(traj.start_time().ns) +
                             ", " + std::to_string(traj.end_time().ns) + "] ns");

  std::size_t i = traj.segment_index(t);
  if (traj.samples[i].t == t) return traj.samples[i];
  if (i + 1 < traj.size() && traj.samples[i + 1].t == t) return traj.samples[i + 1];

  const Pose& a = traj.samples[i];
  const Pose& b = traj.samples[i + 1];
  const double u = static_cast<double>(t - a.t) / static_cast<double>(b.t - a.t);

  Pose out;
  out.t = t;
  out.x_mm = a.x_mm + u * (b.x_mm - a.x_mm);
  out.y_mm = a.y_mm + u * (b.y_mm - a.y_mm);
  if (traj.capabilities.has_vertical) out.z_mm = *a.z_mm + u * (*b.z_mm - *a.z_mm);
  if (traj.capabilities.has_orientation3d)
    out.orientation = a.orientation->slerp(u, *b.orientation).normalized();
  if (traj.capabilities.has_heading) {
    // With a full orientation present the heading must stay its yaw; slerp
    // and independent angular interpolation only agree for pure z rotations.
    out.yaw_deg = out.orientation
                      ? quat_yaw_deg(*out.orientation)
                      : wrap_deg_360(*a.yaw_deg + u * shortest_arc_deg(*a.yaw_deg, *b.yaw_deg));
  }
  return out;
}

struct VelocityEstimate {
  Eigen::Vector3d velocity_mm_s = Eigen::Vector3d::Zero();
  double speed_mm_s = 0.0;
};

// Velocity by central finite difference over the samples enclosing t. A query
// at an interior node differences its two neighbours. `smoothing_window`
// widens the stencil symmetrically by that many samples per side (0 = raw
// difference). Boundary queries have no enclosing pair and are refused.
inline VelocityEstimate estimate_velocity(const Trajectory& traj, Timestamp t,
                                          int smoothing_window = 0) {
  if (traj.size() < 2) throw ParameterError("estimate_velocity: trajectory needs >= 2 samples");
  if (smoothing_window < 0) throw ParameterError("estimate_velocity: negative smoothing window");
  if (t <= traj.start_time() || t >= traj.end_time())
    throw BoundaryError("estimate_velocity: t must lie strictly inside the sampled range");

  std::size_t lo = traj.segment_index(t);
  std::size_t hi = lo + 1;
  if (traj.samples[lo].t == t) {
    hi = lo + 1;
    --lo;  // node query: difference the neighbours
  }
  if (static_cast<std::size_t>(smoothing_window) > lo ||
      hi + static_cast<std::size_t>(smoothing_window) >= traj.size())
    throw BoundaryError("estimate_velocity: smoothing window exceeds the sampled range");
  lo -= static_cast<std::size_t>(smoothing_window);
  hi += static_cast<std::size_t>(smoothing_window);

  const Pose& a = traj.samples[lo];
  const Pose& b = traj.samples[hi];
  const double dt_s = to_seconds(b.t - a.t);
  VelocityEstimate est;
  est.velocity_mm_s = (b.position() - a.position()) / dt_s;
  est.speed_mm_s = est.velocity_mm_s.norm();
  return est;
}

}  // namespace ltseval
