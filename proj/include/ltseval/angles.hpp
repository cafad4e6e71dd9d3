#pragma once

#include <Eigen/Geometry>
#include <cmath>

namespace ltseval {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// Wraps an angle to [0, 360).
inline double wrap_deg_360(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w < 0.0) w += 360.0;
  if (w >= 360.0) w = 0.0;  // fmod can land exactly on 360 after the add
  return w;
}

// Wraps an angle difference to (-180, 180].
inline double wrap_deg_180(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w > 180.0) w -= 360.0;
  if (w <= -180.0) w += 360.0;
  return w;
}

// Shortest signed arc from `from` to `to`, in (-180, 180].
inline double shortest_arc_deg(double from, double to) { return wrap_deg_180(to - from); }

// Yaw (rotation about +z) of a unit quaternion, in [0, 360).
// ZYX convention; for heading-only data the quaternion is a pure z rotation.
inline double quat_yaw_deg(const Eigen::Quaterniond& q) {
  const double siny = 2.0 * (q.w() * q.z() + q.x() * q.y());
  const double cosy = 1.0 - 2.0 * (q.y() * q.y() + q.z() * q.z());
  return wrap_deg_360(rad_to_deg(std::atan2(siny, cosy)));
}

inline Eigen::Quaterniond yaw_to_quat(double yaw_deg) {
  return Eigen::Quaterniond(Eigen::AngleAxisd(deg_to_rad(yaw_deg), Eigen::Vector3d::UnitZ()));
}

}  // namespace ltseval
