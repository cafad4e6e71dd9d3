#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "ltseval/angles.hpp"
#include "ltseval/errors.hpp"
#include "ltseval/interpolation.hpp"
#include "ltseval/trajectory.hpp"

namespace ltseval {

enum class TransformMode { Planar2D, Spatial3D };

// Proper rigid transform (rotation + translation, no scale, no reflection).
// Planar2D rotates about the vertical axis only and leaves z untouched;
// Spatial3D carries a full unit quaternion.
struct RigidTransform {
  TransformMode mode = TransformMode::Planar2D;
  double yaw_deg = 0.0;                                   // Planar2D rotation
  Eigen::Quaterniond rotation{1.0, 0.0, 0.0, 0.0};        // Spatial3D rotation
  Eigen::Vector3d translation_mm = Eigen::Vector3d::Zero();

  static RigidTransform planar(double yaw_deg, double tx_mm, double ty_mm) {
    RigidTransform xf;
    xf.mode = TransformMode::Planar2D;
    xf.yaw_deg = wrap_deg_360(yaw_deg);
    xf.translation_mm = {tx_mm, ty_mm, 0.0};
    return xf;
  }

  static RigidTransform spatial(const Eigen::Quaterniond& q, const Eigen::Vector3d& t_mm) {
    RigidTransform xf;
    xf.mode = TransformMode::Spatial3D;
    xf.rotation = q.normalized();
    xf.translation_mm = t_mm;
    return xf;
  }

  static RigidTransform identity(TransformMode mode = TransformMode::Planar2D) {
    RigidTransform xf;
    xf.mode = mode;
    return xf;
  }

  // Yaw component of the rotation, for composing with heading-only poses.
  double rotation_yaw_deg() const {
    return mode == TransformMode::Planar2D ? yaw_deg : quat_yaw_deg(rotation);
  }

  Eigen::Vector3d apply(const Eigen::Vector3d& p_mm) const {
    if (mode == TransformMode::Planar2D) {
      const double c = std::cos(deg_to_rad(yaw_deg));
      const double s = std::sin(deg_to_rad(yaw_deg));
      return {c * p_mm.x() - s * p_mm.y() + translation_mm.x(),
              s * p_mm.x() + c * p_mm.y() + translation_mm.y(), p_mm.z() + translation_mm.z()};
    }
    return rotation * p_mm + translation_mm;
  }

  RigidTransform inverse() const {
    RigidTransform inv;
    inv.mode = mode;
    if (mode == TransformMode::Planar2D) {
      inv.yaw_deg = wrap_deg_360(-yaw_deg);
      const double c = std::cos(deg_to_rad(-yaw_deg));
      const double s = std::sin(deg_to_rad(-yaw_deg));
      inv.translation_mm = {-(c * translation_mm.x() - s * translation_mm.y()),
                            -(s * translation_mm.x() + c * translation_mm.y()),
                            -translation_mm.z()};
    } else {
      inv.rotation = rotation.conjugate();
      inv.translation_mm = -(inv.rotation * translation_mm);
    }
    return inv;
  }
};

struct AlignmentReport {
  RigidTransform transform;
  double rms_residual_mm = 0.0;
  std::size_t n_pairs = 0;
  std::vector<double> per_pair_residuals_mm;
};

// (lts, gt) position pair in millimetres.
struct PointPair {
  Eigen::Vector3d lts_mm;
  Eigen::Vector3d gt_mm;
};

// Least-squares rigid alignment mapping LTS positions onto GT positions:
// minimizes sum_i ||R * lts_i + t - gt_i||^2 over proper rotations R and
// translations t. Planar2D solves the closed 2-D form on the horizontal
// components; Spatial3D uses the SVD of the cross-covariance with the
// determinant sign corrected, so reflections can never be returned.
inline AlignmentReport align_rigid(const std::vector<PointPair>& pairs, TransformMode mode) {
  const std::size_t n = pairs.size();
  if (mode == TransformMode::Planar2D && n < 2)
    throw ParameterError("align_rigid: Planar2D needs >= 2 pairs");
  if (mode == TransformMode::Spatial3D && n < 3)
    throw ParameterError("align_rigid: Spatial3D needs >= 3 pairs");

  Eigen::Vector3d lts_centroid = Eigen::Vector3d::Zero();
  Eigen::Vector3d gt_centroid = Eigen::Vector3d::Zero();
  for (const PointPair& pr : pairs) {
    lts_centroid += pr.lts_mm;
    gt_centroid += pr.gt_mm;
  }
  lts_centroid /= static_cast<double>(n);
  gt_centroid /= static_cast<double>(n);

  AlignmentReport report;
  if (mode == TransformMode::Planar2D) {
    double dot = 0.0, cross = 0.0, spread = 0.0;
    for (const PointPair& pr : pairs) {
      const double ax = pr.lts_mm.x() - lts_centroid.x();
      const double ay = pr.lts_mm.y() - lts_centroid.y();
      const double bx = pr.gt_mm.x() - gt_centroid.x();
      const double by = pr.gt_mm.y() - gt_centroid.y();
      dot += ax * bx + ay * by;
      cross += ax * by - ay * bx;
      spread += ax * ax + ay * ay + bx * bx + by * by;
    }
    if (spread <= 1e-12)
      throw DegenerateGeometryError(
          "align_rigid: all points coincident, rotation indeterminate (rank 0)");
    if (std::abs(dot) <= 1e-12 * spread && std::abs(cross) <= 1e-12 * spread)
      throw DegenerateGeometryError(
          "align_rigid: cross-covariance vanishes, rotation indeterminate");
    const double yaw = rad_to_deg(std::atan2(cross, dot));
    RigidTransform xf = RigidTransform::planar(yaw, 0.0, 0.0);
    const Eigen::Vector3d rc = xf.apply(lts_centroid);
    xf.translation_mm = {gt_centroid.x() - rc.x(), gt_centroid.y() - rc.y(), 0.0};
    report.transform = xf;
  } else {
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    double spread = 0.0;
    for (const PointPair& pr : pairs) {
      const Eigen::Vector3d a = pr.lts_mm - lts_centroid;
      const Eigen::Vector3d b = pr.gt_mm - gt_centroid;
      cov += a * b.transpose();
      spread += a.squaredNorm();
    }
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Vector3d sv = svd.singularValues();
    if (spread <= 1e-12)
      throw DegenerateGeometryError(
          "align_rigid: all points coincident, rotation indeterminate (rank 0)");
    if (sv(1) <= 1e-9 * std::max(sv(0), 1.0))
      throw DegenerateGeometryError(
          "align_rigid: points collinear, rotation about the line indeterminate (rank < 2)");
    Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
    d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
    const Eigen::Matrix3d r = svd.matrixV() * d * svd.matrixU().transpose();
    RigidTransform xf =
        RigidTransform::spatial(Eigen::Quaterniond(r), gt_centroid - r * lts_centroid);
    report.transform = xf;
  }

  report.n_pairs = n;
  report.per_pair_residuals_mm.reserve(n);
  double sum_sq = 0.0;
  for (const PointPair& pr : pairs) {
    Eigen::Vector3d diff = report.transform.apply(pr.lts_mm) - pr.gt_mm;
    if (mode == TransformMode::Planar2D) diff.z() = 0.0;
    const double res = diff.norm();
    report.per_pair_residuals_mm.push_back(res);
    sum_sq += res * res;
  }
  report.rms_residual_mm = std::sqrt(sum_sq / static_cast<double>(n));
  return report;
}

// Maps every sample of a trajectory through the transform. Positions are
// rotated and translated; headings and quaternions are composed with the
// rotation; timestamps are untouched.
inline Trajectory apply_transform(const Trajectory& traj, const RigidTransform& xf) {
  Trajectory out = traj;
  for (Pose& p : out.samples) {
    const Eigen::Vector3d q = xf.apply(p.position());
    p.x_mm = q.x();
    p.y_mm = q.y();
    if (p.z_mm) p.z_mm = q.z();
    if (p.orientation) {
      const Eigen::Quaterniond rot =
          xf.mode == TransformMode::Planar2D ? yaw_to_quat(xf.yaw_deg) : xf.rotation;
      p.orientation = (rot * *p.orientation).normalized();
      if (p.yaw_deg) p.yaw_deg = quat_yaw_deg(*p.orientation);
    } else if (p.yaw_deg) {
      p.yaw_deg = wrap_deg_360(*p.yaw_deg + xf.rotation_yaw_deg());
    }
  }
  return out;
}

struct TimeOffsetOptions {
  double grid_step_s = 0.001;
  double dynamic_speed_threshold_mm_s = 100.0;
  double min_dynamic_fraction = 0.2;       // of total duration above the speed threshold
  double flatness_floor_mm = 1.0;          // objective range below this is unobservable
  std::size_t max_eval_samples = 4000;     // LTS samples used per grid point
};

struct TimeOffsetEstimate {
  double offset_s = 0.0;  // positive: LTS timestamps lag GT
  std::vector<std::pair<double, double>> residual_curve;  // (offset_s, mean_error_mm)
};

namespace detail {

// Horizontal GT position at time t, walking a cursor forward; times must be
// queried in non-decreasing order per sweep.
class HorizontalInterpolator {
 public:
  explicit HorizontalInterpolator(const Trajectory& traj) : traj_(traj) {}

  Eigen::Vector2d at(std::int64_t t_ns) {
    const auto& s = traj_.samples;
    while (idx_ + 2 < s.size() && s[idx_ + 1].t.ns <= t_ns) ++idx_;
    const Pose& a = s[idx_];
    const Pose& b = s[idx_ + 1];
    const double u = static_cast<double>(t_ns - a.t.ns) / static_cast<double>(b.t.ns - a.t.ns);
    return {a.x_mm + u * (b.x_mm - a.x_mm), a.y_mm + u * (b.y_mm - a.y_mm)};
  }

  void rewind() { idx_ = 0; }

 private:
  const Trajectory& traj_;
  std::size_t idx_ = 0;
};

inline double dynamic_time_fraction(const Trajectory& traj, double speed_threshold_mm_s) {
  double moving_ns = 0.0;
  for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
    const Pose& a = traj.samples[i];
    const Pose& b = traj.samples[i + 1];
    const double dt_s = to_seconds(b.t - a.t);
    const double speed = std::hypot(b.x_mm - a.x_mm, b.y_mm - a.y_mm) / dt_s;
    if (speed > speed_threshold_mm_s) moving_ns += static_cast<double>(b.t - a.t);
  }
  return moving_ns / static_cast<double>(traj.end_time() - traj.start_time());
}

}  // namespace detail

// Clock offset between the streams: the shift that minimizes the mean
// horizontal distance between the GT evaluated at (t - offset) and the LTS
// sample stamped t, over a 1 ms grid (configurable) with parabolic
// refinement about the grid minimum. Positive offset means the LTS
// timestamps lag the GT. The offset is unobservable on near-static data:
// both a low moving-time fraction and a flat objective raise
// UnobservableOffsetError.
inline TimeOffsetEstimate estimate_time_offset(const Trajectory& gt, const Trajectory& lts,
                                               double search_window_s,
                                               const TimeOffsetOptions& opts = {}) {
  if (!(search_window_s > 0.0))
    throw ParameterError("estimate_time_offset: search_window_s must be > 0");
  if (gt.size() < 2 || lts.size() < 2)
    throw ParameterError("estimate_time_offset: both trajectories need >= 2 samples");

  if (detail::dynamic_time_fraction(gt, opts.dynamic_speed_threshold_mm_s) <
      opts.min_dynamic_fraction)
    throw UnobservableOffsetError(
        "estimate_time_offset: GT is near-static, the offset objective is unconstrained");

  // Restrict to LTS samples whose shifted time stays inside the GT range for
  // every candidate offset, so each grid point averages the same sample set.
  const std::int64_t window_ns = to_nanoseconds(search_window_s);
  const std::int64_t lo = gt.start_time().ns + window_ns;
  const std::int64_t hi = gt.end_time().ns - window_ns;
  std::vector<const Pose*> eval;
  for (const Pose& p : lts.samples)
    if (p.t.ns >= lo && p.t.ns <= hi) eval.push_back(&p);
  if (eval.size() < 10)
    throw InsufficientDataError(
        "estimate_time_offset: too little overlap between the streams for the search window");
  if (eval.size() > opts.max_eval_samples) {
    std::vector<const Pose*> strided;
    const double step = static_cast<double>(eval.size()) / static_cast<double>(opts.max_eval_samples);
    for (std::size_t k = 0; k < opts.max_eval_samples; ++k)
      strided.push_back(eval[static_cast<std::size_t>(k * step)]);
    eval = std::move(strided);
  }

  const std::int64_t step_ns = std::max<std::int64_t>(1, to_nanoseconds(opts.grid_step_s));
  const std::size_t n_grid = static_cast<std::size_t>(2 * window_ns / step_ns) + 1;
  TimeOffsetEstimate est;
  est.residual_curve.reserve(n_grid);
  detail::HorizontalInterpolator interp(gt);
  std::size_t best = 0;
  for (std::size_t k = 0; k < n_grid; ++k) {
    const std::int64_t offset_ns = -window_ns + static_cast<std::int64_t>(k) * step_ns;
    interp.rewind();
    double sum = 0.0;
    for (const Pose* p : eval) {
      const Eigen::Vector2d g = interp.at(p->t.ns - offset_ns);
      sum += std::hypot(g.x() - p->x_mm, g.y() - p->y_mm);
    }
    const double mean_err = sum / static_cast<double>(eval.size());
    est.residual_curve.emplace_back(to_seconds(offset_ns), mean_err);
    if (mean_err < est.residual_curve[best].second) best = k;
  }

  double curve_min = est.residual_curve[0].second, curve_max = curve_min;
  for (const auto& [o, e] : est.residual_curve) {
    curve_min = std::min(curve_min, e);
    curve_max = std::max(curve_max, e);
  }
  if (curve_max - curve_min < opts.flatness_floor_mm)
    throw UnobservableOffsetError("estimate_time_offset: objective range " +
                                  std::to_string(curve_max - curve_min) +
                                  " mm is below the observability floor");

  est.offset_s = est.residual_curve[best].first;
  if (best > 0 && best + 1 < n_grid) {
    const double e0 = est.residual_curve[best - 1].second;
    const double e1 = est.residual_curve[best].second;
    const double e2 = est.residual_curve[best + 1].second;
    const double denom = e0 - 2.0 * e1 + e2;
    if (denom > 0.0) {
      const double shift = 0.5 * (e0 - e2) / denom;  // in grid steps, within (-1, 1)
      est.offset_s += std::clamp(shift, -1.0, 1.0) * to_seconds(step_ns);
    }
  }
  return est;
}

// Shifts every timestamp by delta_ns. Used to undo an estimated clock offset
// before latency estimation.
inline Trajectory shift_timestamps(const Trajectory& traj, std::int64_t delta_ns) {
  Trajectory out = traj;
  for (Pose& p : out.samples) p.t.ns += delta_ns;
  return out;
}

}  // namespace ltseval
