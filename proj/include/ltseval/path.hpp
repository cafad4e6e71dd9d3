#pragma once

#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <vector>

#include "ltseval/angles.hpp"
#include "ltseval/errors.hpp"

namespace ltseval {

// 2-D polyline with arc-length indexing (millimetres).
class Polyline {
 public:
  explicit Polyline(std::vector<Eigen::Vector2d> points) : points_(std::move(points)) {
    cum_.resize(points_.size(), 0.0);
    for (std::size_t i = 1; i < points_.size(); ++i)
      cum_[i] = cum_[i - 1] + (points_[i] - points_[i - 1]).norm();
  }

  double length() const { return cum_.empty() ? 0.0 : cum_.back(); }
  const std::vector<Eigen::Vector2d>& points() const { return points_; }

  Eigen::Vector2d point_at(double s) const {
    const std::size_t i = segment_at(s);
    const double seg_len = cum_[i + 1] - cum_[i];
    const double u = seg_len > 0.0 ? (s - cum_[i]) / seg_len : 0.0;
    return points_[i] + u * (points_[i + 1] - points_[i]);
  }

  // Travel direction at arc length s, degrees in [0, 360). Zero-length
  // segments inherit the direction of the nearest non-degenerate one.
  double heading_at(double s) const {
    std::size_t i = segment_at(s);
    while (cum_[i + 1] - cum_[i] <= 0.0 && i + 2 < points_.size()) ++i;
    while (cum_[i + 1] - cum_[i] <= 0.0 && i > 0) --i;
    const Eigen::Vector2d d = points_[i + 1] - points_[i];
    return wrap_deg_360(rad_to_deg(std::atan2(d.y(), d.x())));
  }

  // Arc lengths of every local closest approach to `target` that comes
  // within `tolerance_mm`: one entry per maximal in-tolerance interval of
  // the polyline. The interval bookkeeping is exact (quadratic sublevel sets
  // per segment), so an out-and-back path that leaves the tolerance disc and
  // re-enters it yields two approaches even when both passes share polyline
  // vertices. Used to place stops on multi-lap paths.
  std::vector<double> approaches(const Eigen::Vector2d& target, double tolerance_mm) const {
    std::vector<double> result;
    bool open = false;
    double best_d2 = 0.0, best_s = 0.0;
    auto close = [&] {
      if (open) result.push_back(best_s);
      open = false;
    };
    const double tol2 = tolerance_mm * tolerance_mm;
    for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
      const Eigen::Vector2d d = points_[i + 1] - points_[i];
      const Eigen::Vector2d r0 = points_[i] - target;
      const double a = d.squaredNorm();
      double u0 = 0.0, u1 = 1.0;
      if (a == 0.0) {
        if (r0.squaredNorm() > tol2) {
          close();
          continue;
        }
      } else {
        const double b = 2.0 * r0.dot(d);
        const double disc = b * b - 4.0 * a * (r0.squaredNorm() - tol2);
        if (disc < 0.0) {
          close();
          continue;
        }
        const double sq = std::sqrt(disc);
        u0 = std::max((-b - sq) / (2.0 * a), 0.0);
        u1 = std::min((-b + sq) / (2.0 * a), 1.0);
        if (u0 > u1) {
          close();
          continue;
        }
      }
      if (!(open && u0 == 0.0)) {
        close();
        open = true;
        best_d2 = std::numeric_limits<double>::infinity();
      }
      double us[3] = {u0, u1, u0};
      if (a > 0.0) us[2] = std::clamp(-r0.dot(d) / a, u0, u1);
      for (double u : us) {
        const double d2 = (r0 + u * d).squaredNorm();
        if (d2 < best_d2) {
          best_d2 = d2;
          best_s = cum_[i] + u * std::sqrt(a);
        }
      }
      if (u1 < 1.0) close();
    }
    close();
    return result;
  }

 private:
  std::size_t segment_at(double s) const {
    if (points_.size() < 2) throw ParameterError("Polyline: needs >= 2 points");
    std::size_t lo = 0, hi = points_.size() - 1;
    while (lo + 1 < hi) {
      const std::size_t mid = (lo + hi) / 2;
      (cum_[mid] <= s ? lo : hi) = mid;
    }
    return lo;
  }

  std::vector<Eigen::Vector2d> points_;
  std::vector<double> cum_;
};

}  // namespace ltseval
