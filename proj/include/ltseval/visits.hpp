#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <optional>
#include <vector>

#include "ltseval/errors.hpp"
#include "ltseval/interpolation.hpp"
#include "ltseval/trajectory.hpp"

namespace ltseval {

// A target pose with acceptance tolerances. The ground truth "visits" the
// pose whenever it dwells inside these tolerances.
struct EvaluationPose {
  int id = 0;
  Pose target;  // timestamp ignored
  double position_tolerance_mm = 100.0;
  std::optional<double> heading_tolerance_deg;
  bool required_static = false;
  std::optional<double> static_speed_threshold_mm_s;
};

// One tolerance-satisfying pass of the ground truth through an evaluation
// pose, pinned to the instant of closest approach.
struct Visit {
  int eval_pose_id = 0;
  int visit_index = 0;
  Timestamp gt_time{};
  Pose gt_pose_at_visit;
  double gt_speed_mm_s = 0.0;
};

struct MatchedSample {
  Visit visit;
  Pose lts_pose;
  double time_gap_s = 0.0;
};

struct MissedVisit {
  int eval_pose_id = 0;
  int visit_index = 0;
};

struct MatchResult {
  std::vector<MatchedSample> matched;
  std::vector<MissedVisit> missed;
};

namespace detail {

// Piece of a tolerance-satisfying interval restricted to one GT segment,
// parameterised by u in [u_lo, u_hi] along that segment.
struct IntervalPiece {
  std::size_t segment = 0;
  double u_lo = 0.0, u_hi = 1.0;
  std::int64_t t_lo_ns = 0, t_hi_ns = 0;
};

struct URange {
  double lo, hi;
};

// u-range where the linear unwrapped heading error e0 + u*d stays within
// [lo, hi], clipped to [0, 1]. Empty ranges come back without a value.
inline std::optional<URange> linear_band(double e0, double d, double lo, double hi) {
  if (d == 0.0) {
    if (e0 >= lo && e0 <= hi) return URange{0.0, 1.0};
    return std::nullopt;
  }
  double a = (lo - e0) / d;
  double b = (hi - e0) / d;
  if (a > b) std::swap(a, b);
  a = std::max(a, 0.0);
  b = std::min(b, 1.0);
  if (a > b) return std::nullopt;
  return URange{a, b};
}

inline std::int64_t piece_time_ns(const Trajectory& gt, std::size_t seg, double u) {
  const std::int64_t ta = gt.samples[seg].t.ns;
  const std::int64_t tb = gt.samples[seg + 1].t.ns;
  if (u <= 0.0) return ta;
  if (u >= 1.0) return tb;
  return ta + static_cast<std::int64_t>(std::llround(u * static_cast<double>(tb - ta)));
}

}  // namespace detail

// For one evaluation pose, every maximal time interval during which the
// interpolated GT satisfies the position tolerance (and heading tolerance,
// when one is set and the GT carries headings) yields at most one Visit at
// the instant of minimum position distance. If the pose requires a static
// measurement, only instants whose GT speed is at or below the pose's
// threshold are eligible; an interval with no such instant yields no Visit.
//
// The admissible set is computed exactly: the squared distance to the target
// is quadratic in the interpolation parameter of each GT segment and the
// heading error is linear in it, so entry/exit points are polynomial roots
// rather than scan hits. Visits are returned sorted by time, with
// visit_index counting per pose in time order.
inline std::vector<Visit> find_visits(const Trajectory& gt,
                                      const std::vector<EvaluationPose>& eval_poses) {
  if (eval_poses.empty()) throw ParameterError("find_visits: no evaluation poses");
  if (gt.size() < 2) throw ParameterError("find_visits: GT trajectory needs >= 2 samples");

  std::vector<Visit> visits;
  for (const EvaluationPose& ep : eval_poses) {
    const bool use_z = ep.target.z_mm.has_value() && gt.capabilities.has_vertical;
    const bool heading_gate = ep.heading_tolerance_deg.has_value() &&
                              ep.target.yaw_deg.has_value() && gt.capabilities.has_heading;
    const double tol2 = ep.position_tolerance_mm * ep.position_tolerance_mm;
    const Eigen::Vector3d target(ep.target.x_mm, ep.target.y_mm,
                                 use_z ? *ep.target.z_mm : 0.0);

    // Gather admissible pieces segment by segment, merging pieces that touch
    // at segment nodes into maximal intervals.
    std::vector<std::vector<detail::IntervalPiece>> intervals;
    for (std::size_t seg = 0; seg + 1 < gt.size(); ++seg) {
      const Pose& pa = gt.samples[seg];
      const Pose& pb = gt.samples[seg + 1];
      Eigen::Vector3d p0(pa.x_mm, pa.y_mm, use_z ? *pa.z_mm : 0.0);
      Eigen::Vector3d p1(pb.x_mm, pb.y_mm, use_z ? *pb.z_mm : 0.0);
      const Eigen::Vector3d d = p1 - p0;
      const Eigen::Vector3d r0 = p0 - target;

      const double a = d.squaredNorm();
      const double e = r0.squaredNorm();
      // Quick reject: the segment cannot reach the tolerance sphere.
      const double reach = ep.position_tolerance_mm + d.norm();
      if (e > reach * reach) continue;

      detail::URange pos_range{0.0, 1.0};
      if (a == 0.0) {
        if (e > tol2) continue;
      } else {
        const double b = 2.0 * r0.dot(d);
        const double c = e - tol2;
        const double disc = b * b - 4.0 * a * c;
        if (disc < 0.0) continue;
        const double sq = std::sqrt(disc);
        pos_range.lo = std::max((-b - sq) / (2.0 * a), 0.0);
        pos_range.hi = std::min((-b + sq) / (2.0 * a), 1.0);
        if (pos_range.lo > pos_range.hi) continue;
      }

      std::vector<detail::URange> admissible;
      if (heading_gate) {
        const double htol = *ep.heading_tolerance_deg;
        const double e0 = wrap_deg_180(*pa.yaw_deg - *ep.target.yaw_deg);
        const double dh = shortest_arc_deg(*pa.yaw_deg, *pb.yaw_deg);
        // The unwrapped error sweeps (-360, 360]; within tolerance means
        // landing in the centre band or in either wrap-around copy.
        for (const auto& band : {detail::linear_band(e0, dh, -htol, htol),
                                 detail::linear_band(e0, dh, 360.0 - htol, 360.0 + htol),
                                 detail::linear_band(e0, dh, -360.0 - htol, -360.0 + htol)}) {
          if (!band) continue;
          const double lo = std::max(band->lo, pos_range.lo);
          const double hi = std::min(band->hi, pos_range.hi);
          if (lo <= hi) admissible.push_back({lo, hi});
        }
        std::sort(admissible.begin(), admissible.end(),
                  [](const detail::URange& x, const detail::URange& y) { return x.lo < y.lo; });
      } else {
        admissible.push_back(pos_range);
      }

      for (const detail::URange& r : admissible) {
        detail::IntervalPiece piece;
        piece.segment = seg;
        piece.u_lo = r.lo;
        piece.u_hi = r.hi;
        piece.t_lo_ns = detail::piece_time_ns(gt, seg, r.lo);
        piece.t_hi_ns = detail::piece_time_ns(gt, seg, r.hi);
        if (!intervals.empty() && piece.t_lo_ns - intervals.back().back().t_hi_ns <= 1)
          intervals.back().push_back(piece);
        else
          intervals.push_back({piece});
      }
    }

    // One visit per interval at the minimum-distance instant. The minimum
    // can be attained over a whole flat stretch (a dwell holds one position
    // for seconds), where rounding makes the piece endpoints differ by a few
    // ulp; candidates within a sub-micrometre band of the minimum therefore
    // count as tied and resolve to their median instant instead of the
    // stretch's edge, which would sit right on the approach ramp.
    constexpr double kTieBandMm2 = 1e-6;
    int visit_index = 0;
    for (const auto& interval : intervals) {
      struct Candidate {
        std::int64_t t_ns;
        double speed;
        double d2;
      };
      std::vector<Candidate> candidates;
      double best_d2 = std::numeric_limits<double>::infinity();
      for (const detail::IntervalPiece& piece : interval) {
        const Pose& pa = gt.samples[piece.segment];
        const Pose& pb = gt.samples[piece.segment + 1];
        Eigen::Vector3d p0(pa.x_mm, pa.y_mm, use_z ? *pa.z_mm : 0.0);
        Eigen::Vector3d p1(pb.x_mm, pb.y_mm, use_z ? *pb.z_mm : 0.0);
        const Eigen::Vector3d d = p1 - p0;
        const Eigen::Vector3d r0 = p0 - target;
        const double dt_s = to_seconds(pb.t - pa.t);
        const double speed = d.norm() / dt_s;
        if (ep.required_static && ep.static_speed_threshold_mm_s &&
            speed > *ep.static_speed_threshold_mm_s)
          continue;

        const double a = d.squaredNorm();
        const double b = 2.0 * r0.dot(d);
        auto dist2_at = [&](double u) { return (r0 + u * d).squaredNorm(); };
        double us[3] = {piece.u_lo, piece.u_hi, piece.u_lo};
        if (a > 0.0) us[2] = std::clamp(-b / (2.0 * a), piece.u_lo, piece.u_hi);
        for (double u : us) {
          const double d2 = dist2_at(u);
          best_d2 = std::min(best_d2, d2);
          candidates.push_back({detail::piece_time_ns(gt, piece.segment, u), speed, d2});
        }
      }
      if (candidates.empty()) continue;  // static gate never satisfied inside the interval

      std::vector<const Candidate*> tied;
      for (const Candidate& c : candidates)
        if (c.d2 <= best_d2 + kTieBandMm2) tied.push_back(&c);
      std::sort(tied.begin(), tied.end(),
                [](const Candidate* a, const Candidate* b) { return a->t_ns < b->t_ns; });
      const Candidate& chosen = *tied[(tied.size() - 1) / 2];

      Visit v;
      v.eval_pose_id = ep.id;
      v.visit_index = visit_index++;
      v.gt_time = Timestamp{chosen.t_ns};
      v.gt_pose_at_visit = interpolate_pose(gt, v.gt_time);
      v.gt_speed_mm_s = chosen.speed;
      visits.push_back(v);
    }
  }

  std::stable_sort(visits.begin(), visits.end(),
                   [](const Visit& a, const Visit& b) { return a.gt_time < b.gt_time; });
  return visits;
}

// Pairs each visit with the LTS sample closest in time to the visit instant.
// Gaps beyond max_match_gap_s count the visit as missed. Samples are not
// consumed: one LTS sample may serve several visits. Equal gaps resolve to
// the earlier sample.
inline MatchResult match_lts(const Trajectory& lts, const std::vector<Visit>& visits,
                             double max_match_gap_s) {
  if (!(max_match_gap_s > 0.0)) throw ParameterError("match_lts: max_match_gap_s must be > 0");
  MatchResult result;
  for (const Visit& v : visits) {
    if (lts.empty()) {
      result.missed.push_back({v.eval_pose_id, v.visit_index});
      continue;
    }
    auto it = std::lower_bound(lts.samples.begin(), lts.samples.end(), v.gt_time,
                               [](const Pose& p, Timestamp t) { return p.t < t; });
    const Pose* best = nullptr;
    std::int64_t best_gap = 0;
    if (it != lts.samples.end()) {
      best = &*it;
      best_gap = std::abs(it->t - v.gt_time);
    }
    if (it != lts.samples.begin()) {
      const Pose& prev = *(it - 1);
      const std::int64_t gap = std::abs(prev.t - v.gt_time);
      if (best == nullptr || gap <= best_gap) {  // earlier sample wins ties
        best = &prev;
        best_gap = gap;
      }
    }
    const double gap_s = to_seconds(best_gap);
    if (gap_s > max_match_gap_s) {
      result.missed.push_back({v.eval_pose_id, v.visit_index});
    } else {
      result.matched.push_back({v, *best, gap_s});
    }
  }
  return result;
}

}  // namespace ltseval
