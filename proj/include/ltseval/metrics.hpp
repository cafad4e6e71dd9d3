#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ltseval/alignment.hpp"
#include "ltseval/errors.hpp"
#include "ltseval/interpolation.hpp"
#include "ltseval/scenario.hpp"
#include "ltseval/testbed.hpp"
#include "ltseval/trajectory.hpp"
#include "ltseval/visits.hpp"

namespace ltseval {

// Per-matched-sample error record. Signed errors follow the LTS - GT
// convention throughout; the horizontal error is the Euclidean norm of the
// signed x/y components. Orientation errors are wrapped to (-180, 180]
// (signed) and [0, 180] (absolute).
struct ErrorSample {
  Timestamp t{};  // visit instant
  int eval_pose_id = 0;
  int visit_index = 0;
  double signed_error_x_mm = 0.0;
  double signed_error_y_mm = 0.0;
  std::optional<double> signed_error_z_mm;
  double horizontal_error_mm = 0.0;
  std::optional<double> vertical_error_mm;
  std::optional<double> signed_orientation_error_deg;
  std::optional<double> abs_orientation_error_deg;
  double gt_speed_mm_s = 0.0;
  std::optional<double> gt_yaw_deg;
  // Matched LTS position, kept for the repeatability spread.
  double lts_x_mm = 0.0;
  double lts_y_mm = 0.0;
  std::optional<double> lts_z_mm;
};

using ErrorSamples = std::vector<ErrorSample>;

inline ErrorSamples compute_pose_errors(const std::vector<MatchedSample>& matched) {
  if (matched.empty()) throw ParameterError("compute_pose_errors: no matched samples");
  ErrorSamples out;
  out.reserve(matched.size());
  for (const MatchedSample& m : matched) {
    const Pose& gt = m.visit.gt_pose_at_visit;
    const Pose& lts = m.lts_pose;
    ErrorSample e;
    e.t = m.visit.gt_time;
    e.eval_pose_id = m.visit.eval_pose_id;
    e.visit_index = m.visit.visit_index;
    e.signed_error_x_mm = lts.x_mm - gt.x_mm;
    e.signed_error_y_mm = lts.y_mm - gt.y_mm;
    e.horizontal_error_mm = std::hypot(e.signed_error_x_mm, e.signed_error_y_mm);
    if (gt.z_mm && lts.z_mm) {
      e.signed_error_z_mm = *lts.z_mm - *gt.z_mm;
      e.vertical_error_mm = std::abs(*e.signed_error_z_mm);
    }
    if (gt.yaw_deg && lts.yaw_deg) {
      e.signed_orientation_error_deg = shortest_arc_deg(*gt.yaw_deg, *lts.yaw_deg);
      e.abs_orientation_error_deg = std::abs(*e.signed_orientation_error_deg);
    }
    e.gt_speed_mm_s = m.visit.gt_speed_mm_s;
    e.gt_yaw_deg = gt.yaw_deg;
    e.lts_x_mm = lts.x_mm;
    e.lts_y_mm = lts.y_mm;
    e.lts_z_mm = lts.z_mm;
    out.push_back(e);
  }
  return out;
}

// Nearest-rank empirical quantile: the ceil(q*n)-th order statistic. Returns
// nothing when n < 1/(1-q) -- a quantile that no sample actually witnesses
// (a Q99.99 needs at least 10^4 samples) must not be extrapolated.
inline std::optional<double> quantile(std::vector<double> samples, double q) {
  if (!(q > 0.0 && q < 1.0)) throw ParameterError("quantile: q must lie in (0, 1)");
  if (samples.empty()) throw ParameterError("quantile: no samples");
  const double n = static_cast<double>(samples.size());
  if (n * (1.0 - q) < 1.0 - 1e-9) return std::nullopt;
  const std::size_t rank = static_cast<std::size_t>(std::ceil(q * n - 1e-9));
  const std::size_t idx = std::max<std::size_t>(rank, 1) - 1;
  std::nth_element(samples.begin(), samples.begin() + idx, samples.end());
  return samples[idx];
}

struct BasicStats {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation (n-1)
  std::size_t count = 0;
};

inline BasicStats basic_stats(const std::vector<double>& xs) {
  BasicStats st;
  st.count = xs.size();
  if (xs.empty()) return st;
  double sum = 0.0;
  for (double x : xs) sum += x;
  st.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - st.mean) * (x - st.mean);
    st.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return st;
}

struct DistributionStats {
  BasicStats stats;
  // Requested quantile -> value, or nullopt when the sample count cannot
  // witness that quantile.
  std::map<double, std::optional<double>> quantiles;
};

inline DistributionStats distribution_stats(const std::vector<double>& xs,
                                            const std::vector<double>& requested_quantiles) {
  DistributionStats d;
  d.stats = basic_stats(xs);
  for (double q : requested_quantiles) d.quantiles[q] = quantile(xs, q);
  return d;
}

struct LatencyEstimate {
  double latency_ms = 0.0;  // positive: LTS lags the GT
  std::size_t sample_count = 0;
};

// System latency from the full streams: for every LTS sample taken while the
// GT moves faster than the threshold, project the position offset onto the
// GT motion direction and divide by the speed. The mean of those per-sample
// delays is the latency. Returns nothing when no sample qualifies.
inline std::optional<LatencyEstimate> estimate_latency(const Trajectory& gt,
                                                       const Trajectory& lts,
                                                       double speed_threshold_mm_s) {
  if (gt.size() < 3 || lts.empty())
    throw ParameterError("estimate_latency: need >= 3 GT samples and a non-empty LTS stream");
  const bool use_z = gt.capabilities.has_vertical && lts.capabilities.has_vertical;
  double sum_s = 0.0;
  std::size_t n = 0;
  for (const Pose& p : lts.samples) {
    if (p.t <= gt.start_time() || p.t >= gt.end_time()) continue;
    const VelocityEstimate vel = estimate_velocity(gt, p.t);
    if (vel.speed_mm_s <= speed_threshold_mm_s) continue;
    const Pose ref = interpolate_pose(gt, p.t);
    Eigen::Vector3d offset = ref.position() - p.position();
    Eigen::Vector3d v = vel.velocity_mm_s;
    if (!use_z) {
      offset.z() = 0.0;
      v.z() = 0.0;
    }
    const double speed = v.norm();
    if (speed <= speed_threshold_mm_s) continue;
    sum_s += offset.dot(v / speed) / speed;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return LatencyEstimate{1e3 * sum_s / static_cast<double>(n), n};
}

struct UpdateRate {
  double hz = 0.0;
  double max_gap_s = 0.0;  // worst inter-sample gap, makes dropouts visible
};

inline UpdateRate compute_update_rate(const Trajectory& lts) {
  if (lts.size() < 2) throw InsufficientDataError("compute_update_rate: needs >= 2 samples");
  UpdateRate r;
  r.hz = static_cast<double>(lts.size() - 1) / lts.duration_s();
  for (std::size_t i = 0; i + 1 < lts.size(); ++i)
    r.max_gap_s = std::max(r.max_gap_s, to_seconds(lts.samples[i + 1].t - lts.samples[i].t));
  return r;
}

struct RepeatabilityResult {
  // Per evaluation pose: RMS distance of the matched LTS positions from
  // their centroid across visits.
  std::map<int, double> per_pose_spread_mm;
  double aggregate_mm = 0.0;  // mean over poses with >= 2 visits
  std::size_t poses_excluded = 0;  // poses with fewer than 2 visits
};

inline std::optional<RepeatabilityResult> compute_repeatability(const ErrorSamples& samples) {
  std::map<int, std::vector<Eigen::Vector3d>> by_pose;
  for (const ErrorSample& e : samples)
    by_pose[e.eval_pose_id].emplace_back(e.lts_x_mm, e.lts_y_mm, e.lts_z_mm.value_or(0.0));

  RepeatabilityResult result;
  double sum = 0.0;
  for (const auto& [id, pts] : by_pose) {
    if (pts.size() < 2) {
      ++result.poses_excluded;
      continue;
    }
    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    for (const auto& p : pts) centroid += p;
    centroid /= static_cast<double>(pts.size());
    double ss = 0.0;
    for (const auto& p : pts) ss += (p - centroid).squaredNorm();
    const double spread = std::sqrt(ss / static_cast<double>(pts.size()));
    result.per_pose_spread_mm[id] = spread;
    sum += spread;
  }
  if (result.per_pose_spread_mm.empty()) return std::nullopt;
  result.aggregate_mm = sum / static_cast<double>(result.per_pose_spread_mm.size());
  return result;
}

struct DriftResult {
  double slope_mm_per_s = 0.0;
  double intercept_mm = 0.0;
  double r_squared = 0.0;
};

// Ordinary least-squares fit of horizontal error against time.
inline DriftResult compute_drift(const ErrorSamples& samples) {
  if (samples.size() < 10) throw InsufficientDataError("compute_drift: needs >= 10 samples");
  const double span_s = to_seconds(samples.back().t - samples.front().t);
  if (span_s < 10.0) throw InsufficientDataError("compute_drift: needs >= 10 s of samples");

  const double t0 = samples.front().t.seconds();
  double st = 0.0, se = 0.0;
  for (const ErrorSample& s : samples) {
    st += s.t.seconds() - t0;
    se += s.horizontal_error_mm;
  }
  const double n = static_cast<double>(samples.size());
  const double mt = st / n, me = se / n;
  double stt = 0.0, ste = 0.0, see = 0.0;
  for (const ErrorSample& s : samples) {
    const double dt = s.t.seconds() - t0 - mt;
    const double de = s.horizontal_error_mm - me;
    stt += dt * dt;
    ste += dt * de;
    see += de * de;
  }
  DriftResult d;
  d.slope_mm_per_s = ste / stt;
  d.intercept_mm = me - d.slope_mm_per_s * mt;
  d.r_squared = see > 0.0 ? (ste * ste) / (stt * see) : 1.0;
  return d;
}

// Full metric report. Optional members read as "not provided" (capability
// missing on either stream) or "not computable" (data could not support the
// metric); the accompanying note says which.
struct PerformanceResults {
  std::string test_case_id;
  std::uint64_t seed = 0;
  std::string error_model_hash;
  std::size_t matched_sample_count = 0;
  std::size_t missed_visit_count = 0;

  DistributionStats horizontal_error_mm;
  std::optional<DistributionStats> vertical_error_mm;
  std::optional<DistributionStats> abs_orientation_error_deg;
  std::optional<BasicStats> signed_orientation_error_deg;
  BasicStats signed_error_x_mm;
  BasicStats signed_error_y_mm;
  std::optional<BasicStats> signed_error_z_mm;

  std::optional<double> latency_ms;
  std::size_t latency_sample_count = 0;
  std::optional<UpdateRate> update_rate;
  std::optional<RepeatabilityResult> repeatability;
  std::optional<DriftResult> drift;
  std::optional<double> clock_offset_ms;
  // Least-squares frame alignment over the matched pairs; computed for
  // coordinate-alignment runs.
  std::optional<AlignmentReport> alignment;

  std::vector<std::string> notes;
};

struct EvaluationOptions {
  std::vector<double> requested_quantiles{0.5, 0.95, 0.999, 0.9999};
  double latency_speed_threshold_mm_s = 250.0;
  double clock_offset_window_s = 0.5;
  TimeOffsetOptions offset;
};

// Orchestrates the evaluation: visit detection and time matching feed the
// pose-error statistics, while latency and clock offset come from the full
// streams, which constrain them far better than the handful of evaluation
// poses. Pure function of its inputs.
inline PerformanceResults evaluate_performance(const ExperimentData& data, const TestCase& tc,
                                               const EvaluationOptions& opts = {}) {
  const auto visits = find_visits(data.gt, tc.eval_poses);
  if (visits.empty())
    throw InsufficientDataError("evaluate_performance: no visits at all; evaluation pose " +
                                std::to_string(tc.eval_poses.front().id) + " was never reached");
  const MatchResult match = match_lts(data.lts, visits, tc.conditions.max_match_gap_s);
  if (match.matched.empty())
    throw InsufficientDataError(
        "evaluate_performance: every visit missed its LTS match; first missed evaluation pose " +
        std::to_string(match.missed.front().eval_pose_id));

  const ErrorSamples errors = compute_pose_errors(match.matched);

  PerformanceResults res;
  res.test_case_id = data.test_case_id;
  res.seed = data.seed;
  res.error_model_hash = data.error_model_hash;
  res.matched_sample_count = errors.size();
  res.missed_visit_count = match.missed.size();

  std::vector<double> horizontal, vertical, abs_yaw, signed_yaw, ex, ey, ez;
  for (const ErrorSample& e : errors) {
    horizontal.push_back(e.horizontal_error_mm);
    ex.push_back(e.signed_error_x_mm);
    ey.push_back(e.signed_error_y_mm);
    if (e.vertical_error_mm) vertical.push_back(*e.vertical_error_mm);
    if (e.signed_error_z_mm) ez.push_back(*e.signed_error_z_mm);
    if (e.abs_orientation_error_deg) abs_yaw.push_back(*e.abs_orientation_error_deg);
    if (e.signed_orientation_error_deg) signed_yaw.push_back(*e.signed_orientation_error_deg);
  }

  res.horizontal_error_mm = distribution_stats(horizontal, opts.requested_quantiles);
  res.signed_error_x_mm = basic_stats(ex);
  res.signed_error_y_mm = basic_stats(ey);

  const bool both_vertical =
      data.gt.capabilities.has_vertical && data.lts.capabilities.has_vertical;
  if (both_vertical && !vertical.empty()) {
    res.vertical_error_mm = distribution_stats(vertical, opts.requested_quantiles);
    res.signed_error_z_mm = basic_stats(ez);
  } else {
    res.notes.push_back("vertical error not provided: no vertical output on both streams");
  }

  const bool both_heading = data.gt.capabilities.has_heading && data.lts.capabilities.has_heading;
  if (both_heading && !abs_yaw.empty()) {
    res.abs_orientation_error_deg = distribution_stats(abs_yaw, opts.requested_quantiles);
    res.signed_orientation_error_deg = basic_stats(signed_yaw);
  } else {
    res.notes.push_back("orientation error not provided: no heading output on both streams");
  }

  if (const auto lat = estimate_latency(data.gt, data.lts, opts.latency_speed_threshold_mm_s)) {
    res.latency_ms = lat->latency_ms;
    res.latency_sample_count = lat->sample_count;
  } else {
    res.notes.push_back("latency not computable: no LTS samples above the GT speed threshold");
  }

  if (data.lts.size() >= 2) {
    res.update_rate = compute_update_rate(data.lts);
  } else {
    res.notes.push_back("update rate not computable: fewer than 2 LTS samples");
  }

  res.repeatability = compute_repeatability(errors);
  if (!res.repeatability)
    res.notes.push_back("repeatability not computable: no evaluation pose with >= 2 visits");

  const double span_s = to_seconds(errors.back().t - errors.front().t);
  if (errors.size() >= 10 && span_s >= 10.0) {
    res.drift = compute_drift(errors);
  } else {
    res.notes.push_back("drift not computable: needs >= 10 matched samples over >= 10 s");
  }

  try {
    TimeOffsetOptions oo = opts.offset;
    const auto off = estimate_time_offset(data.gt, data.lts, opts.clock_offset_window_s, oo);
    res.clock_offset_ms = 1e3 * off.offset_s;
  } catch (const Error& e) {
    res.notes.push_back(std::string("clock offset not computable: ") + e.what());
  }

  if (tc.scenario_kind == ScenarioKind::CoordinateAlignment) {
    std::vector<PointPair> pairs;
    for (const MatchedSample& m : match.matched)
      pairs.push_back({m.lts_pose.position(), m.visit.gt_pose_at_visit.position()});
    const TransformMode mode = both_vertical ? TransformMode::Spatial3D : TransformMode::Planar2D;
    try {
      res.alignment = align_rigid(pairs, mode);
    } catch (const Error& e) {
      res.notes.push_back(std::string("alignment not computable: ") + e.what());
    }
  }
  return res;
}

}  // namespace ltseval
