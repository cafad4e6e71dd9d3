#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ltseval/errors.hpp"
#include "ltseval/path.hpp"
#include "ltseval/pose.hpp"
#include "ltseval/rng.hpp"
#include "ltseval/visits.hpp"

namespace ltseval {

enum class ScenarioKind {
  StandardDynamic,
  StandardStatic,
  Repeatability,
  Latency,
  CoordinateAlignment,
  Custom,
};

inline const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::StandardDynamic: return "standard_dynamic";
    case ScenarioKind::StandardStatic: return "standard_static";
    case ScenarioKind::Repeatability: return "repeatability";
    case ScenarioKind::Latency: return "latency";
    case ScenarioKind::CoordinateAlignment: return "coordinate_alignment";
    case ScenarioKind::Custom: return "custom";
  }
  return "custom";
}

inline std::optional<ScenarioKind> scenario_kind_from_string(const std::string& s) {
  if (s == "standard_dynamic") return ScenarioKind::StandardDynamic;
  if (s == "standard_static") return ScenarioKind::StandardStatic;
  if (s == "repeatability") return ScenarioKind::Repeatability;
  if (s == "latency") return ScenarioKind::Latency;
  if (s == "coordinate_alignment") return ScenarioKind::CoordinateAlignment;
  if (s == "custom") return ScenarioKind::Custom;
  return std::nullopt;
}

struct Area {
  double width_m = 10.0;
  double depth_m = 10.0;
  double square_m2() const { return width_m * depth_m; }
};

// Execution conditions carried by the test case so the executor stays
// generic: scenario kinds are data, not code paths.
struct Conditions {
  double nominal_speed_mm_s = 1400.0;
  double max_match_gap_s = 0.25;
  std::optional<double> static_speed_threshold_mm_s;
  std::optional<int> min_repeat_visits;
};

struct TestCase {
  std::string id;
  ScenarioKind scenario_kind = ScenarioKind::Custom;
  Area area;
  std::vector<Pose> waypoints;  // trajectory template; timestamps unused
  std::vector<EvaluationPose> eval_poses;
  Conditions conditions;
  std::map<std::string, std::string> reporting;
  double gt_accuracy_mm = 1.0;
};

struct ValidationReport {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  bool ok() const { return errors.empty(); }
};

struct ScenarioParams {
  Area area;
  int n_eval_poses = 63;
  double nominal_speed_mm_s = 1400.0;  // walking pace default; configurable
  std::uint64_t seed = 0;
  std::string id;                      // empty: derived from kind and seed
  double position_tolerance_mm = 100.0;
  std::optional<double> heading_tolerance_deg;
  double static_speed_threshold_mm_s = 50.0;
  int min_repeat_visits = 3;
  double max_match_gap_s = 0.25;
  double gt_accuracy_mm = 1.0;
};

namespace detail {

inline constexpr double kAreaMarginMm = 300.0;   // waypoint inset from the area edge
inline constexpr double kArcStepDeg = 10.0;

inline void append_arc(std::vector<Eigen::Vector2d>& pts, const Eigen::Vector2d& center,
                       double radius, double from_deg, double to_deg) {
  const double sweep = to_deg - from_deg;
  const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(sweep) / kArcStepDeg)));
  for (int i = 1; i <= steps; ++i) {
    const double ang = deg_to_rad(from_deg + sweep * i / steps);
    pts.emplace_back(center.x() + radius * std::cos(ang), center.y() + radius * std::sin(ang));
  }
}

// Boustrophedon sweep with circular-arc U-turns over the inner rectangle.
// `n_lanes` <= 0 picks a lane count that covers the depth at twice the turn
// radius.
inline std::vector<Eigen::Vector2d> serpentine(const Area& area, int n_lanes = 0) {
  const double w = area.width_m * 1000.0;
  const double d = area.depth_m * 1000.0;
  const double x0 = kAreaMarginMm, x1 = w - kAreaMarginMm;
  const double y0 = kAreaMarginMm, y1 = d - kAreaMarginMm;
  double radius = std::min(1000.0, w / 6.0);
  if (n_lanes <= 0) n_lanes = std::max(2, static_cast<int>((y1 - y0) / (2.0 * radius)) + 1);
  double spacing = (y1 - y0) / (n_lanes - 1);
  while (spacing < 2.0 * radius && n_lanes > 2) spacing = (y1 - y0) / (--n_lanes - 1);
  if (spacing < 2.0 * radius) radius = spacing / 2.0;

  std::vector<Eigen::Vector2d> pts;
  pts.emplace_back(x0, y0);
  for (int lane = 0; lane < n_lanes; ++lane) {
    const double y = y0 + lane * spacing;
    const bool rightward = lane % 2 == 0;
    const bool last = lane == n_lanes - 1;
    if (rightward) {
      pts.emplace_back(last ? x1 : x1 - radius, y);
      if (!last) {
        append_arc(pts, {x1 - radius, y + radius}, radius, -90.0, 0.0);
        if (spacing > 2.0 * radius) pts.emplace_back(x1, y + spacing - radius);
        append_arc(pts, {x1 - radius, y + spacing - radius}, radius, 0.0, 90.0);
      }
    } else {
      pts.emplace_back(last ? x0 : x0 + radius, y);
      if (!last) {
        append_arc(pts, {x0 + radius, y + radius}, radius, 270.0, 180.0);
        if (spacing > 2.0 * radius) pts.emplace_back(x0, y + spacing - radius);
        append_arc(pts, {x0 + radius, y + spacing - radius}, radius, 180.0, 90.0);
      }
    }
  }
  return pts;
}

// Grid points in boustrophedon row order, for the alignment scenario's
// even coverage with static measurements.
inline std::vector<Eigen::Vector2d> coverage_grid(const Area& area, int n_points) {
  const double w = area.width_m * 1000.0;
  const double d = area.depth_m * 1000.0;
  const int cols = std::max(2, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_points)))));
  const int rows = std::max(2, (n_points + cols - 1) / cols);
  std::vector<Eigen::Vector2d> pts;
  for (int r = 0; r < rows && static_cast<int>(pts.size()) < n_points; ++r) {
    const double y = kAreaMarginMm + r * (d - 2.0 * kAreaMarginMm) / (rows - 1);
    for (int c = 0; c < cols && static_cast<int>(pts.size()) < n_points; ++c) {
      const int cc = r % 2 == 0 ? c : cols - 1 - c;
      pts.emplace_back(kAreaMarginMm + cc * (w - 2.0 * kAreaMarginMm) / (cols - 1), y);
    }
  }
  return pts;
}

inline std::vector<Pose> to_waypoints(const std::vector<Eigen::Vector2d>& pts) {
  std::vector<Pose> wps;
  wps.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    Pose p;
    p.x_mm = pts[i].x();
    p.y_mm = pts[i].y();
    const std::size_t j = i + 1 < pts.size() ? i : i - 1;
    const Eigen::Vector2d dir = pts[j + 1] - pts[j];
    p.yaw_deg = wrap_deg_360(rad_to_deg(std::atan2(dir.y(), dir.x())));
    wps.push_back(p);
  }
  return wps;
}

}  // namespace detail

// Builds one of the five standard scenarios deterministically from (kind,
// params, seed). The waypoint path is a serpentine sweep of the area with
// arc corners; evaluation poses sit on the path. Kind specifics:
//   StandardStatic / CoordinateAlignment: every pose requires a static
//     measurement gated by the speed threshold.
//   CoordinateAlignment: poses on a uniform grid over the area.
//   Repeatability: the lap repeats so each pose is visited at least
//     min_repeat_visits times.
//   Latency: two straightened lanes and a raised speed, provoking
//     velocity-dependent errors.
inline TestCase build_scenario(ScenarioKind kind, const ScenarioParams& params) {
  if (kind == ScenarioKind::Custom)
    throw ParameterError("build_scenario: custom test cases are authored, not generated");
  if (params.n_eval_poses < 2) throw ParameterError("build_scenario: need >= 2 evaluation poses");
  if (params.area.square_m2() < 4.0) throw ParameterError("build_scenario: area must be >= 4 m^2");
  if (!(params.nominal_speed_mm_s > 0.0))
    throw ParameterError("build_scenario: nominal speed must be > 0");

  SeededRng rng(params.seed);
  TestCase tc;
  tc.scenario_kind = kind;
  tc.area = params.area;
  tc.gt_accuracy_mm = params.gt_accuracy_mm;
  tc.id = params.id.empty()
              ? std::string(to_string(kind)) + "-seed" + std::to_string(params.seed)
              : params.id;
  tc.conditions.nominal_speed_mm_s = params.nominal_speed_mm_s;
  tc.conditions.max_match_gap_s = params.max_match_gap_s;

  const bool all_static =
      kind == ScenarioKind::StandardStatic || kind == ScenarioKind::CoordinateAlignment;
  if (all_static)
    tc.conditions.static_speed_threshold_mm_s = params.static_speed_threshold_mm_s;
  if (kind == ScenarioKind::Repeatability)
    tc.conditions.min_repeat_visits = params.min_repeat_visits;
  if (kind == ScenarioKind::Latency)
    tc.conditions.nominal_speed_mm_s = std::max(params.nominal_speed_mm_s, 2000.0);

  auto make_eval_pose = [&](int id, const Eigen::Vector2d& pos, double yaw) {
    EvaluationPose ep;
    ep.id = id;
    ep.target.x_mm = pos.x();
    ep.target.y_mm = pos.y();
    ep.target.yaw_deg = yaw;
    ep.position_tolerance_mm = params.position_tolerance_mm;
    ep.heading_tolerance_deg = params.heading_tolerance_deg;
    if (all_static) {
      ep.required_static = true;
      ep.static_speed_threshold_mm_s = params.static_speed_threshold_mm_s;
    }
    return ep;
  };

  if (kind == ScenarioKind::CoordinateAlignment) {
    const auto grid = detail::coverage_grid(params.area, params.n_eval_poses);
    tc.waypoints = detail::to_waypoints(grid);
    for (int i = 0; i < params.n_eval_poses; ++i)
      tc.eval_poses.push_back(make_eval_pose(i, grid[static_cast<std::size_t>(i)],
                                             *tc.waypoints[static_cast<std::size_t>(i)].yaw_deg));
    return tc;
  }

  const auto lap = detail::serpentine(params.area, kind == ScenarioKind::Latency ? 2 : 0);
  std::vector<Eigen::Vector2d> pts = lap;
  if (kind == ScenarioKind::Repeatability) {
    // Out-and-back traversal: every repetition passes the same points, so
    // repeated visits sample the identical pose.
    for (int rep = 1; rep < params.min_repeat_visits; ++rep) {
      if (rep % 2 == 1)
        pts.insert(pts.end(), lap.rbegin() + 1, lap.rend());
      else
        pts.insert(pts.end(), lap.begin() + 1, lap.end());
    }
  }
  tc.waypoints = detail::to_waypoints(pts);

  // Poses spread along one lap at jittered arc-length fractions.
  Polyline lap_path(lap);
  const double slot = lap_path.length() / params.n_eval_poses;
  for (int i = 0; i < params.n_eval_poses; ++i) {
    const double jitter = 0.2 * (rng.uniform01() - 0.5);
    const double s = std::clamp((i + 0.5 + jitter) * slot, 0.0, lap_path.length());
    tc.eval_poses.push_back(make_eval_pose(i, lap_path.point_at(s), lap_path.heading_at(s)));
  }
  return tc;
}

// Structural checks (errors) and reporting-recommendation checks (warnings).
// A test case with an empty error list is executable.
inline ValidationReport validate_test_case(const TestCase& tc) {
  ValidationReport report;
  auto err = [&](const std::string& m) { report.errors.push_back(m); };
  auto warn = [&](const std::string& m) { report.warnings.push_back(m); };

  if (!(tc.area.width_m > 0.0) || !(tc.area.depth_m > 0.0)) err("area dimensions must be positive");
  if (tc.waypoints.size() < 2) err("waypoint path needs at least 2 poses");
  if (tc.eval_poses.empty()) err("no evaluation poses");
  if (!(tc.conditions.nominal_speed_mm_s > 0.0)) err("nominal speed must be positive");
  if (!(tc.conditions.max_match_gap_s > 0.0)) err("max_match_gap_s must be positive");
  if (tc.gt_accuracy_mm < 0.0) err("gt_accuracy_mm must be non-negative");

  const double w = tc.area.width_m * 1000.0;
  const double d = tc.area.depth_m * 1000.0;
  auto inside = [&](double x, double y) { return x >= 0.0 && x <= w && y >= 0.0 && y <= d; };
  for (std::size_t i = 0; i < tc.waypoints.size(); ++i)
    if (!inside(tc.waypoints[i].x_mm, tc.waypoints[i].y_mm))
      err("waypoint " + std::to_string(i) + " lies outside the test area");

  std::set<int> ids;
  for (const EvaluationPose& ep : tc.eval_poses) {
    const std::string label = "evaluation pose " + std::to_string(ep.id);
    if (!ids.insert(ep.id).second) err(label + ": duplicate id");
    if (!inside(ep.target.x_mm, ep.target.y_mm)) err(label + " lies outside the test area");
    if (!(ep.position_tolerance_mm > 0.0)) err(label + ": position tolerance must be positive");
    if (ep.heading_tolerance_deg && !(*ep.heading_tolerance_deg > 0.0))
      err(label + ": heading tolerance must be positive");
    if (ep.required_static && !ep.static_speed_threshold_mm_s)
      err(label + ": required_static without a speed threshold");
  }

  const bool needs_static_threshold = tc.scenario_kind == ScenarioKind::StandardStatic ||
                                      tc.scenario_kind == ScenarioKind::CoordinateAlignment;
  if (needs_static_threshold && !tc.conditions.static_speed_threshold_mm_s)
    err(std::string(to_string(tc.scenario_kind)) + " requires static_speed_threshold_mm_s");
  if (tc.scenario_kind == ScenarioKind::Repeatability && !tc.conditions.min_repeat_visits)
    err("repeatability requires min_repeat_visits");
  if (tc.conditions.min_repeat_visits && *tc.conditions.min_repeat_visits < 2)
    err("min_repeat_visits must be >= 2");

  const std::size_t n = tc.eval_poses.size();
  if (n > 0 && n < 50) warn("evaluation pose count below recommended 50");
  if (n > 100) warn("evaluation pose count above recommended 100");

  // 10x rule: the GT should be an order of magnitude better than the system
  // it qualifies.
  auto it = tc.reporting.find("expected_lts_accuracy_mm");
  if (it != tc.reporting.end() && tc.gt_accuracy_mm > 0.0) {
    try {
      const double expected = std::stod(it->second);
      if (expected < 10.0 * tc.gt_accuracy_mm)
        warn("declared GT accuracy supports LTS accuracies down to " +
             std::to_string(10.0 * tc.gt_accuracy_mm) + " mm, but expected_lts_accuracy_mm is " +
             it->second);
    } catch (const std::exception&) {
      warn("reporting.expected_lts_accuracy_mm is not numeric");
    }
  }
  return report;
}

}  // namespace ltseval
