#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <set>

#include "ltseval/io.hpp"
#include "ltseval/scenario.hpp"
#include "ltseval/testbed.hpp"

using namespace ltseval;

namespace {

ScenarioParams standard_params() {
  ScenarioParams p;
  p.area = {10.0, 10.0};
  p.n_eval_poses = 63;
  p.nominal_speed_mm_s = 1400.0;
  p.seed = 11;
  return p;
}

// Curve segments connect straight lanes; count the direction reversals
// between consecutive long (> 2 m) segments.
int count_curve_segments(const std::vector<Pose>& wps) {
  std::vector<Eigen::Vector2d> lanes;
  for (std::size_t i = 1; i < wps.size(); ++i) {
    const Eigen::Vector2d d(wps[i].x_mm - wps[i - 1].x_mm, wps[i].y_mm - wps[i - 1].y_mm);
    if (d.norm() > 2000.0) lanes.push_back(d.normalized());
  }
  int curves = 0;
  for (std::size_t i = 1; i < lanes.size(); ++i)
    if (lanes[i - 1].dot(lanes[i]) < 0.0) ++curves;
  return curves;
}

}  // namespace

TEST_CASE("build_scenario is deterministic per (kind, params, seed)") {
  for (ScenarioKind kind :
       {ScenarioKind::StandardDynamic, ScenarioKind::StandardStatic, ScenarioKind::Repeatability,
        ScenarioKind::Latency, ScenarioKind::CoordinateAlignment}) {
    const TestCase a = build_scenario(kind, standard_params());
    const TestCase b = build_scenario(kind, standard_params());
    CHECK(to_yaml(a) == to_yaml(b));
  }
  const TestCase seeded = build_scenario(ScenarioKind::StandardDynamic, standard_params());
  ScenarioParams other = standard_params();
  other.seed = 12;
  CHECK(to_yaml(seeded) != to_yaml(build_scenario(ScenarioKind::StandardDynamic, other)));
}

TEST_CASE("generated waypoints stay inside the area with margin") {
  for (ScenarioKind kind :
       {ScenarioKind::StandardDynamic, ScenarioKind::StandardStatic, ScenarioKind::Repeatability,
        ScenarioKind::Latency, ScenarioKind::CoordinateAlignment}) {
    const TestCase tc = build_scenario(kind, standard_params());
    const double w = tc.area.width_m * 1000.0;
    const double d = tc.area.depth_m * 1000.0;
    for (const Pose& wp : tc.waypoints) {
      CHECK(wp.x_mm >= 100.0);
      CHECK(wp.x_mm <= w - 100.0);
      CHECK(wp.y_mm >= 100.0);
      CHECK(wp.y_mm <= d - 100.0);
    }
  }
}

TEST_CASE("every generated test case validates without errors") {
  for (ScenarioKind kind :
       {ScenarioKind::StandardDynamic, ScenarioKind::StandardStatic, ScenarioKind::Repeatability,
        ScenarioKind::Latency, ScenarioKind::CoordinateAlignment}) {
    const TestCase tc = build_scenario(kind, standard_params());
    const ValidationReport report = validate_test_case(tc);
    CAPTURE(to_string(kind));
    CHECK(report.errors.empty());
  }
}

TEST_CASE("standard dynamic: 63 poses over 100 m^2 with several curves") {
  const TestCase tc = build_scenario(ScenarioKind::StandardDynamic, standard_params());
  CHECK(tc.eval_poses.size() == 63);
  CHECK(count_curve_segments(tc.waypoints) >= 4);
  for (const EvaluationPose& ep : tc.eval_poses) CHECK_FALSE(ep.required_static);
  const ValidationReport report = validate_test_case(tc);
  CHECK(report.warnings.empty());  // 63 lies inside the recommended 50..100
}

TEST_CASE("standard static: every pose carries the static gate") {
  ScenarioParams p = standard_params();
  p.static_speed_threshold_mm_s = 50.0;
  const TestCase tc = build_scenario(ScenarioKind::StandardStatic, p);
  REQUIRE(tc.conditions.static_speed_threshold_mm_s.has_value());
  CHECK(*tc.conditions.static_speed_threshold_mm_s == 50.0);
  for (const EvaluationPose& ep : tc.eval_poses) {
    CHECK(ep.required_static);
    REQUIRE(ep.static_speed_threshold_mm_s.has_value());
    CHECK(*ep.static_speed_threshold_mm_s == 50.0);
  }
}

TEST_CASE("repeatability: generated GT revisits every pose enough times") {
  ScenarioParams p = standard_params();
  p.area = {6.0, 6.0};
  p.n_eval_poses = 10;
  p.min_repeat_visits = 3;
  const TestCase tc = build_scenario(ScenarioKind::Repeatability, p);
  const Trajectory gt = generate_gt(tc, 50.0, 0);
  const auto visits = find_visits(gt, tc.eval_poses);
  std::map<int, int> per_pose;
  for (const auto& v : visits) ++per_pose[v.eval_pose_id];
  REQUIRE(per_pose.size() == tc.eval_poses.size());
  for (const auto& [id, n] : per_pose) {
    CAPTURE(id);
    CHECK(n >= 3);
  }
}

TEST_CASE("latency scenario raises the speed and straightens the path") {
  const TestCase tc = build_scenario(ScenarioKind::Latency, standard_params());
  CHECK(tc.conditions.nominal_speed_mm_s >= 2000.0);
  // Two lanes: exactly one U-turn worth of curves.
  CHECK(count_curve_segments(tc.waypoints) <= 3);
}

TEST_CASE("coordinate alignment: poses on a uniform static grid") {
  ScenarioParams p = standard_params();
  p.n_eval_poses = 16;
  const TestCase tc = build_scenario(ScenarioKind::CoordinateAlignment, p);
  REQUIRE(tc.eval_poses.size() == 16);
  std::set<double> xs, ys;
  for (const EvaluationPose& ep : tc.eval_poses) {
    CHECK(ep.required_static);
    xs.insert(ep.target.x_mm);
    ys.insert(ep.target.y_mm);
  }
  CHECK(xs.size() == 4);
  CHECK(ys.size() == 4);
}

TEST_CASE("validate_test_case flags pose counts outside 50..100") {
  ScenarioParams p = standard_params();
  p.n_eval_poses = 10;
  const TestCase low = build_scenario(ScenarioKind::StandardDynamic, p);
  bool below = false;
  for (const std::string& w : validate_test_case(low).warnings)
    if (w.find("below recommended 50") != std::string::npos) below = true;
  CHECK(below);

  p.n_eval_poses = 120;
  const TestCase high = build_scenario(ScenarioKind::StandardDynamic, p);
  bool above = false;
  for (const std::string& w : validate_test_case(high).warnings)
    if (w.find("above recommended 100") != std::string::npos) above = true;
  CHECK(above);
}

TEST_CASE("validate_test_case applies the 10x GT accuracy rule") {
  TestCase tc = build_scenario(ScenarioKind::StandardDynamic, standard_params());
  tc.gt_accuracy_mm = 1.0;
  tc.reporting["expected_lts_accuracy_mm"] = "5";
  const ValidationReport report = validate_test_case(tc);
  bool flagged = false;
  for (const std::string& w : report.warnings)
    if (w.find("expected_lts_accuracy_mm") != std::string::npos) flagged = true;
  CHECK(flagged);

  tc.reporting["expected_lts_accuracy_mm"] = "25";
  bool flagged_ok = false;
  for (const std::string& w : validate_test_case(tc).warnings)
    if (w.find("expected_lts_accuracy_mm") != std::string::npos) flagged_ok = true;
  CHECK_FALSE(flagged_ok);
}

TEST_CASE("validate_test_case reports structural errors") {
  TestCase tc = build_scenario(ScenarioKind::StandardDynamic, standard_params());

  SECTION("pose outside the area") {
    tc.eval_poses[0].target.x_mm = -50.0;
    CHECK_FALSE(validate_test_case(tc).ok());
  }
  SECTION("duplicate pose id") {
    tc.eval_poses[1].id = tc.eval_poses[0].id;
    CHECK_FALSE(validate_test_case(tc).ok());
  }
  SECTION("static kind without a threshold") {
    tc.scenario_kind = ScenarioKind::StandardStatic;
    CHECK_FALSE(validate_test_case(tc).ok());
  }
  SECTION("repeatability without min visits") {
    tc.scenario_kind = ScenarioKind::Repeatability;
    CHECK_FALSE(validate_test_case(tc).ok());
  }
  SECTION("non-positive tolerance") {
    tc.eval_poses[2].position_tolerance_mm = 0.0;
    CHECK_FALSE(validate_test_case(tc).ok());
  }
}

TEST_CASE("build_scenario rejects bad parameters") {
  ScenarioParams p = standard_params();
  p.n_eval_poses = 1;
  CHECK_THROWS_AS(build_scenario(ScenarioKind::StandardDynamic, p), ParameterError);
  p = standard_params();
  p.area = {1.0, 1.0};
  CHECK_THROWS_AS(build_scenario(ScenarioKind::StandardDynamic, p), ParameterError);
  p = standard_params();
  p.nominal_speed_mm_s = 0.0;
  CHECK_THROWS_AS(build_scenario(ScenarioKind::StandardDynamic, p), ParameterError);
  CHECK_THROWS_AS(build_scenario(ScenarioKind::Custom, standard_params()), ParameterError);
}
