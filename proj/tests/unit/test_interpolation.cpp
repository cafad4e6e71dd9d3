#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "ltseval/interpolation.hpp"
#include "ltseval/trajectory.hpp"

using namespace ltseval;

namespace {

Trajectory line_traj(double x0, double x1, double duration_s, std::size_t n) {
  Trajectory t;
  t.capabilities = {false, false, false};
  for (std::size_t i = 0; i < n; ++i) {
    Pose p;
    p.t = Timestamp::from_seconds(duration_s * static_cast<double>(i) / (n - 1));
    p.x_mm = x0 + (x1 - x0) * static_cast<double>(i) / (n - 1);
    p.y_mm = 0.0;
    t.samples.push_back(p);
  }
  return t;
}

// Independent oracle: average two headings on the unit circle via rotation
// matrices and read the angle back.
double circle_mean_deg(double a_deg, double b_deg) {
  const double ax = std::cos(deg_to_rad(a_deg)), ay = std::sin(deg_to_rad(a_deg));
  const double bx = std::cos(deg_to_rad(b_deg)), by = std::sin(deg_to_rad(b_deg));
  return wrap_deg_360(rad_to_deg(std::atan2((ay + by) / 2.0, (ax + bx) / 2.0)));
}

}  // namespace

TEST_CASE("interpolate_pose returns sample nodes bit-for-bit") {
  Trajectory t;
  t.capabilities = {true, true, false};
  for (int i = 0; i < 5; ++i) {
    Pose p;
    p.t = Timestamp{i * 1000000000ll};
    p.x_mm = 17.25 * i + 0.1;
    p.y_mm = -3.5 * i;
    p.z_mm = 0.333333333333333 * i;
    p.yaw_deg = wrap_deg_360(123.456789 * i);
    t.samples.push_back(p);
  }
  for (const Pose& p : t.samples) {
    const Pose q = interpolate_pose(t, p.t);
    CHECK(q.x_mm == p.x_mm);
    CHECK(q.y_mm == p.y_mm);
    CHECK(*q.z_mm == *p.z_mm);
    CHECK(*q.yaw_deg == *p.yaw_deg);
  }
}

TEST_CASE("interpolate_pose midpoint of a straight segment") {
  Trajectory t;
  Pose a, b;
  a.t = Timestamp{0};
  a.x_mm = 0.0;
  b.t = Timestamp{1000000000};
  b.x_mm = 100.0;
  t.samples = {a, b};
  const Pose mid = interpolate_pose(t, Timestamp{500000000});
  CHECK(mid.x_mm == Catch::Approx(50.0));
  CHECK(mid.y_mm == Catch::Approx(0.0));
  CHECK(mid.t.ns == 500000000);
}

TEST_CASE("interpolate_pose heading takes the shortest arc across 0") {
  Trajectory t;
  t.capabilities = {false, true, false};
  Pose a, b;
  a.t = Timestamp{0};
  a.yaw_deg = 350.0;
  b.t = Timestamp{1000000000};
  b.yaw_deg = 10.0;
  t.samples = {a, b};
  const Pose mid = interpolate_pose(t, Timestamp{500000000});
  CHECK(*mid.yaw_deg == Catch::Approx(circle_mean_deg(350.0, 10.0)).margin(1e-9));
  CHECK(*mid.yaw_deg == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("interpolate_pose refuses extrapolation") {
  const Trajectory t = line_traj(0.0, 1000.0, 1.0, 11);
  CHECK_THROWS_AS(interpolate_pose(t, Timestamp{-1}), ExtrapolationError);
  CHECK_THROWS_AS(interpolate_pose(t, Timestamp::from_seconds(1.0) + 1), ExtrapolationError);
}

TEST_CASE("interpolated heading never traverses the long arc") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> angle(0.0, 360.0);
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    Trajectory t;
    t.capabilities = {false, true, false};
    Pose a, b;
    a.t = Timestamp{0};
    a.yaw_deg = angle(rng);
    b.t = Timestamp{1000000000};
    b.yaw_deg = angle(rng);
    t.samples = {a, b};
    const Pose q = interpolate_pose(
        t, Timestamp{static_cast<std::int64_t>(frac(rng) * 1000000000.0)});
    REQUIRE(*q.yaw_deg >= 0.0);
    REQUIRE(*q.yaw_deg < 360.0);
    const double span = std::abs(shortest_arc_deg(*a.yaw_deg, *b.yaw_deg));
    CHECK(std::abs(shortest_arc_deg(*a.yaw_deg, *q.yaw_deg)) <= span + 1e-9);
    CHECK(std::abs(shortest_arc_deg(*b.yaw_deg, *q.yaw_deg)) <= span + 1e-9);
  }
}

TEST_CASE("interpolate_pose slerps quaternions along the short way") {
  Trajectory t;
  t.capabilities = {false, false, true};
  Pose a, b;
  a.t = Timestamp{0};
  a.orientation = yaw_to_quat(10.0);
  b.t = Timestamp{1000000000};
  b.orientation = yaw_to_quat(350.0);
  t.samples = {a, b};
  const Pose mid = interpolate_pose(t, Timestamp{500000000});
  CHECK(quat_yaw_deg(*mid.orientation) == Catch::Approx(0.0).margin(1e-9));
  CHECK(mid.orientation->norm() == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("estimate_velocity on a stationary trajectory") {
  Trajectory t;
  for (int i = 0; i < 10; ++i) {
    Pose p;
    p.t = Timestamp{i * 100000000ll};
    p.x_mm = 5.0;
    p.y_mm = -2.0;
    t.samples.push_back(p);
  }
  const auto v = estimate_velocity(t, Timestamp{450000000});
  CHECK(v.speed_mm_s == 0.0);
  CHECK(v.velocity_mm_s.norm() == 0.0);
}

TEST_CASE("estimate_velocity is exact for uniform motion") {
  const Trajectory t = line_traj(0.0, 10000.0, 10.0, 1001);  // 1000 mm/s at 100 Hz
  for (std::int64_t ns : {123456789ll, 5000000000ll, 9870000000ll}) {
    const auto v = estimate_velocity(t, Timestamp{ns});
    CHECK(v.speed_mm_s == Catch::Approx(1000.0).margin(1e-6));
    CHECK(v.velocity_mm_s.x() == Catch::Approx(1000.0).margin(1e-6));
  }
}

TEST_CASE("estimate_velocity matches the analytic derivative of a sinusoid") {
  // x(t) = A sin(w t) at 1 kHz; the oracle is A w |cos(w t)|.
  const double amplitude = 500.0;
  const double omega = 2.0 * kPi * 0.8;
  Trajectory t;
  for (int i = 0; i <= 4000; ++i) {
    Pose p;
    p.t = Timestamp{i * 1000000ll};
    p.x_mm = amplitude * std::sin(omega * p.t.seconds());
    t.samples.push_back(p);
  }
  for (double ts : {0.5, 1.0, 1.25, 2.3}) {
    const auto v = estimate_velocity(t, Timestamp::from_seconds(ts));
    const double expected = amplitude * omega * std::abs(std::cos(omega * ts));
    CHECK(v.speed_mm_s == Catch::Approx(expected).epsilon(0.005));
  }
}

TEST_CASE("estimate_velocity refuses boundary queries") {
  const Trajectory t = line_traj(0.0, 1000.0, 1.0, 11);
  CHECK_THROWS_AS(estimate_velocity(t, t.start_time()), BoundaryError);
  CHECK_THROWS_AS(estimate_velocity(t, t.end_time()), BoundaryError);
  CHECK_THROWS_AS(estimate_velocity(t, Timestamp{50000000}, 100), BoundaryError);
}

TEST_CASE("estimate_velocity smoothing window averages across samples") {
  const Trajectory t = line_traj(0.0, 10000.0, 10.0, 1001);
  const auto raw = estimate_velocity(t, Timestamp{5000000000ll}, 0);
  const auto smooth = estimate_velocity(t, Timestamp{5000000000ll}, 5);
  CHECK(raw.speed_mm_s == Catch::Approx(smooth.speed_mm_s).margin(1e-9));
}

TEST_CASE("pose validation enforces the field invariants") {
  Pose p;
  p.x_mm = 1.0;
  p.y_mm = 2.0;
  CHECK_NOTHROW(validate_pose(p, "p"));

  SECTION("non-finite position") {
    p.x_mm = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(validate_pose(p, "p"), ParameterError);
  }
  SECTION("yaw outside [0, 360)") {
    p.yaw_deg = 360.0;
    CHECK_THROWS_AS(validate_pose(p, "p"), ParameterError);
    p.yaw_deg = -0.5;
    CHECK_THROWS_AS(validate_pose(p, "p"), ParameterError);
  }
  SECTION("non-unit quaternion") {
    p.orientation = Eigen::Quaterniond(2.0, 0.0, 0.0, 0.0);
    CHECK_THROWS_AS(validate_pose(p, "p"), ParameterError);
  }
  SECTION("heading disagreeing with the quaternion yaw") {
    p.yaw_deg = 10.0;
    p.orientation = yaw_to_quat(11.0);
    CHECK_THROWS_AS(validate_pose(p, "p"), ParameterError);
    p.orientation = yaw_to_quat(10.0);
    CHECK_NOTHROW(validate_pose(p, "p"));
  }
}

TEST_CASE("trajectory validation checks ordering and capability consistency") {
  Trajectory t;
  t.capabilities = {false, true, false};
  Pose a, b;
  a.t = Timestamp{0};
  a.yaw_deg = 0.0;
  b.t = Timestamp{1};
  b.yaw_deg = 90.0;
  t.samples = {a, b};
  CHECK_NOTHROW(t.validate());

  SECTION("non-increasing timestamps") {
    t.samples[1].t = Timestamp{0};
    CHECK_THROWS_AS(t.validate(), ParameterError);
  }
  SECTION("field missing despite the capability flag") {
    t.samples[1].yaw_deg.reset();
    CHECK_THROWS_AS(t.validate(), ParameterError);
  }
  SECTION("field present despite the capability flag") {
    t.samples[0].z_mm = 1.0;
    CHECK_THROWS_AS(t.validate(), ParameterError);
  }
}
