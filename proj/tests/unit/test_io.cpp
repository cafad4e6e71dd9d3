#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <random>

#include "ltseval/io.hpp"
#include "ltseval/scenario.hpp"
#include "ltseval/testbed.hpp"

using namespace ltseval;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "ltseval_io_test";
  fs::create_directories(dir);
  return dir;
}

Trajectory random_trajectory(std::uint64_t seed, bool vertical, bool heading, bool quat) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-1e4, 1e4);
  std::uniform_real_distribution<double> angle(0.0, 360.0);
  Trajectory t;
  t.capabilities = {vertical, heading, quat};
  for (int i = 0; i < 50; ++i) {
    Pose p;
    p.t = Timestamp{i * 12345678ll + static_cast<std::int64_t>(rng() % 1000)};
    p.x_mm = coord(rng);
    p.y_mm = coord(rng);
    if (vertical) p.z_mm = coord(rng);
    const double yaw = angle(rng);
    if (heading) p.yaw_deg = yaw;
    if (quat) p.orientation = yaw_to_quat(heading ? yaw : angle(rng));
    t.samples.push_back(p);
  }
  return t;
}

}  // namespace

TEST_CASE("trajectory CSV round trip preserves every bit") {
  const fs::path path = scratch_dir() / "traj.csv";
  for (int combo = 0; combo < 4; ++combo) {
    const Trajectory t =
        random_trajectory(100 + combo, combo & 1, combo & 2, (combo & 2) != 0);
    write_trajectory_csv(path, t);
    const Trajectory back = read_trajectory_csv(path, t.source);
    REQUIRE(back.size() == t.size());
    CHECK(back.capabilities == t.capabilities);
    for (std::size_t i = 0; i < t.size(); ++i) {
      CHECK(back.samples[i].t.ns == t.samples[i].t.ns);
      CHECK(back.samples[i].x_mm == t.samples[i].x_mm);
      CHECK(back.samples[i].y_mm == t.samples[i].y_mm);
      if (t.capabilities.has_vertical) CHECK(*back.samples[i].z_mm == *t.samples[i].z_mm);
      if (t.capabilities.has_heading) CHECK(*back.samples[i].yaw_deg == *t.samples[i].yaw_deg);
      if (t.capabilities.has_orientation3d)
        CHECK(back.samples[i].orientation->coeffs() == t.samples[i].orientation->coeffs());
    }
    CHECK(trajectory_to_csv(back) == trajectory_to_csv(t));
  }
}

TEST_CASE("trajectory CSV rejects malformed input") {
  CHECK_THROWS_AS(trajectory_from_csv("nonsense\n", TrajectorySource::Lts, "test"), SchemaError);
  const std::string header = std::string(kTrajectoryCsvHeader) + "\n";
  CHECK_THROWS_AS(
      trajectory_from_csv(header + "0,1,2\n", TrajectorySource::Lts, "test"), SchemaError);
  CHECK_THROWS_AS(
      trajectory_from_csv(header + "0,1,2,,,0.5,,,\n", TrajectorySource::Lts, "test"),
      SchemaError);  // partial quaternion
  CHECK_THROWS_AS(
      trajectory_from_csv(header + "0,x,2,,,,,,\n", TrajectorySource::Lts, "test"), SchemaError);
  // Non-increasing timestamps violate the trajectory invariant.
  CHECK_THROWS_AS(trajectory_from_csv(header + "5,1,2,,,,,,\n4,1,2,,,,,,\n",
                                      TrajectorySource::Lts, "test"),
                  SchemaError);
}

TEST_CASE("test case YAML round trips through parse and re-serialize") {
  for (ScenarioKind kind :
       {ScenarioKind::StandardDynamic, ScenarioKind::StandardStatic, ScenarioKind::Repeatability,
        ScenarioKind::CoordinateAlignment}) {
    ScenarioParams p;
    p.area = {7.5, 6.25};
    p.n_eval_poses = 12;
    p.seed = 77;
    p.heading_tolerance_deg = 22.5;
    TestCase tc = build_scenario(kind, p);
    tc.reporting["operator"] = "test bench";
    tc.reporting["environment"] = "empty hall, \"basic\" configuration";
    const std::string once = to_yaml(tc);
    const TestCase back = test_case_from_yaml(YAML::Load(once), "roundtrip");
    CHECK(to_yaml(back) == once);
  }
}

TEST_CASE("error model YAML round trips, planar and spatial") {
  ErrorModel em;
  em.noise_sigma_mm = {106.8, 160.4, 0.0};
  em.bias_mm = {91.8, -21.1, 0.0};
  em.frame_error = RigidTransform::planar(30.0, 500.0, 200.0);
  em.latency_s = 0.15;
  em.update_rate_hz = 8.2;
  em.dropout_prob = 0.05;
  em.heading_noise_sigma_deg = 1.75;
  em.provides_heading = false;
  em.clock_offset_s = -0.2;
  em.seed = 424242;
  const std::string once = to_yaml(em);
  CHECK(to_yaml(error_model_from_yaml(YAML::Load(once), "roundtrip")) == once);

  em.frame_error = RigidTransform::spatial(
      Eigen::Quaterniond(Eigen::AngleAxisd(0.3, Eigen::Vector3d(0.1, 0.2, 0.97).normalized())),
      {1.0, 2.0, 3.0});
  const std::string spatial = to_yaml(em);
  CHECK(to_yaml(error_model_from_yaml(YAML::Load(spatial), "roundtrip")) == spatial);

  CHECK(hash_error_model(em).size() == 16);
  ErrorModel other = em;
  other.seed += 1;
  CHECK(hash_error_model(other) != hash_error_model(em));
}

TEST_CASE("performance results YAML round trips with every marker kind") {
  ScenarioParams p;
  p.area = {6.0, 6.0};
  p.n_eval_poses = 8;
  p.seed = 9;
  const TestCase tc = build_scenario(ScenarioKind::StandardStatic, p);
  ErrorModel em;
  em.update_rate_hz = 20.0;
  em.noise_sigma_mm = {12.0, 9.0, 0.0};
  em.seed = 3;
  const PerformanceResults res = evaluate_performance(run_experiment(tc, em), tc);
  const std::string once = to_yaml(res);
  const PerformanceResults back = performance_from_yaml(YAML::Load(once), "roundtrip");
  CHECK(to_yaml(back) == once);
  // Markers survive: no vertical output, single-visit repeatability.
  CHECK(once.find("absolute_vertical_error_mm: \"not_provided\"") != std::string::npos);
  CHECK(once.find("repeatability_mm: \"not_computable\"") != std::string::npos);
}

TEST_CASE("application profile YAML round trips") {
  ApplicationProfile profile;
  profile.name = "Goods Tracking";
  Requirement r;
  r.metric_id = MetricId::HorizontalAccuracy;
  r.quantile = 0.95;
  r.threshold = 1000.0;
  r.unit = "mm";
  r.direction = Direction::Max;
  r.obligation = Obligation::Must;
  profile.requirements.push_back(r);
  r = Requirement{};
  r.metric_id = MetricId::UpdateRate;
  r.threshold = 0.1;
  r.unit = "hz";
  r.direction = Direction::Min;
  r.obligation = Obligation::Shall;
  r.benefit_weight = 2.5;
  profile.requirements.push_back(r);

  const std::string once = to_yaml(profile);
  CHECK(to_yaml(profile_from_yaml(YAML::Load(once), "roundtrip")) == once);
}

TEST_CASE("evaluation results YAML round trips") {
  ApplicationProfile profile;
  profile.name = "demo";
  Requirement r;
  r.metric_id = MetricId::UpdateRate;
  r.threshold = 10.0;
  r.unit = "hz";
  r.direction = Direction::Min;
  r.benefit_weight = 1.0;
  profile.requirements.push_back(r);

  PerformanceResults fast;
  fast.horizontal_error_mm.stats.count = 100;
  UpdateRate ur;
  ur.hz = 20.0;
  fast.update_rate = ur;
  PerformanceResults slow = fast;
  slow.update_rate->hz = 5.0;

  std::vector<std::pair<std::string, PerformanceResults>> results{{"fast", fast},
                                                                  {"slow", slow}};
  EvaluationResults ev = match_requirements(profile, results);
  ev.benefit_ranking = benefit_analysis(ev);
  const std::string once = evaluations_to_yaml({ev});
  const auto back = evaluations_from_yaml(YAML::Load(once), "roundtrip");
  REQUIRE(back.size() == 1);
  CHECK(evaluations_to_yaml(back) == once);
}

TEST_CASE("experiment manifest YAML round trips") {
  ExperimentManifest m;
  m.test_case_id = "case-1";
  m.test_case_path = "test_case.yaml";
  m.gt_csv = "gt.csv";
  m.lts_csv = "lts.csv";
  m.seed = 99;
  m.error_model_hash = "abcdef0123456789";
  m.static_gate_log.push_back({0, true, 0.25});
  m.static_gate_log.push_back({1, false, std::nullopt});
  const std::string once = to_yaml(m);
  const ExperimentManifest back = experiment_manifest_from_yaml(YAML::Load(once), "roundtrip");
  CHECK(to_yaml(back) == once);
  REQUIRE(back.static_gate_log.size() == 2);
  CHECK(back.static_gate_log[1].accepted == false);
  CHECK_FALSE(back.static_gate_log[1].gt_speed_mm_s.has_value());
}

TEST_CASE("run manifest parses both modes and rejects neither") {
  const YAML::Node synthetic = YAML::Load(
      "test_case: tc.yaml\nerror_model: em.yaml\noutput_dir: out\nseed: 7\n"
      "quantiles: [0.5, 0.95]\nspeed_thresholds: {latency_mm_s: 300, dynamic_mm_s: 120}\n"
      "profiles: [p.yaml]\n");
  const RunManifest m = run_manifest_from_yaml(synthetic, "test");
  CHECK(m.error_model.has_value());
  CHECK(m.seed == 7);
  CHECK(m.quantiles.size() == 2);
  CHECK(*m.latency_speed_threshold_mm_s == 300.0);
  CHECK(m.profiles.size() == 1);

  const YAML::Node real = YAML::Load(
      "test_case: tc.yaml\ngt_csv: gt.csv\nlts_csv: lts.csv\noutput_dir: out\n");
  CHECK(run_manifest_from_yaml(real, "test").gt_csv.has_value());

  const YAML::Node neither = YAML::Load("test_case: tc.yaml\noutput_dir: out\n");
  CHECK_THROWS_AS(run_manifest_from_yaml(neither, "test"), SchemaError);
}

TEST_CASE("schema errors carry the offending path") {
  try {
    test_case_from_yaml(YAML::Load("id: \"x\"\n"), "somefile.yaml");
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("somefile.yaml") != std::string::npos);
  }
}

TEST_CASE("atomic writes leave no temp files behind") {
  const fs::path dir = scratch_dir();
  const fs::path path = dir / "atomic.yaml";
  write_file_atomic(path, "key: 1\n");
  CHECK(read_file(path) == "key: 1\n");
  write_file_atomic(path, "key: 2\n");
  CHECK(read_file(path) == "key: 2\n");
  CHECK_FALSE(fs::exists(path.string() + ".tmp"));
}

TEST_CASE("plot exports carry the expected columns") {
  ErrorSamples samples;
  ErrorSample e;
  e.t = Timestamp::from_seconds(1.0);
  e.signed_error_x_mm = 3.0;
  e.signed_error_y_mm = -4.0;
  e.horizontal_error_mm = 5.0;
  e.gt_speed_mm_s = 1400.0;
  e.gt_yaw_deg = 90.0;
  samples.push_back(e);
  const std::string scatter = error_scatter_csv(samples);
  CHECK(scatter.find("ex_mm,ey_mm,gt_yaw_deg") == 0);
  CHECK(scatter.find("3,-4,90") != std::string::npos);
  const std::string over_time = error_over_time_csv(samples);
  CHECK(over_time.find("t_s,horizontal_error_mm,gt_speed_mm_s") == 0);
  CHECK(over_time.find("0,5,1400") != std::string::npos);
}
