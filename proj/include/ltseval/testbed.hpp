#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "ltseval/alignment.hpp"
#include "ltseval/errors.hpp"
#include "ltseval/interpolation.hpp"
#include "ltseval/path.hpp"
#include "ltseval/rng.hpp"
#include "ltseval/scenario.hpp"
#include "ltseval/trajectory.hpp"
#include "ltseval/visits.hpp"

namespace ltseval {

// Parametric LTS error model. The stages compose in a fixed order so
// injected parameters stay individually recoverable:
//   delay -> frame error -> bias -> noise -> clock stamp.
struct ErrorModel {
  Eigen::Vector3d noise_sigma_mm = Eigen::Vector3d::Zero();
  Eigen::Vector3d bias_mm = Eigen::Vector3d::Zero();
  RigidTransform frame_error;  // miscalibration applied to LTS output
  double latency_s = 0.0;
  double update_rate_hz = 10.0;
  double dropout_prob = 0.0;
  double heading_noise_sigma_deg = 0.0;
  bool provides_vertical = false;
  bool provides_heading = true;
  double clock_offset_s = 0.0;
  std::uint64_t seed = 0;
};

inline void validate_error_model(const ErrorModel& em) {
  if (em.noise_sigma_mm.minCoeff() < 0.0)
    throw ParameterError("error model: noise sigmas must be >= 0");
  if (!(em.update_rate_hz > 0.0)) throw ParameterError("error model: update rate must be > 0");
  if (em.dropout_prob < 0.0 || em.dropout_prob > 1.0)
    throw ParameterError("error model: dropout_prob must be in [0, 1]");
  if (em.latency_s < 0.0) throw ParameterError("error model: latency must be >= 0");
  if (em.heading_noise_sigma_deg < 0.0)
    throw ParameterError("error model: heading noise sigma must be >= 0");
}

// FNV-1a over the canonical field listing; identifies the model in reports.
inline std::string hash_error_model(const ErrorModel& em) {
  std::string repr;
  auto add = [&](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    repr += buf;
    repr += ';';
  };
  add(em.noise_sigma_mm.x()); add(em.noise_sigma_mm.y()); add(em.noise_sigma_mm.z());
  add(em.bias_mm.x()); add(em.bias_mm.y()); add(em.bias_mm.z());
  repr += em.frame_error.mode == TransformMode::Planar2D ? "p;" : "s;";
  add(em.frame_error.yaw_deg);
  add(em.frame_error.rotation.w()); add(em.frame_error.rotation.x());
  add(em.frame_error.rotation.y()); add(em.frame_error.rotation.z());
  add(em.frame_error.translation_mm.x()); add(em.frame_error.translation_mm.y());
  add(em.frame_error.translation_mm.z());
  add(em.latency_s); add(em.update_rate_hz); add(em.dropout_prob);
  add(em.heading_noise_sigma_deg);
  repr += em.provides_vertical ? "1;" : "0;";
  repr += em.provides_heading ? "1;" : "0;";
  add(em.clock_offset_s);
  repr += std::to_string(em.seed);

  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : repr) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct StaticGateEntry {
  int eval_pose_id = 0;
  bool accepted = false;
  std::optional<double> gt_speed_mm_s;  // absent when the pose was never reached
};

struct ExperimentData {
  std::string test_case_id;
  std::uint64_t seed = 0;
  std::string error_model_hash;
  Trajectory gt;
  Trajectory lts;
  std::vector<StaticGateEntry> static_gate_log;
};

struct ExecutionOptions {
  double gt_rate_hz = 100.0;
  double dwell_s = 2.0;      // zero-speed dwell at static evaluation poses
  double ramp_time_s = 0.5;  // cruise-to-stop ramp duration
};

namespace detail {

struct MotionPhase {
  double t0_s = 0.0;
  double duration_s = 0.0;
  double s0_mm = 0.0;
  double v0_mm_s = 0.0;
  double a_mm_s2 = 0.0;
};

// Piecewise-constant-acceleration profile: cruise between stops, decelerate
// to a dwell at each stop, accelerate back out. Start and end run at cruise
// speed so a stop-free path takes exactly distance/speed.
inline std::vector<MotionPhase> build_motion_profile(double path_length_mm,
                                                     std::vector<double> stops_mm,
                                                     double cruise_mm_s, double dwell_s,
                                                     double ramp_time_s) {
  const double accel = cruise_mm_s / ramp_time_s;
  std::vector<MotionPhase> phases;
  double t = 0.0;

  auto add_phase = [&](double dur, double s0, double v0, double a) {
    if (dur <= 0.0) return;
    phases.push_back({t, dur, s0, v0, a});
    t += dur;
  };
  auto add_free_run = [&](double from_s, double to_s, double ve, double vx) {
    const double dist = to_s - from_s;
    if (dist <= 1e-9) return;
    double vp = std::min(cruise_mm_s, std::sqrt(accel * dist + 0.5 * (ve * ve + vx * vx)));
    vp = std::max(vp, std::max(ve, vx));
    const double d_acc = (vp * vp - ve * ve) / (2.0 * accel);
    const double d_dec = (vp * vp - vx * vx) / (2.0 * accel);
    add_phase((vp - ve) / accel, from_s, ve, accel);
    add_phase(std::max(0.0, dist - d_acc - d_dec) / vp, from_s + d_acc, vp, 0.0);
    add_phase((vp - vx) / accel, to_s - d_dec, vp, -accel);
  };

  std::sort(stops_mm.begin(), stops_mm.end());
  double cursor = 0.0;
  double entry_v = cruise_mm_s;
  for (double stop : stops_mm) {
    add_free_run(cursor, stop, entry_v, 0.0);
    add_phase(dwell_s, stop, 0.0, 0.0);
    cursor = stop;
    entry_v = 0.0;
  }
  add_free_run(cursor, path_length_mm, entry_v, cruise_mm_s);
  return phases;
}

}  // namespace detail

// Synthesizes the noise-free GT stream for a test case: constant-speed
// traversal of the waypoint polyline at the scenario's nominal speed,
// sampled at gt_rate_hz, heading tangent to the path, with a dwell at every
// evaluation pose that requires a static measurement. The final sample is
// pinned to the exact end of the motion so the full path is covered.
inline Trajectory generate_gt(const TestCase& tc, double gt_rate_hz,
                              [[maybe_unused]] std::uint64_t seed,
                              const ExecutionOptions& opts = {}) {
  if (gt_rate_hz < 50.0) throw ParameterError("generate_gt: gt_rate_hz must be >= 50");
  if (tc.waypoints.size() < 2) throw ParameterError("generate_gt: need >= 2 waypoints");

  std::vector<Eigen::Vector2d> pts;
  pts.reserve(tc.waypoints.size());
  for (const Pose& w : tc.waypoints) pts.emplace_back(w.x_mm, w.y_mm);
  Polyline path(std::move(pts));
  if (path.length() <= 0.0)
    throw DegenerateGeometryError("generate_gt: degenerate path, all waypoints coincide");

  std::vector<double> stops;
  for (const EvaluationPose& ep : tc.eval_poses) {
    if (!ep.required_static) continue;
    for (double s : path.approaches({ep.target.x_mm, ep.target.y_mm}, ep.position_tolerance_mm))
      stops.push_back(s);
  }
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end(),
                          [](double a, double b) { return b - a < 1.0; }),
              stops.end());

  const double dwell_s = std::max(2.0, opts.dwell_s);
  const auto phases = detail::build_motion_profile(path.length(), stops,
                                                   tc.conditions.nominal_speed_mm_s, dwell_s,
                                                   opts.ramp_time_s);
  const double total_s =
      phases.empty() ? 0.0 : phases.back().t0_s + phases.back().duration_s;
  const std::int64_t total_ns = to_nanoseconds(total_s);

  Trajectory gt;
  gt.source = TrajectorySource::GroundTruth;
  gt.capabilities = {false, true, false};

  std::size_t phase_idx = 0;
  auto sample_at = [&](std::int64_t t_ns) {
    const double t_s = to_seconds(t_ns);
    while (phase_idx + 1 < phases.size() &&
           t_s >= phases[phase_idx].t0_s + phases[phase_idx].duration_s)
      ++phase_idx;
    const detail::MotionPhase& ph = phases[phase_idx];
    const double tau = std::clamp(t_s - ph.t0_s, 0.0, ph.duration_s);
    const double s =
        std::clamp(ph.s0_mm + ph.v0_mm_s * tau + 0.5 * ph.a_mm_s2 * tau * tau, 0.0, path.length());
    Pose p;
    p.t = Timestamp{t_ns};
    const Eigen::Vector2d pos = path.point_at(s);
    p.x_mm = pos.x();
    p.y_mm = pos.y();
    p.yaw_deg = path.heading_at(s);
    return p;
  };

  const double period_ns = 1e9 / gt_rate_hz;
  for (std::int64_t k = 0;; ++k) {
    const std::int64_t t_ns = static_cast<std::int64_t>(std::llround(k * period_ns));
    if (t_ns > total_ns) break;
    gt.samples.push_back(sample_at(t_ns));
  }
  if (gt.samples.size() < 2 || gt.samples.back().t.ns < total_ns)
    gt.samples.push_back(sample_at(total_ns));
  gt.validate();
  return gt;
}

// Simulates the LTS measurement stream from the GT under the error model.
// Emissions are scheduled at the model's update period over the GT span;
// each one applies the stage chain to the GT pose delayed by the latency,
// then stamps the result with the clock offset. The draw order per emission
// is pinned (noise x, y, z, heading, then the dropout uniform) so a seed
// reproduces the stream bit for bit.
inline Trajectory simulate_lts(const Trajectory& gt, const ErrorModel& em) {
  validate_error_model(em);
  if (gt.size() < 2) throw ParameterError("simulate_lts: GT needs >= 2 samples");

  const std::int64_t latency_ns = to_nanoseconds(em.latency_s);
  const std::int64_t clock_ns = to_nanoseconds(em.clock_offset_s);
  const double period_ns = 1e9 / em.update_rate_hz;

  Trajectory lts;
  lts.source = TrajectorySource::Lts;
  lts.capabilities.has_vertical = em.provides_vertical && gt.capabilities.has_vertical;
  lts.capabilities.has_heading = em.provides_heading && gt.capabilities.has_heading;

  SeededRng rng(em.seed);
  const double frame_yaw = em.frame_error.rotation_yaw_deg();
  for (std::int64_t k = 0;; ++k) {
    const std::int64_t t_ns =
        gt.start_time().ns + static_cast<std::int64_t>(std::llround(k * period_ns));
    if (t_ns > gt.end_time().ns) break;
    if (t_ns - latency_ns < gt.start_time().ns) continue;  // content not yet observable

    const double gx = rng.gauss();
    const double gy = rng.gauss();
    const double gz = rng.gauss();
    const double gyaw = rng.gauss();
    const double drop = rng.uniform01();
    if (drop < em.dropout_prob) continue;

    const Pose content = interpolate_pose(gt, Timestamp{t_ns - latency_ns});
    Eigen::Vector3d p = em.frame_error.apply(content.position()) + em.bias_mm;
    p.x() += em.noise_sigma_mm.x() * gx;
    p.y() += em.noise_sigma_mm.y() * gy;
    p.z() += em.noise_sigma_mm.z() * gz;

    Pose out;
    out.t = Timestamp{t_ns + clock_ns};
    out.x_mm = p.x();
    out.y_mm = p.y();
    if (lts.capabilities.has_vertical) out.z_mm = p.z();
    if (lts.capabilities.has_heading)
      out.yaw_deg =
          wrap_deg_360(wrap_deg_360(*content.yaw_deg + frame_yaw) + em.heading_noise_sigma_deg * gyaw);
    lts.samples.push_back(out);
  }
  if (lts.samples.empty())
    throw InsufficientDataError("simulate_lts: latency spans the whole GT, no emittable samples");
  lts.validate();
  return lts;
}

// Runs the full synthetic experiment: GT generation, LTS simulation, and the
// static-measurement gate log for poses that require standing still.
// Deterministic for a fixed (test case, error model) pair.
inline ExperimentData run_experiment(const TestCase& tc, const ErrorModel& em,
                                     const ExecutionOptions& opts = {}) {
  const ValidationReport report = validate_test_case(tc);
  if (!report.ok())
    throw ParameterError("run_experiment: test case invalid: " + report.errors.front());

  ExperimentData data;
  data.test_case_id = tc.id;
  data.seed = em.seed;
  data.error_model_hash = hash_error_model(em);
  data.gt = generate_gt(tc, opts.gt_rate_hz, em.seed, opts);
  data.lts = simulate_lts(data.gt, em);

  for (const EvaluationPose& ep : tc.eval_poses) {
    if (!ep.required_static) continue;
    EvaluationPose ungated = ep;
    ungated.required_static = false;
    const auto reached = find_visits(data.gt, {ungated});
    StaticGateEntry entry;
    entry.eval_pose_id = ep.id;
    if (reached.empty()) {
      data.static_gate_log.push_back(entry);
      continue;
    }
    const auto gated = find_visits(data.gt, {ep});
    entry.accepted = !gated.empty() && gated.size() == reached.size();
    entry.gt_speed_mm_s =
        (gated.empty() ? reached : gated).front().gt_speed_mm_s;
    data.static_gate_log.push_back(entry);
  }
  return data;
}

}  // namespace ltseval
