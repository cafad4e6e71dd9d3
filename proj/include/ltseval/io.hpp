#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "ltseval/errors.hpp"
#include "ltseval/metrics.hpp"
#include "ltseval/requirements.hpp"
#include "ltseval/scenario.hpp"
#include "ltseval/testbed.hpp"
#include "ltseval/trajectory.hpp"

// File formats. YAML documents are emitted by hand so every number is the
// shortest string that parses back to the identical double; yaml-cpp does
// the parsing. Trajectories travel as CSV.

namespace ltseval {

namespace yamlfmt {

inline std::string d(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string i(long long v) { return std::to_string(v); }
inline std::string u(unsigned long long v) { return std::to_string(v); }
inline std::string b(bool v) { return v ? "true" : "false"; }

inline std::string q(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

}  // namespace yamlfmt

// ---------------------------------------------------------------------------
// Filesystem

// Writes via a temp file in the same directory plus rename, so readers never
// observe a half-written document.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp.string());
    out << contents;
    if (!out.flush()) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("rename failed: " + tmp.string() + " -> " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Trajectory CSV

inline constexpr const char* kTrajectoryCsvHeader = "t_ns,x_mm,y_mm,z_mm,yaw_deg,qw,qx,qy,qz";

inline std::string trajectory_to_csv(const Trajectory& traj) {
  std::string out = kTrajectoryCsvHeader;
  out += '\n';
  auto cell = [](const std::optional<double>& v) { return v ? yamlfmt::d(*v) : std::string(); };
  for (const Pose& p : traj.samples) {
    out += yamlfmt::i(p.t.ns);
    out += ',';
    out += yamlfmt::d(p.x_mm);
    out += ',';
    out += yamlfmt::d(p.y_mm);
    out += ',';
    out += cell(p.z_mm);
    out += ',';
    out += cell(p.yaw_deg);
    if (p.orientation) {
      const Eigen::Quaterniond& q = *p.orientation;
      out += ',' + yamlfmt::d(q.w()) + ',' + yamlfmt::d(q.x()) + ',' + yamlfmt::d(q.y()) + ',' +
             yamlfmt::d(q.z());
    } else {
      out += ",,,,";
    }
    out += '\n';
  }
  return out;
}

inline void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  write_file_atomic(path, trajectory_to_csv(traj));
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

inline double parse_double(const std::string& s, const std::string& context) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw SchemaError(context + ": not a number: '" + s + "'");
  return v;
}

inline std::int64_t parse_int(const std::string& s, const std::string& context) {
  std::int64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw SchemaError(context + ": not an integer: '" + s + "'");
  return v;
}

}  // namespace detail

inline Trajectory trajectory_from_csv(const std::string& text, TrajectorySource source,
                                      const std::string& context) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw SchemaError(context + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTrajectoryCsvHeader)
    throw SchemaError(context + ": bad header, expected '" + kTrajectoryCsvHeader + "'");

  Trajectory traj;
  traj.source = source;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    const std::string where = context + " row " + std::to_string(row);
    if (fields.size() != 9) throw SchemaError(where + ": expected 9 columns");
    Pose p;
    p.t.ns = detail::parse_int(fields[0], where);
    p.x_mm = detail::parse_double(fields[1], where);
    p.y_mm = detail::parse_double(fields[2], where);
    if (!fields[3].empty()) p.z_mm = detail::parse_double(fields[3], where);
    if (!fields[4].empty()) p.yaw_deg = detail::parse_double(fields[4], where);
    const bool any_q = !fields[5].empty() || !fields[6].empty() || !fields[7].empty() ||
                       !fields[8].empty();
    if (any_q) {
      if (fields[5].empty() || fields[6].empty() || fields[7].empty() || fields[8].empty())
        throw SchemaError(where + ": partial quaternion");
      p.orientation = Eigen::Quaterniond(
          detail::parse_double(fields[5], where), detail::parse_double(fields[6], where),
          detail::parse_double(fields[7], where), detail::parse_double(fields[8], where));
    }
    traj.samples.push_back(p);
  }
  if (!traj.samples.empty()) {
    traj.capabilities.has_vertical = traj.samples.front().z_mm.has_value();
    traj.capabilities.has_heading = traj.samples.front().yaw_deg.has_value();
    traj.capabilities.has_orientation3d = traj.samples.front().orientation.has_value();
  }
  try {
    traj.validate();
  } catch (const ParameterError& e) {
    throw SchemaError(context + ": " + e.what());
  }
  return traj;
}

inline Trajectory read_trajectory_csv(const std::filesystem::path& path, TrajectorySource source) {
  return trajectory_from_csv(read_file(path), source, path.string());
}

// ---------------------------------------------------------------------------
// YAML parsing helpers

inline YAML::Node load_yaml(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("no such file: " + path.string());
  try {
    return YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

namespace detail {

template <typename T>
T require(const YAML::Node& node, const char* key, const std::string& context) {
  const YAML::Node v = node[key];
  if (!v) throw SchemaError(context + ": missing key '" + key + "'");
  try {
    return v.as<T>();
  } catch (const YAML::Exception&) {
    throw SchemaError(context + ": bad value for '" + key + "'");
  }
}

template <typename T>
std::optional<T> optional_key(const YAML::Node& node, const char* key,
                              const std::string& context) {
  const YAML::Node v = node[key];
  if (!v || v.IsNull()) return std::nullopt;
  try {
    return v.as<T>();
  } catch (const YAML::Exception&) {
    throw SchemaError(context + ": bad value for '" + key + "'");
  }
}

inline Eigen::Vector3d require_vec3(const YAML::Node& node, const char* key,
                                    const std::string& context) {
  const YAML::Node v = node[key];
  if (!v || !v.IsSequence() || v.size() != 3)
    throw SchemaError(context + ": '" + key + "' must be a 3-element list");
  return {v[0].as<double>(), v[1].as<double>(), v[2].as<double>()};
}

inline std::string vec3_yaml(const Eigen::Vector3d& v) {
  return "[" + yamlfmt::d(v.x()) + ", " + yamlfmt::d(v.y()) + ", " + yamlfmt::d(v.z()) + "]";
}

}  // namespace detail

// ---------------------------------------------------------------------------
// RigidTransform (embedded in error models and alignment reports)

inline void append_transform_yaml(std::string& out, const RigidTransform& xf,
                                  const std::string& indent) {
  out += indent + "mode: " + (xf.mode == TransformMode::Planar2D ? "\"planar2d\"" : "\"spatial3d\"") + "\n";
  if (xf.mode == TransformMode::Planar2D) {
    out += indent + "yaw_deg: " + yamlfmt::d(xf.yaw_deg) + "\n";
  } else {
    out += indent + "quaternion: [" + yamlfmt::d(xf.rotation.w()) + ", " +
           yamlfmt::d(xf.rotation.x()) + ", " + yamlfmt::d(xf.rotation.y()) + ", " +
           yamlfmt::d(xf.rotation.z()) + "]\n";
  }
  out += indent + "translation_mm: " + detail::vec3_yaml(xf.translation_mm) + "\n";
}

inline RigidTransform transform_from_yaml(const YAML::Node& node, const std::string& context) {
  const std::string mode = detail::require<std::string>(node, "mode", context);
  RigidTransform xf;
  if (mode == "planar2d") {
    const auto t = detail::require_vec3(node, "translation_mm", context);
    xf = RigidTransform::planar(detail::require<double>(node, "yaw_deg", context), t.x(), t.y());
    xf.translation_mm.z() = t.z();
  } else if (mode == "spatial3d") {
    const YAML::Node q = node["quaternion"];
    if (!q || !q.IsSequence() || q.size() != 4)
      throw SchemaError(context + ": 'quaternion' must be a 4-element [w, x, y, z] list");
    xf = RigidTransform::spatial(
        Eigen::Quaterniond(q[0].as<double>(), q[1].as<double>(), q[2].as<double>(),
                           q[3].as<double>()),
        detail::require_vec3(node, "translation_mm", context));
  } else {
    throw SchemaError(context + ": unknown transform mode '" + mode + "'");
  }
  return xf;
}

// ---------------------------------------------------------------------------
// TestCase

inline std::string pose_map_yaml(const Pose& p, bool with_time) {
  std::string out = "{";
  if (with_time && p.t.ns != 0) out += "t_ns: " + yamlfmt::i(p.t.ns) + ", ";
  out += "x_mm: " + yamlfmt::d(p.x_mm) + ", y_mm: " + yamlfmt::d(p.y_mm);
  if (p.z_mm) out += ", z_mm: " + yamlfmt::d(*p.z_mm);
  if (p.yaw_deg) out += ", yaw_deg: " + yamlfmt::d(*p.yaw_deg);
  out += "}";
  return out;
}

inline Pose pose_from_yaml(const YAML::Node& node, const std::string& context) {
  Pose p;
  if (const auto t = detail::optional_key<std::int64_t>(node, "t_ns", context)) p.t.ns = *t;
  p.x_mm = detail::require<double>(node, "x_mm", context);
  p.y_mm = detail::require<double>(node, "y_mm", context);
  p.z_mm = detail::optional_key<double>(node, "z_mm", context);
  p.yaw_deg = detail::optional_key<double>(node, "yaw_deg", context);
  return p;
}

inline std::string to_yaml(const TestCase& tc) {
  using namespace yamlfmt;
  std::string out;
  out += "id: " + q(tc.id) + "\n";
  out += "scenario_kind: " + q(to_string(tc.scenario_kind)) + "\n";
  out += "area:\n";
  out += "  width_m: " + d(tc.area.width_m) + "\n";
  out += "  depth_m: " + d(tc.area.depth_m) + "\n";
  out += "gt_accuracy_mm: " + d(tc.gt_accuracy_mm) + "\n";
  out += "conditions:\n";
  out += "  nominal_speed_mm_s: " + d(tc.conditions.nominal_speed_mm_s) + "\n";
  out += "  max_match_gap_s: " + d(tc.conditions.max_match_gap_s) + "\n";
  if (tc.conditions.static_speed_threshold_mm_s)
    out += "  static_speed_threshold_mm_s: " + d(*tc.conditions.static_speed_threshold_mm_s) + "\n";
  if (tc.conditions.min_repeat_visits)
    out += "  min_repeat_visits: " + i(*tc.conditions.min_repeat_visits) + "\n";
  out += "reporting:";
  out += tc.reporting.empty() ? " {}\n" : "\n";
  for (const auto& [key, value] : tc.reporting) out += "  " + q(key) + ": " + q(value) + "\n";
  out += "waypoints:\n";
  for (const Pose& w : tc.waypoints) out += "  - " + pose_map_yaml(w, true) + "\n";
  out += "eval_poses:\n";
  for (const EvaluationPose& ep : tc.eval_poses) {
    out += "  - {id: " + i(ep.id);
    out += ", x_mm: " + d(ep.target.x_mm) + ", y_mm: " + d(ep.target.y_mm);
    if (ep.target.z_mm) out += ", z_mm: " + d(*ep.target.z_mm);
    if (ep.target.yaw_deg) out += ", yaw_deg: " + d(*ep.target.yaw_deg);
    out += ", position_tolerance_mm: " + d(ep.position_tolerance_mm);
    if (ep.heading_tolerance_deg) out += ", heading_tolerance_deg: " + d(*ep.heading_tolerance_deg);
    out += ", required_static: " + b(ep.required_static);
    if (ep.static_speed_threshold_mm_s)
      out += ", static_speed_threshold_mm_s: " + d(*ep.static_speed_threshold_mm_s);
    out += "}\n";
  }
  return out;
}

inline TestCase test_case_from_yaml(const YAML::Node& root, const std::string& context) {
  TestCase tc;
  tc.id = detail::require<std::string>(root, "id", context);
  const std::string kind = detail::require<std::string>(root, "scenario_kind", context);
  const auto parsed = scenario_kind_from_string(kind);
  if (!parsed) throw SchemaError(context + ": unknown scenario_kind '" + kind + "'");
  tc.scenario_kind = *parsed;

  const YAML::Node area = root["area"];
  if (!area) throw SchemaError(context + ": missing key 'area'");
  tc.area.width_m = detail::require<double>(area, "width_m", context + ".area");
  tc.area.depth_m = detail::require<double>(area, "depth_m", context + ".area");
  tc.gt_accuracy_mm = detail::require<double>(root, "gt_accuracy_mm", context);

  const YAML::Node cond = root["conditions"];
  if (!cond) throw SchemaError(context + ": missing key 'conditions'");
  tc.conditions.nominal_speed_mm_s =
      detail::require<double>(cond, "nominal_speed_mm_s", context + ".conditions");
  tc.conditions.max_match_gap_s =
      detail::require<double>(cond, "max_match_gap_s", context + ".conditions");
  tc.conditions.static_speed_threshold_mm_s =
      detail::optional_key<double>(cond, "static_speed_threshold_mm_s", context + ".conditions");
  tc.conditions.min_repeat_visits =
      detail::optional_key<int>(cond, "min_repeat_visits", context + ".conditions");

  if (const YAML::Node rep = root["reporting"]; rep && rep.IsMap())
    for (const auto& kv : rep)
      tc.reporting[kv.first.as<std::string>()] = kv.second.as<std::string>();

  const YAML::Node wps = root["waypoints"];
  if (!wps || !wps.IsSequence()) throw SchemaError(context + ": 'waypoints' must be a list");
  for (std::size_t i = 0; i < wps.size(); ++i)
    tc.waypoints.push_back(pose_from_yaml(wps[i], context + ".waypoints[" + std::to_string(i) + "]"));

  const YAML::Node eps = root["eval_poses"];
  if (!eps || !eps.IsSequence()) throw SchemaError(context + ": 'eval_poses' must be a list");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const std::string where = context + ".eval_poses[" + std::to_string(i) + "]";
    const YAML::Node n = eps[i];
    EvaluationPose ep;
    ep.id = detail::require<int>(n, "id", where);
    ep.target = pose_from_yaml(n, where);
    ep.position_tolerance_mm = detail::require<double>(n, "position_tolerance_mm", where);
    ep.heading_tolerance_deg = detail::optional_key<double>(n, "heading_tolerance_deg", where);
    ep.required_static = detail::optional_key<bool>(n, "required_static", where).value_or(false);
    ep.static_speed_threshold_mm_s =
        detail::optional_key<double>(n, "static_speed_threshold_mm_s", where);
    tc.eval_poses.push_back(ep);
  }
  return tc;
}

inline void write_test_case(const std::filesystem::path& path, const TestCase& tc) {
  write_file_atomic(path, to_yaml(tc));
}

inline TestCase read_test_case(const std::filesystem::path& path) {
  return test_case_from_yaml(load_yaml(path), path.string());
}

// ---------------------------------------------------------------------------
// ErrorModel

inline std::string to_yaml(const ErrorModel& em) {
  using namespace yamlfmt;
  std::string out;
  out += "noise_sigma_mm: " + detail::vec3_yaml(em.noise_sigma_mm) + "\n";
  out += "bias_mm: " + detail::vec3_yaml(em.bias_mm) + "\n";
  out += "frame_error:\n";
  append_transform_yaml(out, em.frame_error, "  ");
  out += "latency_s: " + d(em.latency_s) + "\n";
  out += "update_rate_hz: " + d(em.update_rate_hz) + "\n";
  out += "dropout_prob: " + d(em.dropout_prob) + "\n";
  out += "heading_noise_sigma_deg: " + d(em.heading_noise_sigma_deg) + "\n";
  out += "provides_vertical: " + b(em.provides_vertical) + "\n";
  out += "provides_heading: " + b(em.provides_heading) + "\n";
  out += "clock_offset_s: " + d(em.clock_offset_s) + "\n";
  out += "seed: " + u(em.seed) + "\n";
  return out;
}

inline ErrorModel error_model_from_yaml(const YAML::Node& root, const std::string& context) {
  ErrorModel em;
  em.noise_sigma_mm = detail::require_vec3(root, "noise_sigma_mm", context);
  em.bias_mm = detail::require_vec3(root, "bias_mm", context);
  if (const YAML::Node fe = root["frame_error"])
    em.frame_error = transform_from_yaml(fe, context + ".frame_error");
  em.latency_s = detail::require<double>(root, "latency_s", context);
  em.update_rate_hz = detail::require<double>(root, "update_rate_hz", context);
  em.dropout_prob = detail::require<double>(root, "dropout_prob", context);
  em.heading_noise_sigma_deg =
      detail::optional_key<double>(root, "heading_noise_sigma_deg", context).value_or(0.0);
  em.provides_vertical =
      detail::optional_key<bool>(root, "provides_vertical", context).value_or(false);
  em.provides_heading =
      detail::optional_key<bool>(root, "provides_heading", context).value_or(true);
  em.clock_offset_s = detail::require<double>(root, "clock_offset_s", context);
  em.seed = detail::optional_key<std::uint64_t>(root, "seed", context).value_or(0);
  validate_error_model(em);
  return em;
}

inline void write_error_model(const std::filesystem::path& path, const ErrorModel& em) {
  write_file_atomic(path, to_yaml(em));
}

inline ErrorModel read_error_model(const std::filesystem::path& path) {
  return error_model_from_yaml(load_yaml(path), path.string());
}

// ---------------------------------------------------------------------------
// PerformanceResults

namespace detail {

inline void append_distribution_yaml(std::string& out, const char* key,
                                     const std::optional<DistributionStats>& dist) {
  using namespace yamlfmt;
  if (!dist) {
    out += std::string(key) + ": \"not_provided\"\n";
    return;
  }
  out += std::string(key) + ":\n";
  out += "  mean: " + d(dist->stats.mean) + "\n";
  out += "  std: " + d(dist->stats.stddev) + "\n";
  out += "  count: " + u(dist->stats.count) + "\n";
  out += "  quantiles:";
  out += dist->quantiles.empty() ? " {}\n" : "\n";
  for (const auto& [qv, value] : dist->quantiles)
    out += "    " + q(d(qv)) + ": " + (value ? d(*value) : std::string("\"insufficient_samples\"")) +
           "\n";
}

inline void append_basic_yaml(std::string& out, const char* key,
                              const std::optional<BasicStats>& st) {
  using namespace yamlfmt;
  if (!st) {
    out += std::string(key) + ": \"not_provided\"\n";
    return;
  }
  out += std::string(key) + ": {mean: " + d(st->mean) + ", std: " + d(st->stddev) +
         ", count: " + u(st->count) + "}\n";
}

inline std::optional<DistributionStats> distribution_from_yaml(const YAML::Node& node,
                                                               const std::string& context) {
  if (!node || (node.IsScalar() && node.as<std::string>() == "not_provided")) return std::nullopt;
  DistributionStats dist;
  dist.stats.mean = require<double>(node, "mean", context);
  dist.stats.stddev = require<double>(node, "std", context);
  dist.stats.count = require<std::size_t>(node, "count", context);
  if (const YAML::Node qs = node["quantiles"]; qs && qs.IsMap()) {
    for (const auto& kv : qs) {
      const std::string key = kv.first.as<std::string>();
      const double q = parse_double(key, context + ".quantiles");
      if (kv.second.IsScalar() && kv.second.as<std::string>() == "insufficient_samples")
        dist.quantiles[q] = std::nullopt;
      else
        dist.quantiles[q] = kv.second.as<double>();
    }
  }
  return dist;
}

inline std::optional<BasicStats> basic_from_yaml(const YAML::Node& node,
                                                 const std::string& context) {
  if (!node || (node.IsScalar() && node.as<std::string>() == "not_provided")) return std::nullopt;
  BasicStats st;
  st.mean = require<double>(node, "mean", context);
  st.stddev = require<double>(node, "std", context);
  st.count = require<std::size_t>(node, "count", context);
  return st;
}

}  // namespace detail

inline std::string to_yaml(const PerformanceResults& res) {
  using namespace yamlfmt;
  std::string out;
  out += "test_case_id: " + q(res.test_case_id) + "\n";
  out += "seed: " + u(res.seed) + "\n";
  out += "error_model_hash: " + q(res.error_model_hash) + "\n";
  out += "matched_sample_count: " + u(res.matched_sample_count) + "\n";
  out += "missed_visit_count: " + u(res.missed_visit_count) + "\n";
  detail::append_distribution_yaml(out, "absolute_horizontal_error_mm", res.horizontal_error_mm);
  detail::append_distribution_yaml(out, "absolute_vertical_error_mm", res.vertical_error_mm);
  detail::append_distribution_yaml(out, "absolute_orientation_error_deg",
                                   res.abs_orientation_error_deg);
  detail::append_basic_yaml(out, "mean_orientation_error_deg", res.signed_orientation_error_deg);
  detail::append_basic_yaml(out, "mean_position_error_x_mm", res.signed_error_x_mm);
  detail::append_basic_yaml(out, "mean_position_error_y_mm", res.signed_error_y_mm);
  detail::append_basic_yaml(out, "mean_position_error_z_mm", res.signed_error_z_mm);
  out += "system_latency_ms: " + (res.latency_ms ? d(*res.latency_ms) : std::string("\"not_computable\"")) + "\n";
  out += "latency_sample_count: " + u(res.latency_sample_count) + "\n";
  if (res.update_rate) {
    out += "update_rate_hz:\n";
    out += "  value: " + d(res.update_rate->hz) + "\n";
    out += "  max_gap_s: " + d(res.update_rate->max_gap_s) + "\n";
  } else {
    out += "update_rate_hz: \"not_computable\"\n";
  }
  if (res.repeatability) {
    out += "repeatability_mm:\n";
    out += "  aggregate: " + d(res.repeatability->aggregate_mm) + "\n";
    out += "  poses_excluded: " + u(res.repeatability->poses_excluded) + "\n";
    out += "  per_pose:\n";
    for (const auto& [id, spread] : res.repeatability->per_pose_spread_mm)
      out += "    - {eval_pose_id: " + i(id) + ", spread_mm: " + d(spread) + "}\n";
  } else {
    out += "repeatability_mm: \"not_computable\"\n";
  }
  if (res.drift) {
    out += "drift_mm_per_s: {slope: " + d(res.drift->slope_mm_per_s) +
           ", intercept_mm: " + d(res.drift->intercept_mm) +
           ", r_squared: " + d(res.drift->r_squared) + "}\n";
  } else {
    out += "drift_mm_per_s: \"not_computable\"\n";
  }
  out += "clock_offset_ms: " +
         (res.clock_offset_ms ? d(*res.clock_offset_ms) : std::string("\"not_computable\"")) + "\n";
  if (res.alignment) {
    out += "alignment:\n";
    out += "  transform:\n";
    append_transform_yaml(out, res.alignment->transform, "    ");
    out += "  rms_residual_mm: " + d(res.alignment->rms_residual_mm) + "\n";
    out += "  n_pairs: " + u(res.alignment->n_pairs) + "\n";
    out += "  per_pair_residuals_mm: [";
    for (std::size_t i = 0; i < res.alignment->per_pair_residuals_mm.size(); ++i)
      out += (i ? ", " : "") + d(res.alignment->per_pair_residuals_mm[i]);
    out += "]\n";
  }
  out += "notes:";
  out += res.notes.empty() ? " []\n" : "\n";
  for (const std::string& note : res.notes) out += "  - " + q(note) + "\n";
  return out;
}

inline PerformanceResults performance_from_yaml(const YAML::Node& root,
                                                const std::string& context) {
  PerformanceResults res;
  res.test_case_id = detail::optional_key<std::string>(root, "test_case_id", context).value_or("");
  res.seed = detail::optional_key<std::uint64_t>(root, "seed", context).value_or(0);
  res.error_model_hash =
      detail::optional_key<std::string>(root, "error_model_hash", context).value_or("");
  res.matched_sample_count =
      detail::optional_key<std::size_t>(root, "matched_sample_count", context).value_or(0);
  res.missed_visit_count =
      detail::optional_key<std::size_t>(root, "missed_visit_count", context).value_or(0);

  const auto horizontal = detail::distribution_from_yaml(root["absolute_horizontal_error_mm"],
                                                         context + ".absolute_horizontal_error_mm");
  if (!horizontal) throw SchemaError(context + ": absolute_horizontal_error_mm is mandatory");
  res.horizontal_error_mm = *horizontal;
  res.vertical_error_mm = detail::distribution_from_yaml(root["absolute_vertical_error_mm"],
                                                         context + ".absolute_vertical_error_mm");
  res.abs_orientation_error_deg = detail::distribution_from_yaml(
      root["absolute_orientation_error_deg"], context + ".absolute_orientation_error_deg");
  res.signed_orientation_error_deg =
      detail::basic_from_yaml(root["mean_orientation_error_deg"], context);
  if (const auto st = detail::basic_from_yaml(root["mean_position_error_x_mm"], context))
    res.signed_error_x_mm = *st;
  if (const auto st = detail::basic_from_yaml(root["mean_position_error_y_mm"], context))
    res.signed_error_y_mm = *st;
  res.signed_error_z_mm = detail::basic_from_yaml(root["mean_position_error_z_mm"], context);

  const YAML::Node lat = root["system_latency_ms"];
  if (lat && !(lat.IsScalar() && lat.as<std::string>() == "not_computable"))
    res.latency_ms = lat.as<double>();
  res.latency_sample_count =
      detail::optional_key<std::size_t>(root, "latency_sample_count", context).value_or(0);

  const YAML::Node ur = root["update_rate_hz"];
  if (ur && ur.IsMap()) {
    UpdateRate r;
    r.hz = detail::require<double>(ur, "value", context + ".update_rate_hz");
    r.max_gap_s = detail::optional_key<double>(ur, "max_gap_s", context).value_or(0.0);
    res.update_rate = r;
  } else if (ur && ur.IsScalar() && ur.as<std::string>() != "not_computable") {
    UpdateRate r;
    r.hz = ur.as<double>();  // fixtures may state the rate as a bare scalar
    res.update_rate = r;
  }

  const YAML::Node rep = root["repeatability_mm"];
  if (rep && rep.IsMap()) {
    RepeatabilityResult r;
    r.aggregate_mm = detail::require<double>(rep, "aggregate", context + ".repeatability_mm");
    r.poses_excluded =
        detail::optional_key<std::size_t>(rep, "poses_excluded", context).value_or(0);
    if (const YAML::Node pp = rep["per_pose"]; pp && pp.IsSequence())
      for (const auto& item : pp)
        r.per_pose_spread_mm[item["eval_pose_id"].as<int>()] = item["spread_mm"].as<double>();
    res.repeatability = r;
  }

  const YAML::Node drift = root["drift_mm_per_s"];
  if (drift && drift.IsMap()) {
    DriftResult d;
    d.slope_mm_per_s = detail::require<double>(drift, "slope", context + ".drift_mm_per_s");
    d.intercept_mm = detail::optional_key<double>(drift, "intercept_mm", context).value_or(0.0);
    d.r_squared = detail::optional_key<double>(drift, "r_squared", context).value_or(0.0);
    res.drift = d;
  }

  const YAML::Node off = root["clock_offset_ms"];
  if (off && !(off.IsScalar() && off.as<std::string>() == "not_computable"))
    res.clock_offset_ms = off.as<double>();

  if (const YAML::Node al = root["alignment"]; al && al.IsMap()) {
    AlignmentReport rep;
    const YAML::Node xf = al["transform"];
    if (!xf) throw SchemaError(context + ".alignment: missing 'transform'");
    rep.transform = transform_from_yaml(xf, context + ".alignment.transform");
    rep.rms_residual_mm = detail::require<double>(al, "rms_residual_mm", context + ".alignment");
    rep.n_pairs = detail::require<std::size_t>(al, "n_pairs", context + ".alignment");
    if (const YAML::Node rr = al["per_pair_residuals_mm"]; rr && rr.IsSequence())
      for (const auto& v : rr) rep.per_pair_residuals_mm.push_back(v.as<double>());
    res.alignment = rep;
  }

  if (const YAML::Node notes = root["notes"]; notes && notes.IsSequence())
    for (const auto& n : notes) res.notes.push_back(n.as<std::string>());
  return res;
}

inline void write_performance_results(const std::filesystem::path& path,
                                      const PerformanceResults& res) {
  write_file_atomic(path, to_yaml(res));
}

inline PerformanceResults read_performance_results(const std::filesystem::path& path) {
  return performance_from_yaml(load_yaml(path), path.string());
}

// ---------------------------------------------------------------------------
// ApplicationProfile

inline std::string to_yaml(const ApplicationProfile& profile) {
  using namespace yamlfmt;
  std::string out;
  out += "name: " + q(profile.name) + "\n";
  out += "requirements:\n";
  for (const Requirement& r : profile.requirements) {
    out += "  - metric: " + q(to_string(r.metric_id)) + "\n";
    if (r.quantile) out += "    quantile: " + d(*r.quantile) + "\n";
    out += "    threshold: " + d(r.threshold) + "\n";
    out += "    unit: " + q(r.unit) + "\n";
    out += "    direction: " + q(r.direction == Direction::Max ? "max" : "min") + "\n";
    out += "    obligation: " + q(r.obligation == Obligation::Must ? "must" : "shall") + "\n";
    if (r.benefit_weight) out += "    benefit_weight: " + d(*r.benefit_weight) + "\n";
  }
  return out;
}

inline ApplicationProfile profile_from_yaml(const YAML::Node& root, const std::string& context) {
  ApplicationProfile profile;
  profile.name = detail::require<std::string>(root, "name", context);
  const YAML::Node reqs = root["requirements"];
  if (!reqs || !reqs.IsSequence()) throw SchemaError(context + ": 'requirements' must be a list");
  for (std::size_t i = 0; i < reqs.size(); ++i) {
    const std::string where = context + ".requirements[" + std::to_string(i) + "]";
    const YAML::Node n = reqs[i];
    Requirement r;
    const std::string metric = detail::require<std::string>(n, "metric", where);
    const auto mid = metric_id_from_string(metric);
    if (!mid) throw SchemaError(where + ": unknown metric '" + metric + "'");
    r.metric_id = *mid;
    r.quantile = detail::optional_key<double>(n, "quantile", where);
    r.threshold = detail::require<double>(n, "threshold", where);
    r.unit = detail::optional_key<std::string>(n, "unit", where).value_or("");
    const std::string dir = detail::require<std::string>(n, "direction", where);
    if (dir != "max" && dir != "min") throw SchemaError(where + ": direction must be max or min");
    r.direction = dir == "max" ? Direction::Max : Direction::Min;
    const std::string ob =
        detail::optional_key<std::string>(n, "obligation", where).value_or("must");
    if (ob != "must" && ob != "shall")
      throw SchemaError(where + ": obligation must be must or shall");
    r.obligation = ob == "must" ? Obligation::Must : Obligation::Shall;
    r.benefit_weight = detail::optional_key<double>(n, "benefit_weight", where);
    profile.requirements.push_back(r);
  }
  try {
    validate_profile(profile);
  } catch (const ParameterError& e) {
    throw SchemaError(context + ": " + e.what());
  }
  return profile;
}

inline void write_profile(const std::filesystem::path& path, const ApplicationProfile& profile) {
  write_file_atomic(path, to_yaml(profile));
}

inline ApplicationProfile read_profile(const std::filesystem::path& path) {
  return profile_from_yaml(load_yaml(path), path.string());
}

// ---------------------------------------------------------------------------
// EvaluationResults (one document may carry several applications)

inline std::string evaluations_to_yaml(const std::vector<EvaluationResults>& evals) {
  using namespace yamlfmt;
  std::string out = "applications:\n";
  auto name_list = [](const std::vector<std::string>& names) {
    std::string s = "[";
    for (std::size_t i = 0; i < names.size(); ++i)
      s += (i ? ", " : "") + yamlfmt::q(names[i]);
    return s + "]";
  };
  for (const EvaluationResults& ev : evals) {
    out += "  - application: " + q(ev.application) + "\n";
    out += "    lts_names: " + name_list(ev.lts_names) + "\n";
    out += "    requirements:\n";
    for (const RequirementOutcome& oc : ev.outcomes) {
      const Requirement& r = oc.requirement;
      out += "      - metric: " + q(to_string(r.metric_id)) + "\n";
      if (r.quantile) out += "        quantile: " + d(*r.quantile) + "\n";
      out += "        threshold: " + d(r.threshold) + "\n";
      out += "        unit: " + q(r.unit) + "\n";
      out += "        direction: " + q(r.direction == Direction::Max ? "max" : "min") + "\n";
      out += "        obligation: " + q(r.obligation == Obligation::Must ? "must" : "shall") + "\n";
      if (r.benefit_weight) out += "        benefit_weight: " + d(*r.benefit_weight) + "\n";
      out += "        statuses:\n";
      for (const auto& [name, st] : oc.statuses)
        out += "          - {lts: " + q(name) + ", status: " + q(to_string(st)) + "}\n";
      out += "        suitable: " + name_list(oc.suitable) + "\n";
    }
    out += "    criteria_matrix:\n";
    for (const CriterionRow& row : ev.criteria_matrix) {
      out += "      - metric: " + q(to_string(row.metric)) + "\n";
      out += "        has_requirement: " + b(row.has_requirement) + "\n";
      out += "        suitable: " + name_list(row.suitable) + "\n";
    }
    out += "    overall_suitable: " + name_list(ev.overall_suitable) + "\n";
    if (ev.benefit_ranking) {
      out += "    benefit_ranking:\n";
      for (const BenefitScore& bs : *ev.benefit_ranking)
        out += "      - {lts: " + q(bs.lts_name) + ", score: " + d(bs.score) + "}\n";
    }
  }
  return out;
}

inline std::vector<EvaluationResults> evaluations_from_yaml(const YAML::Node& root,
                                                            const std::string& context) {
  const YAML::Node apps = root["applications"];
  if (!apps || !apps.IsSequence()) throw SchemaError(context + ": 'applications' must be a list");
  std::vector<EvaluationResults> evals;
  for (std::size_t a = 0; a < apps.size(); ++a) {
    const YAML::Node n = apps[a];
    const std::string where = context + ".applications[" + std::to_string(a) + "]";
    EvaluationResults ev;
    ev.application = detail::require<std::string>(n, "application", where);
    for (const auto& name : n["lts_names"]) ev.lts_names.push_back(name.as<std::string>());
    if (const YAML::Node reqs = n["requirements"]; reqs && reqs.IsSequence()) {
      for (const auto& rn : reqs) {
        RequirementOutcome oc;
        const auto mid = metric_id_from_string(rn["metric"].as<std::string>());
        if (!mid) throw SchemaError(where + ": unknown metric");
        oc.requirement.metric_id = *mid;
        oc.requirement.quantile = detail::optional_key<double>(rn, "quantile", where);
        oc.requirement.threshold = detail::require<double>(rn, "threshold", where);
        oc.requirement.unit = detail::optional_key<std::string>(rn, "unit", where).value_or("");
        oc.requirement.direction =
            rn["direction"].as<std::string>() == "max" ? Direction::Max : Direction::Min;
        oc.requirement.obligation =
            rn["obligation"].as<std::string>() == "must" ? Obligation::Must : Obligation::Shall;
        oc.requirement.benefit_weight = detail::optional_key<double>(rn, "benefit_weight", where);
        for (const auto& sn : rn["statuses"]) {
          const std::string st = sn["status"].as<std::string>();
          RequirementStatus status = RequirementStatus::Fail;
          for (RequirementStatus candidate :
               {RequirementStatus::Pass, RequirementStatus::Fail, RequirementStatus::NotProvided,
                RequirementStatus::InsufficientSamples})
            if (st == to_string(candidate)) status = candidate;
          oc.statuses.emplace_back(sn["lts"].as<std::string>(), status);
        }
        for (const auto& sn : rn["suitable"]) oc.suitable.push_back(sn.as<std::string>());
        ev.outcomes.push_back(std::move(oc));
      }
    }
    if (const YAML::Node cm = n["criteria_matrix"]; cm && cm.IsSequence()) {
      for (const auto& rn : cm) {
        CriterionRow row;
        const auto mid = metric_id_from_string(rn["metric"].as<std::string>());
        if (!mid) throw SchemaError(where + ": unknown metric in criteria_matrix");
        row.metric = *mid;
        row.has_requirement = rn["has_requirement"].as<bool>();
        for (const auto& sn : rn["suitable"]) row.suitable.push_back(sn.as<std::string>());
        ev.criteria_matrix.push_back(std::move(row));
      }
    }
    for (const auto& sn : n["overall_suitable"]) ev.overall_suitable.push_back(sn.as<std::string>());
    if (const YAML::Node br = n["benefit_ranking"]; br && br.IsSequence()) {
      std::vector<BenefitScore> ranking;
      for (const auto& bn : br)
        ranking.push_back({bn["lts"].as<std::string>(), bn["score"].as<double>()});
      ev.benefit_ranking = std::move(ranking);
    }
    evals.push_back(std::move(ev));
  }
  return evals;
}

inline void write_evaluations(const std::filesystem::path& path,
                              const std::vector<EvaluationResults>& evals) {
  write_file_atomic(path, evaluations_to_yaml(evals));
}

inline std::vector<EvaluationResults> read_evaluations(const std::filesystem::path& path) {
  return evaluations_from_yaml(load_yaml(path), path.string());
}

// ---------------------------------------------------------------------------
// Experiment manifest: ties the trajectory CSVs, the test case, and the gate
// log of one executed experiment together.

struct ExperimentManifest {
  std::string test_case_id;
  std::string test_case_path;  // relative to the manifest
  std::string gt_csv;
  std::string lts_csv;
  std::uint64_t seed = 0;
  std::string error_model_hash;
  std::vector<StaticGateEntry> static_gate_log;
};

inline std::string to_yaml(const ExperimentManifest& m) {
  using namespace yamlfmt;
  std::string out;
  out += "test_case_id: " + q(m.test_case_id) + "\n";
  out += "test_case: " + q(m.test_case_path) + "\n";
  out += "gt_csv: " + q(m.gt_csv) + "\n";
  out += "lts_csv: " + q(m.lts_csv) + "\n";
  out += "seed: " + u(m.seed) + "\n";
  out += "error_model_hash: " + q(m.error_model_hash) + "\n";
  out += "static_gate_log:";
  out += m.static_gate_log.empty() ? " []\n" : "\n";
  for (const StaticGateEntry& e : m.static_gate_log) {
    out += "  - {eval_pose_id: " + i(e.eval_pose_id) + ", accepted: " + b(e.accepted);
    if (e.gt_speed_mm_s) out += ", gt_speed_mm_s: " + d(*e.gt_speed_mm_s);
    out += "}\n";
  }
  return out;
}

inline ExperimentManifest experiment_manifest_from_yaml(const YAML::Node& root,
                                                        const std::string& context) {
  ExperimentManifest m;
  m.test_case_id = detail::require<std::string>(root, "test_case_id", context);
  m.test_case_path = detail::require<std::string>(root, "test_case", context);
  m.gt_csv = detail::require<std::string>(root, "gt_csv", context);
  m.lts_csv = detail::require<std::string>(root, "lts_csv", context);
  m.seed = detail::optional_key<std::uint64_t>(root, "seed", context).value_or(0);
  m.error_model_hash =
      detail::optional_key<std::string>(root, "error_model_hash", context).value_or("");
  if (const YAML::Node log = root["static_gate_log"]; log && log.IsSequence()) {
    for (const auto& en : log) {
      StaticGateEntry e;
      e.eval_pose_id = en["eval_pose_id"].as<int>();
      e.accepted = en["accepted"].as<bool>();
      if (en["gt_speed_mm_s"]) e.gt_speed_mm_s = en["gt_speed_mm_s"].as<double>();
      m.static_gate_log.push_back(e);
    }
  }
  return m;
}

inline void write_experiment_manifest(const std::filesystem::path& path,
                                      const ExperimentManifest& m) {
  write_file_atomic(path, to_yaml(m));
}

inline ExperimentManifest read_experiment_manifest(const std::filesystem::path& path) {
  return experiment_manifest_from_yaml(load_yaml(path), path.string());
}

// ---------------------------------------------------------------------------
// Run manifest: everything the pipeline command needs.

struct RunManifest {
  std::string test_case;
  std::optional<std::string> error_model;  // synthetic mode
  std::optional<std::string> gt_csv;       // real-data mode
  std::optional<std::string> lts_csv;
  std::string output_dir;
  std::optional<std::uint64_t> seed;  // overrides the error model's seed
  std::vector<double> quantiles;      // empty: library defaults
  std::optional<double> latency_speed_threshold_mm_s;
  std::optional<double> dynamic_speed_threshold_mm_s;
  std::optional<double> gt_rate_hz;
  std::vector<std::string> profiles;
};

inline RunManifest run_manifest_from_yaml(const YAML::Node& root, const std::string& context) {
  RunManifest m;
  m.test_case = detail::require<std::string>(root, "test_case", context);
  m.error_model = detail::optional_key<std::string>(root, "error_model", context);
  m.gt_csv = detail::optional_key<std::string>(root, "gt_csv", context);
  m.lts_csv = detail::optional_key<std::string>(root, "lts_csv", context);
  m.output_dir = detail::require<std::string>(root, "output_dir", context);
  m.seed = detail::optional_key<std::uint64_t>(root, "seed", context);
  if (const YAML::Node qs = root["quantiles"]; qs && qs.IsSequence())
    for (const auto& q : qs) m.quantiles.push_back(q.as<double>());
  if (const YAML::Node st = root["speed_thresholds"]; st && st.IsMap()) {
    m.latency_speed_threshold_mm_s = detail::optional_key<double>(st, "latency_mm_s", context);
    m.dynamic_speed_threshold_mm_s = detail::optional_key<double>(st, "dynamic_mm_s", context);
  }
  m.gt_rate_hz = detail::optional_key<double>(root, "gt_rate_hz", context);
  if (const YAML::Node ps = root["profiles"]; ps && ps.IsSequence())
    for (const auto& p : ps) m.profiles.push_back(p.as<std::string>());
  if (!m.error_model && !(m.gt_csv && m.lts_csv))
    throw SchemaError(context + ": need either 'error_model' or both 'gt_csv' and 'lts_csv'");
  return m;
}

inline RunManifest read_run_manifest(const std::filesystem::path& path) {
  return run_manifest_from_yaml(load_yaml(path), path.string());
}

// ---------------------------------------------------------------------------
// Plot-data export: the two dashboard views as static CSV files.

inline std::string error_scatter_csv(const ErrorSamples& samples) {
  std::string out = "ex_mm,ey_mm,gt_yaw_deg\n";
  for (const ErrorSample& e : samples) {
    out += yamlfmt::d(e.signed_error_x_mm) + "," + yamlfmt::d(e.signed_error_y_mm) + ",";
    if (e.gt_yaw_deg) out += yamlfmt::d(*e.gt_yaw_deg);
    out += '\n';
  }
  return out;
}

inline std::string error_over_time_csv(const ErrorSamples& samples) {
  std::string out = "t_s,horizontal_error_mm,gt_speed_mm_s\n";
  if (samples.empty()) return out;
  const double t0 = samples.front().t.seconds();
  for (const ErrorSample& e : samples)
    out += yamlfmt::d(e.t.seconds() - t0) + "," + yamlfmt::d(e.horizontal_error_mm) + "," +
           yamlfmt::d(e.gt_speed_mm_s) + '\n';
  return out;
}

}  // namespace ltseval
