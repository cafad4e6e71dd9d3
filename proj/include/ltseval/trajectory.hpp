#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "ltseval/errors.hpp"
#include "ltseval/pose.hpp"

namespace ltseval {

enum class TrajectorySource { GroundTruth, Lts };

inline const char* to_string(TrajectorySource s) {
  return s == TrajectorySource::GroundTruth ? "ground_truth" : "lts";
}

// Which optional pose fields every sample of a trajectory carries.
struct Capabilities {
  bool has_vertical = false;
  bool has_heading = false;
  bool has_orientation3d = false;

  friend bool operator==(const Capabilities&, const Capabilities&) = default;
};

// Time-ordered pose series from a single source.
struct Trajectory {
  TrajectorySource source = TrajectorySource::GroundTruth;
  std::vector<Pose> samples;
  Capabilities capabilities;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  Timestamp start_time() const { return samples.front().t; }
  Timestamp end_time() const { return samples.back().t; }
  double duration_s() const { return to_seconds(end_time() - start_time()); }

  // Index of the last sample with t <= query. Requires start <= query <= end.
  std::size_t segment_index(Timestamp query) const {
    auto it = std::upper_bound(samples.begin(), samples.end(), query,
                               [](Timestamp t, const Pose& p) { return t < p.t; });
    return static_cast<std::size_t>(it - samples.begin()) - 1;
  }

  // Throws if any trajectory invariant is violated: strictly increasing
  // timestamps, per-sample validity, and field presence consistent with the
  // capability flags.
  void validate() const {
    const char* src = to_string(source);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const Pose& p = samples[i];
      validate_pose(p, std::string(src) + " sample " + std::to_string(i));
      if (i > 0 && !(samples[i - 1].t < p.t))
        throw ParameterError(std::string(src) + ": timestamps not strictly increasing at sample " +
                             std::to_string(i));
      if (p.z_mm.has_value() != capabilities.has_vertical ||
          p.yaw_deg.has_value() != capabilities.has_heading ||
          p.orientation.has_value() != capabilities.has_orientation3d)
        throw ParameterError(std::string(src) + " sample " + std::to_string(i) +
                             ": fields inconsistent with capability flags");
    }
  }
};

}  // namespace ltseval
