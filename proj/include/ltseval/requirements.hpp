#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ltseval/errors.hpp"
#include "ltseval/metrics.hpp"

namespace ltseval {

enum class MetricId {
  HorizontalAccuracy,
  VerticalAccuracy,
  OrientationAccuracy,
  Latency,
  UpdateRate,
};

inline constexpr MetricId kAllMetricIds[] = {
    MetricId::HorizontalAccuracy, MetricId::VerticalAccuracy, MetricId::OrientationAccuracy,
    MetricId::Latency, MetricId::UpdateRate};

inline const char* to_string(MetricId m) {
  switch (m) {
    case MetricId::HorizontalAccuracy: return "horizontal_accuracy";
    case MetricId::VerticalAccuracy: return "vertical_accuracy";
    case MetricId::OrientationAccuracy: return "orientation_accuracy";
    case MetricId::Latency: return "latency";
    case MetricId::UpdateRate: return "update_rate";
  }
  return "horizontal_accuracy";
}

inline std::optional<MetricId> metric_id_from_string(const std::string& s) {
  for (MetricId m : kAllMetricIds)
    if (s == to_string(m)) return m;
  return std::nullopt;
}

// Whether the metric is a distribution (requirements pin a quantile) or a
// scalar (latency, update rate).
inline bool is_distributional(MetricId m) {
  return m == MetricId::HorizontalAccuracy || m == MetricId::VerticalAccuracy ||
         m == MetricId::OrientationAccuracy;
}

enum class Direction { Max, Min };  // Max: value < threshold; Min: value > threshold
enum class Obligation { Shall, Must };

// One quantile-gated threshold. Comparisons are strict: a value equal to the
// threshold fails.
struct Requirement {
  MetricId metric_id = MetricId::HorizontalAccuracy;
  std::optional<double> quantile;  // present iff the metric is distributional
  double threshold = 0.0;
  std::string unit;
  Direction direction = Direction::Max;
  Obligation obligation = Obligation::Must;
  std::optional<double> benefit_weight;
};

struct ApplicationProfile {
  std::string name;
  std::vector<Requirement> requirements;
};

inline void validate_profile(const ApplicationProfile& profile) {
  std::set<std::pair<MetricId, double>> seen;
  for (const Requirement& r : profile.requirements) {
    const std::string label = "profile '" + profile.name + "', " + to_string(r.metric_id);
    if (!(r.threshold > 0.0)) throw ParameterError(label + ": threshold must be positive");
    if (is_distributional(r.metric_id) != r.quantile.has_value())
      throw ParameterError(label + (r.quantile ? ": scalar metric cannot take a quantile"
                                               : ": distributional metric needs a quantile"));
    if (r.quantile && !(*r.quantile > 0.0 && *r.quantile < 1.0))
      throw ParameterError(label + ": quantile must lie in (0, 1)");
    if (r.benefit_weight && *r.benefit_weight < 0.0)
      throw ParameterError(label + ": benefit weight must be >= 0");
    if (!seen.insert({r.metric_id, r.quantile.value_or(-1.0)}).second)
      throw ParameterError(label + ": duplicate (metric, quantile) requirement");
  }
}

// Update-rate guideline: the dynamic case needs enough updates to bound the
// position error at top speed, the static case bounds the time between two
// updates. The stricter candidate wins.
inline Requirement derive_update_rate_requirement(double max_speed_mm_s,
                                                  double max_position_error_mm,
                                                  double max_static_interval_s) {
  if (max_speed_mm_s < 0.0 || !(max_position_error_mm > 0.0) || !(max_static_interval_s > 0.0))
    throw ParameterError("derive_update_rate_requirement: inputs must be positive");
  const double dynamic_hz = max_speed_mm_s / max_position_error_mm;
  const double static_hz = 1.0 / max_static_interval_s;
  Requirement r;
  r.metric_id = MetricId::UpdateRate;
  r.threshold = std::max(dynamic_hz, static_hz);
  r.unit = "hz";
  r.direction = Direction::Min;
  r.obligation = Obligation::Must;
  return r;
}

enum class RequirementStatus { Pass, Fail, NotProvided, InsufficientSamples };

inline const char* to_string(RequirementStatus s) {
  switch (s) {
    case RequirementStatus::Pass: return "pass";
    case RequirementStatus::Fail: return "fail";
    case RequirementStatus::NotProvided: return "not_provided";
    case RequirementStatus::InsufficientSamples: return "insufficient_samples";
  }
  return "fail";
}

struct RequirementOutcome {
  Requirement requirement;
  // Per LTS, in the order the results were supplied.
  std::vector<std::pair<std::string, RequirementStatus>> statuses;
  std::vector<std::string> suitable;  // LTS names with status pass
};

// Row of the criteria matrix: one of the five standard criteria, vacuous
// (all systems suitable) when the application states no requirement on it.
struct CriterionRow {
  MetricId metric = MetricId::HorizontalAccuracy;
  bool has_requirement = false;
  std::vector<std::string> suitable;
};

struct BenefitScore {
  std::string lts_name;
  double score = 0.0;
};

struct EvaluationResults {
  std::string application;
  std::vector<std::string> lts_names;
  std::vector<RequirementOutcome> outcomes;
  std::vector<CriterionRow> criteria_matrix;
  std::vector<std::string> overall_suitable;  // every must-requirement passed
  std::optional<std::vector<BenefitScore>> benefit_ranking;
};

namespace detail {

inline std::optional<double> lookup_quantile(const DistributionStats& d, double q) {
  for (const auto& [key, value] : d.quantiles)
    if (std::abs(key - q) < 1e-12) return value;
  return std::nullopt;  // quantile was never computed for this report
}

inline RequirementStatus judge(const Requirement& r, const PerformanceResults& res) {
  std::optional<double> value;
  if (is_distributional(r.metric_id)) {
    const DistributionStats* dist = nullptr;
    switch (r.metric_id) {
      case MetricId::HorizontalAccuracy: dist = &res.horizontal_error_mm; break;
      case MetricId::VerticalAccuracy:
        dist = res.vertical_error_mm ? &*res.vertical_error_mm : nullptr;
        break;
      case MetricId::OrientationAccuracy:
        dist = res.abs_orientation_error_deg ? &*res.abs_orientation_error_deg : nullptr;
        break;
      default: break;
    }
    if (dist == nullptr) return RequirementStatus::NotProvided;
    value = lookup_quantile(*dist, *r.quantile);
    if (!value) return RequirementStatus::InsufficientSamples;
    // A stored quantile the sample count cannot witness is treated the same
    // as a missing one.
    const double n = static_cast<double>(dist->stats.count);
    if (n * (1.0 - *r.quantile) < 1.0 - 1e-9) return RequirementStatus::InsufficientSamples;
  } else if (r.metric_id == MetricId::Latency) {
    if (!res.latency_ms) return RequirementStatus::InsufficientSamples;
    value = res.latency_ms;
  } else {
    if (!res.update_rate) return RequirementStatus::InsufficientSamples;
    value = res.update_rate->hz;
  }
  const bool pass =
      r.direction == Direction::Max ? *value < r.threshold : *value > r.threshold;
  return pass ? RequirementStatus::Pass : RequirementStatus::Fail;
}

}  // namespace detail

// Matches an application profile against one performance report per LTS.
// A system is overall suitable only if every must-requirement passes;
// not_provided and insufficient_samples both block a must-requirement, so a
// missing capability can never pass silently. Shall-requirements only feed
// the optional benefit scoring.
inline EvaluationResults match_requirements(
    const ApplicationProfile& profile,
    const std::vector<std::pair<std::string, PerformanceResults>>& results) {
  validate_profile(profile);
  EvaluationResults out;
  out.application = profile.name;
  for (const auto& [name, res] : results) out.lts_names.push_back(name);

  std::map<std::string, bool> all_must_pass;
  for (const auto& [name, res] : results) all_must_pass[name] = true;

  for (const Requirement& r : profile.requirements) {
    RequirementOutcome oc;
    oc.requirement = r;
    for (const auto& [name, res] : results) {
      const RequirementStatus st = detail::judge(r, res);
      oc.statuses.emplace_back(name, st);
      if (st == RequirementStatus::Pass) oc.suitable.push_back(name);
      if (r.obligation == Obligation::Must && st != RequirementStatus::Pass)
        all_must_pass[name] = false;
    }
    out.outcomes.push_back(std::move(oc));
  }

  for (MetricId m : kAllMetricIds) {
    CriterionRow row;
    row.metric = m;
    std::vector<const RequirementOutcome*> rows;
    for (const RequirementOutcome& oc : out.outcomes)
      if (oc.requirement.metric_id == m) rows.push_back(&oc);
    row.has_requirement = !rows.empty();
    for (const auto& [name, res] : results) {
      bool ok = true;
      for (const RequirementOutcome* oc : rows)
        for (const auto& [n, st] : oc->statuses)
          if (n == name && st != RequirementStatus::Pass) ok = false;
      if (ok) row.suitable.push_back(name);  // vacuously all, when no requirement
    }
    out.criteria_matrix.push_back(std::move(row));
  }

  for (const auto& [name, res] : results)
    if (all_must_pass[name]) out.overall_suitable.push_back(name);
  return out;
}

// Benefit scores over the weighted requirements, restricted to systems that
// meet every must-requirement. Returns nothing when no requirement carries a
// weight. Ties rank lexicographically by name.
inline std::optional<std::vector<BenefitScore>> benefit_analysis(const EvaluationResults& eval) {
  bool any_weighted = false;
  for (const RequirementOutcome& oc : eval.outcomes)
    if (oc.requirement.benefit_weight) any_weighted = true;
  if (!any_weighted) return std::nullopt;

  std::vector<BenefitScore> scores;
  for (const std::string& name : eval.overall_suitable) {
    BenefitScore bs;
    bs.lts_name = name;
    for (const RequirementOutcome& oc : eval.outcomes) {
      if (!oc.requirement.benefit_weight) continue;
      for (const auto& [n, st] : oc.statuses)
        if (n == name && st == RequirementStatus::Pass) bs.score += *oc.requirement.benefit_weight;
    }
    scores.push_back(bs);
  }
  std::sort(scores.begin(), scores.end(), [](const BenefitScore& a, const BenefitScore& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.lts_name < b.lts_name;
  });
  return scores;
}

}  // namespace ltseval
