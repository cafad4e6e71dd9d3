#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "ltseval/requirements.hpp"

using namespace ltseval;

namespace {

Requirement req(MetricId metric, std::optional<double> quantile, double threshold,
                Direction dir, Obligation ob = Obligation::Must,
                std::optional<double> weight = std::nullopt) {
  Requirement r;
  r.metric_id = metric;
  r.quantile = quantile;
  r.threshold = threshold;
  r.direction = dir;
  r.obligation = ob;
  r.benefit_weight = weight;
  return r;
}

// Minimal synthetic report: horizontal quantiles, optional orientation,
// latency and rate scalars.
PerformanceResults report(double q95_h, double latency_ms, double rate_hz,
                          std::optional<double> q95_yaw = std::nullopt,
                          std::size_t count = 20000) {
  PerformanceResults res;
  res.horizontal_error_mm.stats.count = count;
  res.horizontal_error_mm.quantiles[0.95] = q95_h;
  if (q95_yaw) {
    DistributionStats yaw;
    yaw.stats.count = count;
    yaw.quantiles[0.95] = *q95_yaw;
    res.abs_orientation_error_deg = yaw;
  }
  res.latency_ms = latency_ms;
  UpdateRate r;
  r.hz = rate_hz;
  res.update_rate = r;
  return res;
}

}  // namespace

TEST_CASE("derive_update_rate_requirement picks the stricter criterion") {
  // Dynamic dominates: 2000 mm/s over 100 mm needs 20 Hz > 0.1 Hz.
  const Requirement dynamic = derive_update_rate_requirement(2000.0, 100.0, 10.0);
  CHECK(dynamic.metric_id == MetricId::UpdateRate);
  CHECK(dynamic.threshold == Catch::Approx(20.0));
  CHECK(dynamic.direction == Direction::Min);
  CHECK_FALSE(dynamic.quantile.has_value());

  // Static-only case: 1 / 10 s.
  const Requirement idle = derive_update_rate_requirement(0.0, 100.0, 10.0);
  CHECK(idle.threshold == Catch::Approx(0.1));

  // Equal candidates collapse to the common value.
  const Requirement tie = derive_update_rate_requirement(100.0, 100.0, 1.0);
  CHECK(tie.threshold == Catch::Approx(1.0));

  CHECK_THROWS_AS(derive_update_rate_requirement(1.0, 0.0, 1.0), ParameterError);
}

TEST_CASE("match_requirements: strict comparisons and status kinds") {
  ApplicationProfile profile;
  profile.name = "strict";
  profile.requirements = {req(MetricId::HorizontalAccuracy, 0.95, 100.0, Direction::Max),
                          req(MetricId::UpdateRate, std::nullopt, 10.0, Direction::Min)};

  std::vector<std::pair<std::string, PerformanceResults>> results;
  results.emplace_back("exact", report(100.0, 10.0, 10.0));   // boundary: fails both
  results.emplace_back("under", report(99.9, 10.0, 10.01));   // passes both
  const EvaluationResults ev = match_requirements(profile, results);

  CHECK(ev.outcomes[0].statuses[0].second == RequirementStatus::Fail);
  CHECK(ev.outcomes[0].statuses[1].second == RequirementStatus::Pass);
  CHECK(ev.outcomes[1].statuses[0].second == RequirementStatus::Fail);
  CHECK(ev.outcomes[1].statuses[1].second == RequirementStatus::Pass);
  REQUIRE(ev.overall_suitable.size() == 1);
  CHECK(ev.overall_suitable[0] == "under");
}

TEST_CASE("match_requirements: missing capability can never pass") {
  ApplicationProfile profile;
  profile.name = "vertical";
  profile.requirements = {req(MetricId::VerticalAccuracy, 0.999, 500.0, Direction::Max)};
  std::vector<std::pair<std::string, PerformanceResults>> results;
  results.emplace_back("planar", report(10.0, 5.0, 20.0));  // no vertical output
  const EvaluationResults ev = match_requirements(profile, results);
  CHECK(ev.outcomes[0].statuses[0].second == RequirementStatus::NotProvided);
  CHECK(ev.overall_suitable.empty());
}

TEST_CASE("match_requirements: unwitnessable quantile fails as insufficient") {
  ApplicationProfile profile;
  profile.name = "q9999";
  profile.requirements = {req(MetricId::HorizontalAccuracy, 0.9999, 50.0, Direction::Max)};
  std::vector<std::pair<std::string, PerformanceResults>> results;
  PerformanceResults small = report(10.0, 5.0, 20.0, std::nullopt, 63);
  small.horizontal_error_mm.quantiles[0.9999] = std::nullopt;  // gate fired upstream
  results.emplace_back("few-samples", small);
  PerformanceResults sneaky = report(10.0, 5.0, 20.0, std::nullopt, 63);
  sneaky.horizontal_error_mm.quantiles[0.9999] = 12.0;  // value stored, count cannot witness it
  results.emplace_back("sneaky", sneaky);

  const EvaluationResults ev = match_requirements(profile, results);
  CHECK(ev.outcomes[0].statuses[0].second == RequirementStatus::InsufficientSamples);
  CHECK(ev.outcomes[0].statuses[1].second == RequirementStatus::InsufficientSamples);
  CHECK(ev.overall_suitable.empty());
}

TEST_CASE("relaxing a threshold never shrinks the suitable set") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> err(10.0, 300.0);
  std::uniform_real_distribution<double> thr(20.0, 250.0);
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<std::pair<std::string, PerformanceResults>> results;
    for (int i = 0; i < 4; ++i)
      results.emplace_back("lts" + std::to_string(i), report(err(rng), 5.0, 20.0));
    const double threshold = thr(rng);
    ApplicationProfile tight;
    tight.name = "tight";
    tight.requirements = {req(MetricId::HorizontalAccuracy, 0.95, threshold, Direction::Max)};
    ApplicationProfile loose = tight;
    loose.requirements[0].threshold = threshold * 1.5;

    const auto before = match_requirements(tight, results).overall_suitable;
    const auto after = match_requirements(loose, results).overall_suitable;
    for (const std::string& name : before)
      CHECK(std::find(after.begin(), after.end(), name) != after.end());
  }
}

TEST_CASE("shall requirements affect benefit only, never suitability") {
  ApplicationProfile profile;
  profile.name = "shall";
  profile.requirements = {
      req(MetricId::HorizontalAccuracy, 0.95, 200.0, Direction::Max),
      req(MetricId::Latency, std::nullopt, 1.0, Direction::Max, Obligation::Shall, 2.0)};
  std::vector<std::pair<std::string, PerformanceResults>> results;
  results.emplace_back("a", report(100.0, 5.0, 20.0));  // fails the shall-latency
  const EvaluationResults with_shall = match_requirements(profile, results);
  CHECK(with_shall.overall_suitable == std::vector<std::string>{"a"});

  ApplicationProfile without = profile;
  without.requirements.pop_back();
  const EvaluationResults bare = match_requirements(without, results);
  CHECK(bare.overall_suitable == with_shall.overall_suitable);
}

TEST_CASE("benefit analysis ranks weighted passes and breaks ties by name") {
  ApplicationProfile profile;
  profile.name = "benefit";
  profile.requirements = {
      req(MetricId::HorizontalAccuracy, 0.95, 200.0, Direction::Max),
      req(MetricId::Latency, std::nullopt, 10.0, Direction::Max, Obligation::Shall, 1.0)};

  std::vector<std::pair<std::string, PerformanceResults>> results;
  results.emplace_back("b", report(100.0, 5.0, 20.0));   // passes the weighted shall
  results.emplace_back("a", report(100.0, 50.0, 20.0));  // fails it
  EvaluationResults ev = match_requirements(profile, results);
  auto ranking = benefit_analysis(ev);
  REQUIRE(ranking.has_value());
  REQUIRE(ranking->size() == 2);
  CHECK((*ranking)[0].lts_name == "b");
  CHECK((*ranking)[0].score == Catch::Approx(1.0));
  CHECK((*ranking)[1].lts_name == "a");
  CHECK((*ranking)[1].score == Catch::Approx(0.0));

  SECTION("single suitable system ranks first regardless of weights") {
    std::vector<std::pair<std::string, PerformanceResults>> one;
    one.emplace_back("only", report(100.0, 50.0, 20.0));
    const EvaluationResults single = match_requirements(profile, one);
    const auto r = benefit_analysis(single);
    REQUIRE(r.has_value());
    REQUIRE(r->size() == 1);
    CHECK((*r)[0].lts_name == "only");
  }

  SECTION("equal scores break lexicographically") {
    std::vector<std::pair<std::string, PerformanceResults>> tied;
    tied.emplace_back("zeta", report(100.0, 5.0, 20.0));
    tied.emplace_back("alpha", report(100.0, 5.0, 20.0));
    const auto r = benefit_analysis(match_requirements(profile, tied));
    REQUIRE(r.has_value());
    CHECK((*r)[0].lts_name == "alpha");
    CHECK((*r)[1].lts_name == "zeta");
  }

  SECTION("no weighted requirement means no ranking") {
    ApplicationProfile unweighted = profile;
    unweighted.requirements[1].benefit_weight.reset();
    CHECK_FALSE(benefit_analysis(match_requirements(unweighted, results)).has_value());
  }
}

TEST_CASE("criteria matrix rows are vacuous without a requirement") {
  ApplicationProfile profile;
  profile.name = "partial";
  profile.requirements = {req(MetricId::HorizontalAccuracy, 0.95, 200.0, Direction::Max)};
  std::vector<std::pair<std::string, PerformanceResults>> results;
  results.emplace_back("a", report(100.0, 5.0, 20.0));
  results.emplace_back("b", report(500.0, 5.0, 20.0));
  const EvaluationResults ev = match_requirements(profile, results);
  REQUIRE(ev.criteria_matrix.size() == 5);
  for (const CriterionRow& row : ev.criteria_matrix) {
    if (row.metric == MetricId::HorizontalAccuracy) {
      CHECK(row.has_requirement);
      CHECK(row.suitable == std::vector<std::string>{"a"});
    } else {
      CHECK_FALSE(row.has_requirement);
      CHECK(row.suitable == std::vector<std::string>{"a", "b"});  // vacuously all
    }
  }
}

TEST_CASE("profile validation rejects malformed requirements") {
  ApplicationProfile profile;
  profile.name = "bad";
  profile.requirements = {req(MetricId::Latency, 0.95, 10.0, Direction::Max)};
  CHECK_THROWS_AS(validate_profile(profile), ParameterError);  // scalar with quantile

  profile.requirements = {req(MetricId::HorizontalAccuracy, std::nullopt, 10.0, Direction::Max)};
  CHECK_THROWS_AS(validate_profile(profile), ParameterError);  // distribution without quantile

  profile.requirements = {req(MetricId::HorizontalAccuracy, 0.95, -5.0, Direction::Max)};
  CHECK_THROWS_AS(validate_profile(profile), ParameterError);  // non-positive threshold

  profile.requirements = {req(MetricId::HorizontalAccuracy, 0.95, 10.0, Direction::Max),
                          req(MetricId::HorizontalAccuracy, 0.95, 20.0, Direction::Max)};
  CHECK_THROWS_AS(validate_profile(profile), ParameterError);  // duplicate (metric, quantile)
}
