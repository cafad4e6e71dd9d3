// Command-line front end: scenario generation, synthetic experiment
// execution, performance evaluation, requirement matching, and plot-data
// export, individually or as one pipeline run.
//
// Exit codes: 0 success, 1 validation failure, 2 I/O, schema, or usage error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ltseval/ltseval.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

ltseval::Area parse_area(const std::string& spec) {
  const auto x = spec.find('x');
  ltseval::Area area;
  try {
    if (x == std::string::npos) {
      area.width_m = area.depth_m = std::stod(spec);
    } else {
      area.width_m = std::stod(spec.substr(0, x));
      area.depth_m = std::stod(spec.substr(x + 1));
    }
  } catch (const std::exception&) {
    throw ltseval::ParameterError("bad --area value '" + spec + "', expected WIDTHxDEPTH in m");
  }
  return area;
}

std::vector<double> parse_quantiles(const std::string& spec) {
  std::vector<double> qs;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    const auto comma = spec.find(',', pos);
    const std::string tok = spec.substr(pos, comma == std::string::npos ? comma : comma - pos);
    if (!tok.empty()) {
      try {
        qs.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw ltseval::ParameterError("bad quantile '" + tok + "'");
      }
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (qs.empty()) throw ltseval::ParameterError("no quantiles given");
  return qs;
}

void print_validation(const ltseval::ValidationReport& report) {
  for (const std::string& e : report.errors) std::cerr << "error: " << e << "\n";
  for (const std::string& w : report.warnings) std::cerr << "warning: " << w << "\n";
}

struct ScenarioArgs {
  std::string kind;
  std::string area = "10x10";
  int poses = 63;
  std::uint64_t seed = 0;
  double speed = 1400.0;
  double tolerance = 100.0;
  double static_threshold = 50.0;
  int min_repeat_visits = 3;
  std::string id;
  std::string out;
};

int run_scenario(const ScenarioArgs& args) {
  const auto kind = ltseval::scenario_kind_from_string(args.kind);
  if (!kind || *kind == ltseval::ScenarioKind::Custom)
    throw ltseval::ParameterError("unknown scenario kind '" + args.kind + "'");
  ltseval::ScenarioParams params;
  params.area = parse_area(args.area);
  params.n_eval_poses = args.poses;
  params.nominal_speed_mm_s = args.speed;
  params.seed = args.seed;
  params.id = args.id;
  params.position_tolerance_mm = args.tolerance;
  params.static_speed_threshold_mm_s = args.static_threshold;
  params.min_repeat_visits = args.min_repeat_visits;

  const ltseval::TestCase tc = ltseval::build_scenario(*kind, params);
  const ltseval::ValidationReport report = ltseval::validate_test_case(tc);
  print_validation(report);
  if (!report.ok()) return kExitValidation;
  ltseval::write_test_case(args.out, tc);
  std::cout << "wrote " << args.out << " (" << tc.eval_poses.size() << " evaluation poses, "
            << tc.waypoints.size() << " waypoints)\n";
  return kExitOk;
}

struct SimulateArgs {
  std::string testcase;
  std::string error_model;
  std::int64_t seed = -1;  // <0: keep the model's seed
  double gt_rate_hz = 100.0;
  std::string out;
};

int run_simulate(const SimulateArgs& args) {
  const ltseval::TestCase tc = ltseval::read_test_case(args.testcase);
  const ltseval::ValidationReport report = ltseval::validate_test_case(tc);
  print_validation(report);
  if (!report.ok()) return kExitValidation;

  ltseval::ErrorModel em = ltseval::read_error_model(args.error_model);
  if (args.seed >= 0) em.seed = static_cast<std::uint64_t>(args.seed);
  ltseval::ExecutionOptions opts;
  opts.gt_rate_hz = args.gt_rate_hz;
  const ltseval::ExperimentData data = ltseval::run_experiment(tc, em, opts);

  const fs::path out_dir(args.out);
  fs::create_directories(out_dir);
  ltseval::write_test_case(out_dir / "test_case.yaml", tc);
  ltseval::write_trajectory_csv(out_dir / "gt.csv", data.gt);
  ltseval::write_trajectory_csv(out_dir / "lts.csv", data.lts);
  ltseval::ExperimentManifest manifest;
  manifest.test_case_id = data.test_case_id;
  manifest.test_case_path = "test_case.yaml";
  manifest.gt_csv = "gt.csv";
  manifest.lts_csv = "lts.csv";
  manifest.seed = data.seed;
  manifest.error_model_hash = data.error_model_hash;
  manifest.static_gate_log = data.static_gate_log;
  ltseval::write_experiment_manifest(out_dir / "experiment.yaml", manifest);
  std::cout << "wrote " << (out_dir / "experiment.yaml").string() << " (gt " << data.gt.size()
            << " samples, lts " << data.lts.size() << " samples)\n";
  return kExitOk;
}

ltseval::ExperimentData load_experiment(const fs::path& manifest_path, ltseval::TestCase& tc_out) {
  const ltseval::ExperimentManifest m = ltseval::read_experiment_manifest(manifest_path);
  const fs::path dir = manifest_path.parent_path();
  tc_out = ltseval::read_test_case(dir / m.test_case_path);
  ltseval::ExperimentData data;
  data.test_case_id = m.test_case_id;
  data.seed = m.seed;
  data.error_model_hash = m.error_model_hash;
  data.gt = ltseval::read_trajectory_csv(dir / m.gt_csv, ltseval::TrajectorySource::GroundTruth);
  data.lts = ltseval::read_trajectory_csv(dir / m.lts_csv, ltseval::TrajectorySource::Lts);
  data.static_gate_log = m.static_gate_log;
  return data;
}

struct EvaluateArgs {
  std::string experiment;
  std::string quantiles = "0.5,0.95,0.999,0.9999";
  double latency_threshold = 250.0;
  double offset_window_s = 0.5;
  std::string out;
};

int run_evaluate(const EvaluateArgs& args) {
  ltseval::TestCase tc;
  const ltseval::ExperimentData data = load_experiment(args.experiment, tc);
  ltseval::EvaluationOptions opts;
  opts.requested_quantiles = parse_quantiles(args.quantiles);
  opts.latency_speed_threshold_mm_s = args.latency_threshold;
  opts.clock_offset_window_s = args.offset_window_s;
  const ltseval::PerformanceResults res = ltseval::evaluate_performance(data, tc, opts);
  ltseval::write_performance_results(args.out, res);
  std::cout << "wrote " << args.out << " (" << res.matched_sample_count << " matched samples, "
            << res.missed_visit_count << " missed visits)\n";
  return kExitOk;
}

struct MatchArgs {
  std::vector<std::string> profiles;
  std::vector<std::string> results;
  std::string out;
};

int run_match(const MatchArgs& args) {
  std::vector<std::pair<std::string, ltseval::PerformanceResults>> results;
  for (const std::string& spec : args.results) {
    std::string name, path;
    const auto eq = spec.find('=');
    if (eq != std::string::npos) {
      name = spec.substr(0, eq);
      path = spec.substr(eq + 1);
    } else {
      path = spec;
      name = fs::path(spec).stem().string();
    }
    results.emplace_back(name, ltseval::read_performance_results(path));
  }
  std::vector<ltseval::EvaluationResults> evals;
  for (const std::string& p : args.profiles) {
    const ltseval::ApplicationProfile profile = ltseval::read_profile(p);
    ltseval::EvaluationResults ev = ltseval::match_requirements(profile, results);
    ev.benefit_ranking = ltseval::benefit_analysis(ev);
    evals.push_back(std::move(ev));
  }
  ltseval::write_evaluations(args.out, evals);
  for (const ltseval::EvaluationResults& ev : evals) {
    std::cout << ev.application << ": overall suitable {";
    for (std::size_t i = 0; i < ev.overall_suitable.size(); ++i)
      std::cout << (i ? ", " : "") << ev.overall_suitable[i];
    std::cout << "}\n";
  }
  return kExitOk;
}

struct ReportArgs {
  std::string results;  // experiment manifest
  std::string out;      // directory
};

int run_report(const ReportArgs& args) {
  ltseval::TestCase tc;
  const ltseval::ExperimentData data = load_experiment(args.results, tc);
  const auto visits = ltseval::find_visits(data.gt, tc.eval_poses);
  const auto match = ltseval::match_lts(data.lts, visits, tc.conditions.max_match_gap_s);
  if (match.matched.empty()) {
    std::cerr << "error: no matched samples, nothing to plot\n";
    return kExitValidation;
  }
  const ltseval::ErrorSamples errors = ltseval::compute_pose_errors(match.matched);
  const fs::path out_dir(args.out);
  fs::create_directories(out_dir);
  ltseval::write_file_atomic(out_dir / "error_scatter.csv", ltseval::error_scatter_csv(errors));
  ltseval::write_file_atomic(out_dir / "error_over_time.csv",
                             ltseval::error_over_time_csv(errors));
  std::cout << "wrote " << (out_dir / "error_scatter.csv").string() << " and "
            << (out_dir / "error_over_time.csv").string() << "\n";
  return kExitOk;
}

int run_pipeline(const std::string& manifest_path) {
  const fs::path mpath(manifest_path);
  const ltseval::RunManifest m = ltseval::read_run_manifest(mpath);
  const fs::path base = mpath.parent_path();
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };

  const ltseval::TestCase tc = ltseval::read_test_case(resolve(m.test_case));
  const ltseval::ValidationReport report = ltseval::validate_test_case(tc);
  print_validation(report);
  if (!report.ok()) return kExitValidation;

  ltseval::ExperimentData data;
  if (m.error_model) {
    ltseval::ErrorModel em = ltseval::read_error_model(resolve(*m.error_model));
    if (m.seed) em.seed = *m.seed;
    ltseval::ExecutionOptions opts;
    if (m.gt_rate_hz) opts.gt_rate_hz = *m.gt_rate_hz;
    data = ltseval::run_experiment(tc, em, opts);
  } else {
    data.test_case_id = tc.id;
    data.gt = ltseval::read_trajectory_csv(resolve(*m.gt_csv), ltseval::TrajectorySource::GroundTruth);
    data.lts = ltseval::read_trajectory_csv(resolve(*m.lts_csv), ltseval::TrajectorySource::Lts);
  }

  const fs::path out_dir = resolve(m.output_dir);
  fs::create_directories(out_dir);
  ltseval::write_test_case(out_dir / "test_case.yaml", tc);
  ltseval::write_trajectory_csv(out_dir / "gt.csv", data.gt);
  ltseval::write_trajectory_csv(out_dir / "lts.csv", data.lts);
  ltseval::ExperimentManifest manifest;
  manifest.test_case_id = data.test_case_id;
  manifest.test_case_path = "test_case.yaml";
  manifest.gt_csv = "gt.csv";
  manifest.lts_csv = "lts.csv";
  manifest.seed = data.seed;
  manifest.error_model_hash = data.error_model_hash;
  manifest.static_gate_log = data.static_gate_log;
  ltseval::write_experiment_manifest(out_dir / "experiment.yaml", manifest);

  ltseval::EvaluationOptions opts;
  if (!m.quantiles.empty()) opts.requested_quantiles = m.quantiles;
  if (m.latency_speed_threshold_mm_s)
    opts.latency_speed_threshold_mm_s = *m.latency_speed_threshold_mm_s;
  if (m.dynamic_speed_threshold_mm_s)
    opts.offset.dynamic_speed_threshold_mm_s = *m.dynamic_speed_threshold_mm_s;
  const ltseval::PerformanceResults res = ltseval::evaluate_performance(data, tc, opts);
  ltseval::write_performance_results(out_dir / "performance.yaml", res);

  const auto visits = ltseval::find_visits(data.gt, tc.eval_poses);
  const auto match = ltseval::match_lts(data.lts, visits, tc.conditions.max_match_gap_s);
  const ltseval::ErrorSamples errors = ltseval::compute_pose_errors(match.matched);
  ltseval::write_file_atomic(out_dir / "error_scatter.csv", ltseval::error_scatter_csv(errors));
  ltseval::write_file_atomic(out_dir / "error_over_time.csv",
                             ltseval::error_over_time_csv(errors));

  if (!m.profiles.empty()) {
    std::vector<std::pair<std::string, ltseval::PerformanceResults>> results{
        {tc.id, res}};
    std::vector<ltseval::EvaluationResults> evals;
    for (const std::string& p : m.profiles) {
      const ltseval::ApplicationProfile profile = ltseval::read_profile(resolve(p));
      ltseval::EvaluationResults ev = ltseval::match_requirements(profile, results);
      ev.benefit_ranking = ltseval::benefit_analysis(ev);
      evals.push_back(std::move(ev));
    }
    ltseval::write_evaluations(out_dir / "evaluation.yaml", evals);
  }
  std::cout << "pipeline complete: " << out_dir.string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Test & evaluation toolkit for indoor localization and tracking systems"};
  app.require_subcommand(1);

  ScenarioArgs scenario_args;
  CLI::App* scenario = app.add_subcommand("scenario", "Build and validate a standard test case");
  scenario->add_option("--kind", scenario_args.kind,
                       "standard_dynamic | standard_static | repeatability | latency | "
                       "coordinate_alignment")
      ->required();
  scenario->add_option("--area", scenario_args.area, "test area, WIDTHxDEPTH in metres");
  scenario->add_option("--poses", scenario_args.poses, "number of evaluation poses");
  scenario->add_option("--seed", scenario_args.seed, "generator seed");
  scenario->add_option("--speed", scenario_args.speed, "nominal speed in mm/s");
  scenario->add_option("--tolerance-mm", scenario_args.tolerance, "evaluation pose tolerance");
  scenario->add_option("--static-threshold", scenario_args.static_threshold,
                       "static speed gate in mm/s");
  scenario->add_option("--min-repeat-visits", scenario_args.min_repeat_visits,
                       "visits per pose for the repeatability scenario");
  scenario->add_option("--id", scenario_args.id, "test case id");
  scenario->add_option("--out", scenario_args.out, "output test case YAML")->required();

  SimulateArgs simulate_args;
  CLI::App* simulate = app.add_subcommand("simulate", "Run a synthetic experiment");
  simulate->add_option("--testcase", simulate_args.testcase, "test case YAML")->required();
  simulate->add_option("--error-model", simulate_args.error_model, "error model YAML")->required();
  simulate->add_option("--seed", simulate_args.seed, "override the error model seed");
  simulate->add_option("--gt-rate", simulate_args.gt_rate_hz, "GT sampling rate in Hz");
  simulate->add_option("--out", simulate_args.out, "output directory")->required();

  EvaluateArgs evaluate_args;
  CLI::App* evaluate = app.add_subcommand("evaluate", "Compute performance metrics");
  evaluate->add_option("--experiment", evaluate_args.experiment, "experiment manifest YAML")
      ->required();
  evaluate->add_option("--quantiles", evaluate_args.quantiles, "comma-separated quantiles");
  evaluate->add_option("--latency-threshold", evaluate_args.latency_threshold,
                       "GT speed threshold for latency samples, mm/s");
  evaluate->add_option("--offset-window", evaluate_args.offset_window_s,
                       "clock offset search window, s");
  evaluate->add_option("--out", evaluate_args.out, "output performance YAML")->required();

  MatchArgs match_args;
  CLI::App* match = app.add_subcommand("match", "Match requirements against performance results");
  match->add_option("--profile", match_args.profiles, "application profile YAML (repeatable)")
      ->required();
  match->add_option("--results", match_args.results,
                    "performance results YAML, optionally NAME=PATH (repeatable)")
      ->required();
  match->add_option("--out", match_args.out, "output evaluation YAML")->required();

  ReportArgs report_args;
  CLI::App* report = app.add_subcommand("report", "Export plot data from an experiment");
  report->add_option("--results", report_args.results, "experiment manifest YAML")->required();
  report->add_option("--out", report_args.out, "output directory")->required();

  std::string pipeline_manifest;
  CLI::App* pipeline = app.add_subcommand("pipeline", "Scenario-to-evaluation in one run");
  pipeline->add_option("--manifest", pipeline_manifest, "run manifest YAML")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitIo;
  }

  try {
    if (scenario->parsed()) return run_scenario(scenario_args);
    if (simulate->parsed()) return run_simulate(simulate_args);
    if (evaluate->parsed()) return run_evaluate(evaluate_args);
    if (match->parsed()) return run_match(match_args);
    if (report->parsed()) return run_report(report_args);
    if (pipeline->parsed()) return run_pipeline(pipeline_manifest);
  } catch (const ltseval::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ltseval::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ltseval::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitIo;
}
