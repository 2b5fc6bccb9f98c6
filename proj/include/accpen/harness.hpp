#pragma once

#include "accpen/spec_io.hpp"

namespace accpen {

struct LoadedExperiment {
  ExperimentSpecData spec;
  ProblemSpecData problem_spec;
  Problem problem;
};

LoadedExperiment load_experiment(const std::string& path);

/// Start-point rules: "feasible" projects the box midpoint onto {Ax=b};
/// "random:<seed>" draws uniformly from the box (standard normal along
/// unbounded axes) without projecting; anything else is read as a text file
/// of whitespace-separated coordinates.
Vector resolve_start(const Problem& problem, const std::string& start);

/// Everything shared by the methods of one experiment: resolved epsilon,
/// common start point, reference optimum.
struct RunContext {
  Problem problem;
  ExperimentSpecData spec;
  EpsilonPolicy policy;
  double epsilon = 0.0;
  std::string epsilon_provenance;
  std::optional<ConvexityCertificate> certificate;
  Vector x0;
  double f_star = std::numeric_limits<double>::quiet_NaN();
  std::string f_star_source;
  long f_star_iterations = 0;  // reference_run only
  std::optional<LipschitzEstimate> lipschitz;  // filled on demand
};

/// Resolves epsilon (throws RefusalError on a declined certificate), the
/// start point, and the reference optimum per spec.optimal_value.
RunContext prepare_run(const LoadedExperiment& loaded);

/// Lipschitz constant for default step sizes, computed once per context.
double ensure_lipschitz(RunContext& ctx);

struct MethodOutcome {
  std::string label;
  RunTrace trace;
  std::string trace_path;
  double final_gap = std::numeric_limits<double>::quiet_NaN();  // |f - f_star|
  double final_residual = 0.0;
};

/// Runs one method, writes <out_dir>/<label>.csv, returns the summary numbers.
MethodOutcome run_single_method(RunContext& ctx, const MethodSpec& method,
                                const std::string& out_dir);

struct BenchRow {
  std::string label;
  std::string status;  // converged | max_iter | refused | diverged | error
  long iterations = 0;
  long iters_to_tol = -1;  // first recorded k with |f - f_star| <= gap_tol
  double mean_iter_time_s = std::numeric_limits<double>::quiet_NaN();
  double final_gap = std::numeric_limits<double>::quiet_NaN();
  double final_residual = std::numeric_limits<double>::quiet_NaN();
  std::string trace_path;
  std::string error;
};

struct BenchResult {
  std::vector<BenchRow> rows;
  double f_star = std::numeric_limits<double>::quiet_NaN();
  std::string f_star_source;
  double epsilon = 0.0;
  std::string summary_path;
};

/// Runs every method on the same instance and start point; one CSV per
/// method plus <out_dir>/summary.csv. A method failure is recorded in its row
/// and does not abort the other methods.
BenchResult run_bench(RunContext& ctx, const std::string& out_dir,
                      double gap_tol = 1e-6);

/// Renders the comparison table for terminal output.
std::string format_bench_table(const BenchResult& result);

}  // namespace accpen
