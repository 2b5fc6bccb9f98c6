#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "accpen/analysis.hpp"
#include "accpen/problem.hpp"
#include "accpen/solvers.hpp"

namespace accpen {

/// Declarative description of a benchmark instance. Field names as they
/// appear in the JSON files are documented in the README; the loaders reject
/// unknown fields so typos fail loudly instead of silently using defaults.
struct ProblemSpecData {
  std::string kind;  // example1 | quadratic | exp_benchmark | custom_quadratic_data

  // quadratic (seeded random instance) and exp_benchmark
  int dimension = 0;
  std::uint64_t seed = 0;

  // quadratic only
  int num_constraints = 0;

  // exp_benchmark only; beta/gamma default to the seeded streams when absent
  double rhs = 100.0;
  std::optional<Vector> beta;
  std::optional<Vector> gamma;

  // custom_quadratic_data only
  std::optional<Matrix> Q;
  std::optional<Vector> h;
  std::optional<Matrix> A;
  std::optional<Vector> b;

  // any kind: overrides the fixture's default box
  std::optional<BoxDomain> domain;
};

/// One solver entry of an experiment. label defaults to the variant name
/// (with an "_augmented" suffix for the augmented saddle point) and is used
/// for trace file names and the comparison table.
struct MethodSpec {
  SolverConfig config;
  std::string label;
  bool has_max_iter = false;  // true when the file pinned its own budget
};

/// A benchmark run: problem reference, epsilon policy, methods, budget,
/// where the reference optimum comes from, start point rule, output location.
struct ExperimentSpecData {
  std::string problem_path;  // resolved against the spec file's directory on load
  std::string epsilon_policy = "fixed:1";
  std::vector<MethodSpec> methods;
  int iters = 10000;
  std::string optimal_value = "reference_run";  // kkt_oracle | reference_run | file:<path>
  std::string start = "feasible";               // feasible | random:<seed> | <point-file>
  std::string out_dir = ".";
  std::uint64_t seed = 0;
};

ProblemSpecData parse_problem_spec(const nlohmann::json& j);
ProblemSpecData load_problem_spec(const std::string& path);
nlohmann::ordered_json problem_spec_to_json(const ProblemSpecData& spec);
void save_problem_spec(const ProblemSpecData& spec, const std::string& path);

/// Instantiates the described Problem (seeded streams for unstated data).
Problem build_problem(const ProblemSpecData& spec);

ExperimentSpecData parse_experiment_spec(const nlohmann::json& j);
/// Loads and resolves problem_path relative to the experiment file's directory.
ExperimentSpecData load_experiment_spec(const std::string& path);
nlohmann::ordered_json experiment_spec_to_json(const ExperimentSpecData& spec);
void save_experiment_spec(const ExperimentSpecData& spec, const std::string& path);

/// "fixed:<eps>" | "theorem" | "strong:<s>" (c estimated) | "strong:<c>:<s>"
/// | "quadratic".
EpsilonPolicy parse_epsilon_policy(const std::string& text);

SolverVariant parse_solver_variant(const std::string& name);

nlohmann::ordered_json certificate_to_json(const ConvexityCertificate& cert);
void save_certificate(const ConvexityCertificate& cert, const std::string& path);

/// CSV with the exact header k,f,f_eps,gap,residual,wall_time_s; doubles are
/// written with 17 significant digits so non-timing columns reproduce exactly.
void write_trace_csv(const RunTrace& trace, const std::string& path);

}  // namespace accpen
