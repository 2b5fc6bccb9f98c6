// Command-line front end: epsilon / solve / bench / check-convexity.
// Exit codes: 0 ok, 2 refusal or invalid input, 3 divergence.

#include <cmath>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "accpen/harness.hpp"

namespace {

using namespace accpen;

struct CliOptions {
  std::string problem_file;
  std::string epsilon = "auto";
  double alpha = 0.0;
  int iters = 0;
  std::string start;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string method = "nesterov_convex";
  bool augmented = false;
  double strong_s = 0.0;
  double dual_step = 0.0;
  double grad_tol = std::numeric_limits<double>::quiet_NaN();
  int record_every = 0;
  double check_s = 0.0;
  int samples = 0;
};

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open file: " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw SpecError("failed to parse " + path + ": " + e.what());
  }
}

bool is_experiment_json(const nlohmann::json& j) {
  return j.is_object() && j.contains("problem") && j.contains("methods");
}

std::string auto_policy(const Problem& problem, const std::string& requested) {
  if (requested != "auto") return requested;
  return problem.objective().constant_hessian() ? "quadratic" : "theorem";
}

void print_certificate(const ConvexityCertificate& cert) {
  if (cert.for_all_epsilon) {
    std::cout << "convex for all epsilon (linear objective)\n";
    return;
  }
  if (cert.kind == CertificateKind::kStronglyConvex)
    std::cout << "epsilon_bar_s = " << cert.epsilon_bound
              << "  (c = " << cert.strong_c << ", s = " << cert.strong_s << ")\n";
  else
    std::cout << "epsilon_bar = " << cert.epsilon_bound << "\n";
  std::cout << "samples: " << cert.samples.size()
            << ", lambda_min(AA^T) = " << cert.lambda_min_aat << "\n";
  if (cert.worst_sample >= 0 &&
      cert.worst_sample < static_cast<int>(cert.samples.size())) {
    const SampleRecord& rec = cert.samples[cert.worst_sample];
    std::cout << "worst sample " << cert.worst_sample << ": bound = " << rec.bound
              << ", lambda_min(hess f - W) = " << rec.lambda_min_hw << ", x = [";
    for (Eigen::Index i = 0; i < rec.x.size() && i < 8; ++i)
      std::cout << (i ? ", " : "") << rec.x(i);
    if (rec.x.size() > 8) std::cout << ", ...";
    std::cout << "]\n";
  }
  std::cout << "note: " << cert.note << "\n";
}

/// Builds an ExperimentSpecData either from an experiment file or by wrapping
/// a bare problem file with the CLI-provided method; then applies overrides.
ExperimentSpecData assemble_experiment(const CliOptions& opt, bool allow_synth) {
  const nlohmann::json j = read_json(opt.problem_file);
  ExperimentSpecData spec;
  if (is_experiment_json(j)) {
    spec = load_experiment_spec(opt.problem_file);
  } else if (allow_synth) {
    spec.problem_path = opt.problem_file;
    MethodSpec m;
    m.config.variant = parse_solver_variant(opt.method);
    m.config.augmented = opt.augmented;
    m.label = opt.method;
    if (m.config.variant == SolverVariant::kSaddlePoint && opt.augmented)
      m.label += "_augmented";
    spec.methods.push_back(std::move(m));
    spec.out_dir = ".";
    // A problem file carries no epsilon policy or optimal-value source;
    // default to the certified bound and the cheap exact oracle when the
    // objective admits them.  The KKT oracle needs an invertible KKT system,
    // so it is reserved for constant Hessians that are positive definite.
    const Problem probed = build_problem(parse_problem_spec(j));
    const bool quadratic = probed.objective().constant_hessian();
    bool spd = false;
    if (quadratic) {
      const Matrix q = probed.hessian(Vector::Zero(probed.dim()));
      spd = Eigen::LLT<Matrix>(q).info() == Eigen::Success;
    }
    spec.epsilon_policy = quadratic ? "quadratic" : "theorem";
    spec.optimal_value = spd ? "kkt_oracle" : "reference_run";
  } else {
    throw SpecError(opt.problem_file +
                    " is not an experiment spec (bench needs 'problem' and "
                    "'methods' fields)");
  }

  if (opt.epsilon != "auto") spec.epsilon_policy = opt.epsilon;
  if (opt.iters > 0) spec.iters = opt.iters;
  if (!opt.start.empty()) spec.start = opt.start;
  if (!opt.out_dir.empty()) spec.out_dir = opt.out_dir;
  if (opt.seed_given) spec.seed = opt.seed;
  for (MethodSpec& m : spec.methods) {
    if (opt.alpha > 0.0) m.config.alpha = opt.alpha;
    if (opt.strong_s > 0.0) m.config.strong_s = opt.strong_s;
    if (opt.dual_step > 0.0) m.config.dual_step = opt.dual_step;
    if (!std::isnan(opt.grad_tol)) m.config.grad_tol = opt.grad_tol;
    if (opt.record_every > 0) m.config.record_every = opt.record_every;
  }
  return spec;
}

RunContext make_context(ExperimentSpecData spec) {
  ProblemSpecData pd = load_problem_spec(spec.problem_path);
  Problem problem = build_problem(pd);
  LoadedExperiment loaded{std::move(spec), std::move(pd), std::move(problem)};
  return prepare_run(loaded);
}

int cmd_epsilon(const CliOptions& opt) {
  const ProblemSpecData pd = load_problem_spec(opt.problem_file);
  const Problem problem = build_problem(pd);
  const std::string policy_text = auto_policy(problem, opt.epsilon);
  EpsilonPolicy policy = parse_epsilon_policy(policy_text);
  policy.sampler.seed = opt.seed;
  if (opt.samples > 0) policy.sampler.count = opt.samples;

  if (policy.kind == EpsilonPolicy::Kind::kFixed) {
    std::cout << "epsilon = " << policy.fixed_value << " (fixed; no certificate)\n";
    return 0;
  }
  const EpsilonResolution res = resolve_epsilon(problem, policy);
  print_certificate(*res.certificate);
  const std::string out_dir = opt.out_dir.empty() ? "." : opt.out_dir;
  std::filesystem::create_directories(out_dir);
  const std::string report =
      (std::filesystem::path(out_dir) / "certificate.json").string();
  save_certificate(*res.certificate, report);
  std::cout << "report: " << report << "\n";
  return 0;
}

int cmd_check_convexity(const CliOptions& opt) {
  const Problem problem = build_problem(load_problem_spec(opt.problem_file));
  const std::string policy_text = auto_policy(problem, opt.epsilon);
  EpsilonPolicy policy = parse_epsilon_policy(policy_text);
  policy.sampler.seed = opt.seed;
  if (opt.samples > 0) policy.sampler.count = opt.samples;
  const EpsilonResolution res = resolve_epsilon(problem, policy);

  SamplerConfig sampler = policy.sampler;
  const std::vector<Vector> samples = make_domain_samples(problem.domain(), sampler);
  const PenaltyOracle oracle(problem, res.epsilon);
  const ConvexityReport report = check_convexity_sampled(oracle, samples, opt.check_s);
  std::cout << "epsilon = " << res.epsilon << " (" << res.provenance << ")\n"
            << "samples: " << report.num_samples
            << ", violations: " << report.num_violations
            << ", worst margin: " << report.worst_margin << "\n";
  if (report.num_violations > 0) {
    if (report.worst_sample >= 0) {
      const Vector& x = samples[report.worst_sample];
      std::cout << "worst sample " << report.worst_sample << ": x = [";
      for (Eigen::Index i = 0; i < x.size() && i < 8; ++i)
        std::cout << (i ? ", " : "") << x(i);
      if (x.size() > 8) std::cout << ", ...";
      std::cout << "]\n";
    }
    std::cerr << "refused: sampled penalty Hessian dips below the requested "
                 "curvature\n";
    return 2;
  }
  return 0;
}

int cmd_solve(const CliOptions& opt) {
  ExperimentSpecData spec = assemble_experiment(opt, /*allow_synth=*/true);
  if (spec.methods.size() != 1)
    throw SpecError("solve runs exactly one method; this spec has " +
                    std::to_string(spec.methods.size()) + " (use bench)");
  RunContext ctx = make_context(std::move(spec));
  MethodOutcome outcome =
      run_single_method(ctx, ctx.spec.methods[0], ctx.spec.out_dir);
  std::cout << "method=" << outcome.label << " status="
            << (outcome.trace.status == RunStatus::kConverged ? "converged"
                                                              : "max_iter")
            << " iters=" << outcome.trace.iterations << " epsilon=" << ctx.epsilon
            << " (" << ctx.epsilon_provenance << ")\n";
  std::cout << "gap=" << outcome.final_gap << " residual=" << outcome.final_residual
            << " grad_norm=" << outcome.trace.final_grad_norm << "\n";
  std::cout << "trace: " << outcome.trace_path << "\n";
  for (const std::string& w : outcome.trace.warnings)
    std::cerr << "warning: " << w << "\n";
  return 0;
}

int cmd_bench(const CliOptions& opt) {
  ExperimentSpecData spec = assemble_experiment(opt, /*allow_synth=*/false);
  RunContext ctx = make_context(std::move(spec));
  BenchResult result = run_bench(ctx, ctx.spec.out_dir);
  std::cout << "epsilon = " << result.epsilon << ", f_star = " << result.f_star
            << " (" << result.f_star_source << ")\n";
  std::cout << format_bench_table(result);
  std::cout << "summary: " << result.summary_path << "\n";
  bool any_ok = false, any_diverged = false;
  for (const BenchRow& row : result.rows) {
    if (row.status == "converged" || row.status == "max_iter") any_ok = true;
    if (row.status == "diverged") any_diverged = true;
  }
  if (any_ok) return 0;  // partial results preserved
  return any_diverged ? 3 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact-penalty reformulation toolkit: certificates and solvers "
               "for linearly-constrained convex programs"};
  app.require_subcommand(1);
  CliOptions opt;

  auto add_common = [&opt](CLI::App* cmd, bool with_run_flags) {
    cmd->add_option("--problem", opt.problem_file,
                    "problem or experiment spec file (JSON)")
        ->required();
    cmd->add_option("--epsilon", opt.epsilon,
                    "policy: fixed:<eps> | theorem | strong:<s> | "
                    "strong:<c>:<s> | quadratic | auto");
    cmd->add_option("--seed", opt.seed, "sampler / experiment seed")
        ->each([&opt](const std::string&) { opt.seed_given = true; });
    cmd->add_option("--out", opt.out_dir, "output directory");
    if (with_run_flags) {
      cmd->add_option("--alpha", opt.alpha, "step size (default 1/L)");
      cmd->add_option("--iters", opt.iters, "iteration budget");
      cmd->add_option("--start", opt.start,
                      "feasible | random:<seed> | <point-file>");
    }
  };

  CLI::App* epsilon_cmd =
      app.add_subcommand("epsilon", "compute the convexity bound for epsilon");
  add_common(epsilon_cmd, false);
  epsilon_cmd->add_option("--samples", opt.samples, "certificate sample count");

  CLI::App* solve_cmd = app.add_subcommand("solve", "run one solver, write a trace");
  add_common(solve_cmd, true);
  solve_cmd->add_option("--method", opt.method,
                        "nesterov_convex | nesterov_strong | gradient_descent | "
                        "saddle_point");
  solve_cmd->add_flag("--augmented", opt.augmented, "augmented saddle point");
  solve_cmd->add_option("--strong-s", opt.strong_s, "strong convexity parameter s");
  solve_cmd->add_option("--dual-step", opt.dual_step, "saddle point dual step");
  solve_cmd->add_option("--grad-tol", opt.grad_tol, "gradient stopping threshold");
  solve_cmd->add_option("--record-every", opt.record_every, "trace stride");

  CLI::App* bench_cmd =
      app.add_subcommand("bench", "run all methods of an experiment, compare");
  add_common(bench_cmd, true);

  CLI::App* check_cmd = app.add_subcommand(
      "check-convexity", "sampled eigenvalue check of the penalty Hessian");
  add_common(check_cmd, false);
  check_cmd->add_option("--samples", opt.samples, "certificate sample count");
  check_cmd->add_option("--strong-s", opt.check_s,
                        "required curvature floor (default 0: plain convexity)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (epsilon_cmd->parsed()) return cmd_epsilon(opt);
    if (solve_cmd->parsed()) return cmd_solve(opt);
    if (bench_cmd->parsed()) return cmd_bench(opt);
    if (check_cmd->parsed()) return cmd_check_convexity(opt);
  } catch (const RefusalError& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return 2;
  } catch (const DivergenceError& e) {
    std::cerr << "diverged: " << e.what() << "\n";
    return 3;
  } catch (const SpecError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
