#include "accpen/harness.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace accpen {

namespace {

namespace fs = std::filesystem;

std::string csv_path(const std::string& out_dir, const std::string& label) {
  return (fs::path(out_dir) / (label + ".csv")).string();
}

void ensure_out_dir(const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw SpecError("cannot create output directory " + out_dir + ": " + ec.message());
}

double read_f_star_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open optimal-value file: " + path);
  if (fs::path(path).extension() == ".json") {
    try {
      const nlohmann::json j = nlohmann::json::parse(in);
      return j.at("f_star").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw SpecError("bad optimal-value file " + path + ": " + e.what());
    }
  }
  double value;
  if (!(in >> value)) throw SpecError("optimal-value file holds no number: " + path);
  return value;
}

/// Resolved solver settings for one method: experiment budget unless the
/// method pinned its own, default step 1/L, reference optimum for the gap
/// column.
SolverConfig finalize_config(RunContext& ctx, const MethodSpec& method) {
  SolverConfig config = method.config;
  if (!method.has_max_iter) config.max_iter = ctx.spec.iters;
  if (std::isfinite(ctx.f_star)) config.f_star = ctx.f_star;
  if (config.alpha <= 0.0) config.alpha = 1.0 / ensure_lipschitz(ctx);
  if (config.variant == SolverVariant::kNesterovStrong) {
    if (config.lipschitz_L <= 0.0) config.lipschitz_L = ensure_lipschitz(ctx);
    if (config.strong_s <= 0.0 &&
        ctx.policy.kind == EpsilonPolicy::Kind::kStrongBound)
      config.strong_s = ctx.policy.strong_s;
    if (config.strong_s <= 0.0)
      throw SpecError("method '" + method.label + "' needs strong_s > 0");
  }
  if (config.variant == SolverVariant::kSaddlePoint && config.epsilon <= 0.0)
    config.epsilon = ctx.epsilon;
  return config;
}

RunTrace dispatch(RunContext& ctx, const SolverConfig& config) {
  const PenaltyOracle oracle(ctx.problem, ctx.epsilon);
  switch (config.variant) {
    case SolverVariant::kNesterovConvex:
      return nesterov_convex(oracle, ctx.x0, config);
    case SolverVariant::kNesterovStrong:
      return nesterov_strong(oracle, ctx.x0, config.strong_s, config.lipschitz_L,
                             config);
    case SolverVariant::kGradientDescent:
      return gradient_descent(oracle, ctx.x0, config);
    case SolverVariant::kSaddlePoint:
      return saddle_point(ctx.problem, ctx.x0,
                          Vector::Zero(ctx.problem.num_constraints()), config,
                          &oracle);
  }
  throw std::logic_error("unhandled solver variant");
}

void write_reference_json(const RunContext& ctx, const std::string& out_dir) {
  if (!std::isfinite(ctx.f_star)) return;
  nlohmann::ordered_json j;
  j["f_star"] = ctx.f_star;
  j["source"] = ctx.f_star_source;
  if (ctx.f_star_source == "reference_run") {
    j["grad_tol"] = 1e-12;
    j["iterations"] = ctx.f_star_iterations;
  }
  std::ofstream out((fs::path(out_dir) / "reference.json").string());
  if (out) out << j.dump(2) << "\n";
}

}  // namespace

LoadedExperiment load_experiment(const std::string& path) {
  ExperimentSpecData spec = load_experiment_spec(path);
  ProblemSpecData problem_spec = load_problem_spec(spec.problem_path);
  Problem problem = build_problem(problem_spec);
  return LoadedExperiment{std::move(spec), std::move(problem_spec),
                          std::move(problem)};
}

Vector resolve_start(const Problem& problem, const std::string& start) {
  if (start == "feasible")
    return project_to_feasible(problem, problem.domain().center());
  if (start.rfind("random:", 0) == 0) {
    std::uint64_t seed = 0;
    try {
      seed = std::stoull(start.substr(7));
    } catch (const std::exception&) {
      throw SpecError("bad start seed in '" + start + "'");
    }
    SeededRng rng(seed);
    const BoxDomain& d = problem.domain();
    Vector x(problem.dim());
    for (int i = 0; i < problem.dim(); ++i) {
      if (std::isfinite(d.lower(i)) && std::isfinite(d.upper(i)))
        x(i) = rng.uniform(d.lower(i), d.upper(i));
      else
        x(i) = rng.normal();
    }
    return x;  // deliberately not projected: infeasible starts are a use case
  }
  std::ifstream in(start);
  if (!in) throw SpecError("cannot open start point file: " + start);
  std::vector<double> values;
  double v;
  while (in >> v) values.push_back(v);
  if (static_cast<int>(values.size()) != problem.dim()) {
    std::ostringstream msg;
    msg << "start point file " << start << " has " << values.size()
        << " values, problem dimension is " << problem.dim();
    throw SpecError(msg.str());
  }
  return Eigen::Map<const Vector>(values.data(), values.size());
}

double ensure_lipschitz(RunContext& ctx) {
  if (!ctx.lipschitz) {
    std::vector<Vector> samples;
    if (!ctx.problem.objective().constant_hessian())
      samples = make_domain_samples(ctx.problem.domain(), ctx.policy.sampler);
    const PenaltyOracle oracle(ctx.problem, ctx.epsilon);
    ctx.lipschitz = estimate_lipschitz(oracle, samples);
  }
  return ctx.lipschitz->L;
}

RunContext prepare_run(const LoadedExperiment& loaded) {
  RunContext ctx{loaded.problem, loaded.spec,
                 parse_epsilon_policy(loaded.spec.epsilon_policy)};
  ctx.policy.sampler.seed = ctx.spec.seed;
  EpsilonResolution res = resolve_epsilon(ctx.problem, ctx.policy);
  ctx.epsilon = res.epsilon;
  ctx.epsilon_provenance = std::move(res.provenance);
  ctx.certificate = std::move(res.certificate);
  ctx.x0 = resolve_start(ctx.problem, ctx.spec.start);

  const std::string& source = ctx.spec.optimal_value;
  if (source == "kkt_oracle") {
    if (!ctx.problem.objective().constant_hessian())
      throw SpecError("optimal_value kkt_oracle needs a quadratic objective");
    const Vector zero = Vector::Zero(ctx.problem.dim());
    KKTPoint kkt;
    try {
      kkt = solve_kkt_quadratic(ctx.problem.hessian(zero),
                                ctx.problem.gradient(zero),
                                ctx.problem.constraint_matrix(),
                                ctx.problem.constraint_rhs());
    } catch (const std::runtime_error& e) {
      throw SpecError(std::string("optimal_value kkt_oracle: ") + e.what());
    }
    ctx.f_star = ctx.problem.value(kkt.x);
    ctx.f_star_source = "kkt_oracle";
  } else if (source == "reference_run") {
    // High-budget run; the penalty value at its terminal point is a
    // second-order-accurate estimate of f* (the penalty gradient vanishes
    // at the constrained minimizer).
    SolverConfig ref;
    ref.variant = SolverVariant::kNesterovConvex;
    ref.max_iter = 10 * ctx.spec.iters;
    ref.grad_tol = 1e-12;
    ref.record_every = std::max(1, ref.max_iter);
    ref.alpha = 1.0 / ensure_lipschitz(ctx);
    const PenaltyOracle oracle(ctx.problem, ctx.epsilon);
    const RunTrace trace = nesterov_convex(oracle, ctx.x0, ref);
    ctx.f_star = oracle.value(trace.final_x);
    ctx.f_star_source = "reference_run";
    ctx.f_star_iterations = trace.iterations;
  } else if (source.rfind("file:", 0) == 0) {
    ctx.f_star = read_f_star_file(source.substr(5));
    ctx.f_star_source = "file";
  } else {
    throw SpecError("unknown optimal_value source '" + source + "'");
  }
  return ctx;
}

MethodOutcome run_single_method(RunContext& ctx, const MethodSpec& method,
                                const std::string& out_dir) {
  ensure_out_dir(out_dir);
  const SolverConfig config = finalize_config(ctx, method);
  MethodOutcome outcome;
  outcome.label = method.label;
  outcome.trace = dispatch(ctx, config);
  outcome.trace_path = csv_path(out_dir, method.label);
  write_trace_csv(outcome.trace, outcome.trace_path);
  write_reference_json(ctx, out_dir);
  outcome.final_residual = ctx.problem.residual(outcome.trace.final_x).norm();
  if (std::isfinite(ctx.f_star))
    outcome.final_gap = std::abs(ctx.problem.value(outcome.trace.final_x) - ctx.f_star);
  return outcome;
}

BenchResult run_bench(RunContext& ctx, const std::string& out_dir, double gap_tol) {
  ensure_out_dir(out_dir);
  BenchResult result;
  result.f_star = ctx.f_star;
  result.f_star_source = ctx.f_star_source;
  result.epsilon = ctx.epsilon;
  write_reference_json(ctx, out_dir);

  for (const MethodSpec& method : ctx.spec.methods) {
    BenchRow row;
    row.label = method.label;
    try {
      MethodOutcome outcome = run_single_method(ctx, method, out_dir);
      row.status = outcome.trace.status == RunStatus::kConverged ? "converged"
                                                                 : "max_iter";
      row.iterations = outcome.trace.iterations;
      row.final_gap = outcome.final_gap;
      row.final_residual = outcome.final_residual;
      row.trace_path = outcome.trace_path;
      if (std::isfinite(ctx.f_star)) {
        for (const TraceRecord& rec : outcome.trace.records) {
          if (std::abs(rec.f - ctx.f_star) <= gap_tol) {
            row.iters_to_tol = rec.k;
            break;
          }
        }
      }
      if (outcome.trace.iterations > 0 && !outcome.trace.records.empty())
        row.mean_iter_time_s =
            outcome.trace.records.back().wall_time_s / outcome.trace.iterations;
    } catch (const RefusalError& e) {
      row.status = "refused";
      row.error = e.what();
    } catch (const DivergenceError& e) {
      row.status = "diverged";
      row.error = e.what();
    } catch (const std::exception& e) {
      row.status = "error";
      row.error = e.what();
    }
    result.rows.push_back(std::move(row));
  }

  result.summary_path = (fs::path(out_dir) / "summary.csv").string();
  std::ofstream out(result.summary_path);
  if (!out) throw SpecError("cannot write " + result.summary_path);
  out << "label,status,iterations,iters_to_tol,mean_iter_time_s,final_gap,"
         "final_residual\n";
  char buf[256];
  for (const BenchRow& row : result.rows) {
    std::snprintf(buf, sizeof buf, "%s,%s,%ld,%ld,%.17g,%.17g,%.17g\n",
                  row.label.c_str(), row.status.c_str(), row.iterations,
                  row.iters_to_tol, row.mean_iter_time_s, row.final_gap,
                  row.final_residual);
    out << buf;
  }
  return result;
}

std::string format_bench_table(const BenchResult& result) {
  std::ostringstream out;
  out << std::left << std::setw(26) << "method" << std::right << std::setw(10)
      << "status" << std::setw(12) << "iters" << std::setw(14) << "to_gap_tol"
      << std::setw(16) << "s/iter" << std::setw(14) << "final_gap"
      << std::setw(14) << "residual" << "\n";
  for (const BenchRow& row : result.rows) {
    out << std::left << std::setw(26) << row.label << std::right << std::setw(10)
        << row.status << std::setw(12) << row.iterations << std::setw(14)
        << row.iters_to_tol << std::setw(16) << std::scientific
        << std::setprecision(3) << row.mean_iter_time_s << std::setw(14)
        << row.final_gap << std::setw(14) << row.final_residual
        << std::defaultfloat << "\n";
    if (!row.error.empty()) out << "    " << row.error << "\n";
  }
  return out.str();
}

}  // namespace accpen
