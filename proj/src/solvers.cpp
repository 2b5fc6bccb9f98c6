#include "accpen/solvers.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace accpen {

namespace {

using Clock = std::chrono::steady_clock;

double guard_radius(const Vector& v0) { return 1e8 * (1.0 + v0.norm()); }

void check_iterate(const Vector& v, long iteration, double guard, const char* what) {
  if (v.allFinite() && v.norm() <= guard) return;
  std::ostringstream msg;
  msg << what << " diverged at iteration " << iteration << " (norm ";
  if (v.allFinite())
    msg << v.norm() << " exceeds guard " << guard << ")";
  else
    msg << "non-finite)";
  throw DivergenceError(msg.str(), iteration, v.allFinite() ? v.norm() : std::numeric_limits<double>::infinity());
}

void validate_common(const SolverConfig& config, const Vector& x0, int n) {
  if (x0.size() != n) throw std::invalid_argument("start point has wrong dimension");
  if (!(config.alpha > 0.0)) throw std::invalid_argument("step size alpha must be positive");
  if (config.max_iter < 0) throw std::invalid_argument("max_iter must be non-negative");
  if (config.record_every < 1) throw std::invalid_argument("record_every must be >= 1");
}

TraceRecord make_record(int k, double f, double f_eps, double residual,
                        double wall_time_s, const std::optional<double>& f_star) {
  TraceRecord rec;
  rec.k = k;
  rec.f = f;
  rec.f_eps = f_eps;
  rec.gap = f_star ? f_eps - *f_star : std::numeric_limits<double>::quiet_NaN();
  rec.residual = residual;
  rec.wall_time_s = wall_time_s;
  return rec;
}

enum class MomentumMode { kASequence, kConstant };

/// Shared loop for the three penalty-gradient methods. The gradient is always
/// taken at y; with a zero constant coefficient y coincides with x and the
/// loop is plain gradient descent, expression for expression.
RunTrace run_penalty_loop(const PenaltyOracle& oracle, const Vector& x0,
                          const SolverConfig& config, MomentumMode mode,
                          double constant_coeff) {
  validate_common(config, x0, oracle.problem().dim());

  RunTrace trace;
  if (config.lipschitz_L > 0.0 &&
      config.alpha > (1.0 / config.lipschitz_L) * (1.0 + 1e-12)) {
    std::ostringstream warn;
    warn << "alpha " << config.alpha << " exceeds 1/L = " << 1.0 / config.lipschitz_L;
    trace.warnings.push_back(warn.str());
  }

  Vector x = x0;
  Vector y = x0;
  double a = 1.0;
  const double guard = guard_radius(x0);

  auto record_at = [&](int k, const Vector& point, double wall) {
    const double f = oracle.problem().value(point);
    trace.records.push_back(
        make_record(k, f, oracle.value(point), oracle.residual(point).norm(), wall,
                    config.f_star));
  };

  record_at(0, x, 0.0);
  std::chrono::duration<double> elapsed{0.0};
  double gnorm = std::numeric_limits<double>::quiet_NaN();

  for (int k = 0; k < config.max_iter; ++k) {
    const auto t0 = Clock::now();
    const Vector g = oracle.gradient(y);
    const Vector x_next = y - config.alpha * g;
    double coeff;
    if (config.momentum_override) {
      coeff = *config.momentum_override;
    } else if (mode == MomentumMode::kASequence) {
      const double a_next = nesterov_a_next(a);
      coeff = (a - 1.0) / a_next;
      a = a_next;
    } else {
      coeff = constant_coeff;
    }
    y = x_next + coeff * (x_next - x);
    x = x_next;
    elapsed += Clock::now() - t0;

    check_iterate(x, k + 1, guard, "iterate");
    gnorm = g.norm();
    trace.iterations = k + 1;
    const bool converged = config.grad_tol > 0.0 && gnorm <= config.grad_tol;
    if ((k + 1) % config.record_every == 0 || converged || k + 1 == config.max_iter)
      record_at(k + 1, x, elapsed.count());
    if (converged) {
      trace.status = RunStatus::kConverged;
      break;
    }
  }

  trace.final_x = x;
  trace.final_grad_norm = gnorm;
  return trace;
}

}  // namespace

const char* solver_variant_name(SolverVariant variant) {
  switch (variant) {
    case SolverVariant::kNesterovConvex: return "nesterov_convex";
    case SolverVariant::kNesterovStrong: return "nesterov_strong";
    case SolverVariant::kGradientDescent: return "gradient_descent";
    case SolverVariant::kSaddlePoint: return "saddle_point";
  }
  return "unknown";
}

double strong_momentum(double L, double s) {
  if (!(s > 0.0) || s > L)
    throw std::invalid_argument("strong momentum needs 0 < s <= L");
  const double sqL = std::sqrt(L);
  const double sqs = std::sqrt(s);
  return (sqL - sqs) / (sqL + sqs);
}

double nesterov_a_next(double a) { return 0.5 * (1.0 + std::sqrt(4.0 * a * a + 1.0)); }

RunTrace nesterov_convex(const PenaltyOracle& oracle, const Vector& x0,
                         const SolverConfig& config) {
  return run_penalty_loop(oracle, x0, config, MomentumMode::kASequence, 0.0);
}

RunTrace nesterov_strong(const PenaltyOracle& oracle, const Vector& x0, double s,
                         double L, const SolverConfig& config) {
  return run_penalty_loop(oracle, x0, config, MomentumMode::kConstant,
                          strong_momentum(L, s));
}

RunTrace gradient_descent(const PenaltyOracle& oracle, const Vector& x0,
                          const SolverConfig& config) {
  SolverConfig cfg = config;
  cfg.momentum_override.reset();  // descent has no momentum to override
  return run_penalty_loop(oracle, x0, cfg, MomentumMode::kConstant, 0.0);
}

RunTrace saddle_point(const Problem& problem, const Vector& x0, const Vector& mu0,
                      const SolverConfig& config, const PenaltyOracle* trace_oracle) {
  validate_common(config, x0, problem.dim());
  if (mu0.size() != problem.num_constraints())
    throw std::invalid_argument("dual start point has wrong dimension");
  if (config.augmented && !(config.epsilon > 0.0))
    throw std::invalid_argument("augmented saddle point needs epsilon > 0");
  const double dual_step = config.dual_step > 0.0 ? config.dual_step : config.alpha;

  const Matrix& A = problem.constraint_matrix();
  RunTrace trace;
  Vector x = x0;
  Vector mu = mu0;
  const double guard_x = guard_radius(x0);
  const double guard_mu = guard_radius(mu0);

  auto record_at = [&](int k, double wall) {
    const double f = problem.value(x);
    const double f_eps = trace_oracle ? trace_oracle->value(x) : f;
    trace.records.push_back(
        make_record(k, f, f_eps, problem.residual(x).norm(), wall, config.f_star));
  };

  record_at(0, 0.0);
  std::chrono::duration<double> elapsed{0.0};
  double kkt_norm = std::numeric_limits<double>::quiet_NaN();

  for (int k = 0; k < config.max_iter; ++k) {
    const auto t0 = Clock::now();
    const Vector r = problem.residual(x);
    Vector grad_l = problem.gradient(x) + A.transpose() * mu;
    if (config.augmented) grad_l += (2.0 / config.epsilon) * (A.transpose() * r);
    const Vector x_next = x - config.alpha * grad_l;
    const Vector mu_next = mu + dual_step * r;
    kkt_norm = std::sqrt(grad_l.squaredNorm() + r.squaredNorm());
    x = x_next;
    mu = mu_next;
    elapsed += Clock::now() - t0;

    check_iterate(x, k + 1, guard_x, "primal iterate");
    check_iterate(mu, k + 1, guard_mu, "dual iterate");
    trace.iterations = k + 1;
    const bool converged = config.grad_tol > 0.0 && kkt_norm <= config.grad_tol;
    if ((k + 1) % config.record_every == 0 || converged || k + 1 == config.max_iter)
      record_at(k + 1, elapsed.count());
    if (converged) {
      trace.status = RunStatus::kConverged;
      break;
    }
  }

  trace.final_x = x;
  trace.final_mu = mu;
  trace.final_grad_norm = kkt_norm;
  return trace;
}

EpsilonPolicy EpsilonPolicy::fixed(double eps) {
  EpsilonPolicy p;
  p.kind = Kind::kFixed;
  p.fixed_value = eps;
  return p;
}

EpsilonPolicy EpsilonPolicy::theorem_bound() {
  EpsilonPolicy p;
  p.kind = Kind::kTheoremBound;
  return p;
}

EpsilonPolicy EpsilonPolicy::strong_bound(double c, double s) {
  EpsilonPolicy p;
  p.kind = Kind::kStrongBound;
  p.strong_c = c;
  p.strong_s = s;
  return p;
}

EpsilonPolicy EpsilonPolicy::quadratic_bound() {
  EpsilonPolicy p;
  p.kind = Kind::kQuadraticBound;
  return p;
}

EpsilonResolution resolve_epsilon(const Problem& problem,
                                  const EpsilonPolicy& policy) {
  EpsilonResolution result;
  switch (policy.kind) {
    case EpsilonPolicy::Kind::kFixed:
      if (!(policy.fixed_value > 0.0))
        throw std::invalid_argument("fixed epsilon must be positive");
      result.epsilon = policy.fixed_value;
      result.provenance = "fixed";
      break;
    case EpsilonPolicy::Kind::kTheoremBound: {
      PenaltyOracle probe(problem, 1.0);  // epsilon does not enter the bound
      const std::vector<Vector> samples =
          make_domain_samples(problem.domain(), policy.sampler);
      ConvexityCertificate cert = epsilon_bar(probe, samples);
      if (!cert.assumption_ok) throw RefusalError(refusal_message(cert));
      result.epsilon = cert.epsilon_bound;
      result.provenance = "theorem_bound";
      result.certificate = std::move(cert);
      break;
    }
    case EpsilonPolicy::Kind::kStrongBound: {
      PenaltyOracle probe(problem, 1.0);
      const std::vector<Vector> samples =
          make_domain_samples(problem.domain(), policy.sampler);
      double c = policy.strong_c;
      if (!(c > 0.0)) {
        c = estimate_strong_c(probe, samples);
        if (!(c > 0.0)) {
          std::ostringstream msg;
          msg << "strong-convexity certificate refused: sampled curvature "
                 "estimate c = " << c << " is not positive";
          throw RefusalError(msg.str());
        }
      }
      ConvexityCertificate cert = epsilon_bar_strong(probe, c, policy.strong_s, samples);
      if (!cert.assumption_ok) throw RefusalError(refusal_message(cert));
      result.epsilon = cert.epsilon_bound;
      result.provenance = "strong_bound";
      result.certificate = std::move(cert);
      break;
    }
    case EpsilonPolicy::Kind::kQuadraticBound: {
      if (!problem.objective().constant_hessian())
        throw std::invalid_argument(
            "quadratic_bound policy needs a constant-Hessian objective");
      const Matrix Q = problem.hessian(Vector::Zero(problem.dim()));
      ConvexityCertificate cert =
          certify_constant_hessian(Q, problem.constraint_matrix());
      if (cert.for_all_epsilon) {
        result.epsilon = 1.0;  // any positive value is certified; pick one
        result.provenance = "quadratic_bound (linear: any epsilon)";
      } else {
        result.epsilon = cert.epsilon_bound;
        result.provenance = "quadratic_bound";
      }
      result.certificate = std::move(cert);
      break;
    }
  }
  return result;
}

SolveResult solve(const Problem& problem, const EpsilonPolicy& policy,
                  const SolverConfig& config_in, const Vector& x0) {
  SolverConfig config = config_in;
  SolveResult result;

  EpsilonResolution resolution = resolve_epsilon(problem, policy);
  result.epsilon = resolution.epsilon;
  result.epsilon_provenance = std::move(resolution.provenance);
  result.certificate = std::move(resolution.certificate);
  if (policy.kind == EpsilonPolicy::Kind::kStrongBound && config.strong_s <= 0.0)
    config.strong_s = policy.strong_s;

  PenaltyOracle oracle(problem, result.epsilon);

  const bool need_l = config.alpha <= 0.0 ||
                      (config.variant == SolverVariant::kNesterovStrong &&
                       config.lipschitz_L <= 0.0);
  if (need_l) {
    std::vector<Vector> samples;
    if (!problem.objective().constant_hessian())
      samples = make_domain_samples(problem.domain(), policy.sampler);
    const LipschitzEstimate est = estimate_lipschitz(oracle, samples);
    if (config.lipschitz_L <= 0.0) config.lipschitz_L = est.L;
    if (config.alpha <= 0.0) config.alpha = 1.0 / est.L;
  }

  switch (config.variant) {
    case SolverVariant::kNesterovConvex:
      result.trace = nesterov_convex(oracle, x0, config);
      break;
    case SolverVariant::kNesterovStrong:
      if (!(config.strong_s > 0.0))
        throw std::invalid_argument("nesterov_strong needs strong_s > 0");
      result.trace =
          nesterov_strong(oracle, x0, config.strong_s, config.lipschitz_L, config);
      break;
    case SolverVariant::kGradientDescent:
      result.trace = gradient_descent(oracle, x0, config);
      break;
    case SolverVariant::kSaddlePoint: {
      if (config.epsilon <= 0.0) config.epsilon = result.epsilon;
      const Vector mu0 = Vector::Zero(problem.num_constraints());
      result.trace = saddle_point(problem, x0, mu0, config, &oracle);
      break;
    }
  }
  return result;
}

}  // namespace accpen
