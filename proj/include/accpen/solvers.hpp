#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "accpen/analysis.hpp"
#include "accpen/penalty.hpp"

namespace accpen {

enum class SolverVariant {
  kNesterovConvex,
  kNesterovStrong,
  kGradientDescent,
  kSaddlePoint,
};

const char* solver_variant_name(SolverVariant variant);

struct SolverConfig {
  SolverVariant variant = SolverVariant::kNesterovConvex;
  double alpha = 0.0;      // step size; must be > 0 by run time
  int max_iter = 10000;
  double grad_tol = 1e-9;  // early exit on ||grad f_eps||; <= 0 disables
  int record_every = 1;

  // nesterov_strong only. solve() fills lipschitz_L from the estimator when
  // it is <= 0; strong_s must be supplied.
  double strong_s = 0.0;
  double lipschitz_L = 0.0;
  // Forces the momentum coefficient (testing hook; 0 reduces the convex
  // variant to gradient descent bit-for-bit).
  std::optional<double> momentum_override;

  // saddle_point only.
  bool augmented = false;
  double dual_step = 0.0;  // <= 0 means: use alpha
  double epsilon = 0.0;    // weight 1/eps of the augmentation term

  // Reference optimum for the trace gap column; NaN column when absent.
  std::optional<double> f_star;
};

struct TraceRecord {
  int k = 0;
  double f = 0.0;
  double f_eps = 0.0;
  double gap = std::numeric_limits<double>::quiet_NaN();
  double residual = 0.0;
  double wall_time_s = 0.0;  // cumulative, gradient-step work only
};

enum class RunStatus { kConverged, kMaxIter };

struct RunTrace {
  std::vector<TraceRecord> records;
  RunStatus status = RunStatus::kMaxIter;
  Vector final_x;
  Vector final_mu;  // saddle point runs only; size 0 otherwise
  int iterations = 0;
  double final_grad_norm = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::string> warnings;
};

/// (sqrt(L) - sqrt(s)) / (sqrt(L) + sqrt(s)); requires 0 < s <= L.
double strong_momentum(double L, double s);

/// a_{k+1} = (1 + sqrt(4 a_k^2 + 1)) / 2, the acceleration sequence (a_0 = 1).
double nesterov_a_next(double a);

/// Accelerated gradient, convex variant:
///   x_{k+1} = y_k - alpha grad f_eps(y_k)
///   a_{k+1} = (1 + sqrt(4 a_k^2 + 1)) / 2
///   y_{k+1} = x_{k+1} + ((a_k - 1)/a_{k+1}) (x_{k+1} - x_k)
/// started at y_0 = x_0, a_0 = 1.
RunTrace nesterov_convex(const PenaltyOracle& oracle, const Vector& x0,
                         const SolverConfig& config);

/// Accelerated gradient, strongly convex variant: same primal step, but the
/// momentum coefficient is the constant (sqrt(L)-sqrt(s))/(sqrt(L)+sqrt(s));
/// the a_k recurrence is dropped.
RunTrace nesterov_strong(const PenaltyOracle& oracle, const Vector& x0, double s,
                         double L, const SolverConfig& config);

/// x_{k+1} = x_k - alpha grad f_eps(x_k).
RunTrace gradient_descent(const PenaltyOracle& oracle, const Vector& x0,
                          const SolverConfig& config);

/// Explicit-Euler primal-dual iteration on the (augmented) Lagrangian
///   x+ = x - alpha (grad f + A^T mu [+ (2/eps) A^T (A x - b)])
///   mu+ = mu + dual_step (A x - b).
/// trace_oracle, when given, supplies the f_eps trace column so runs are
/// comparable with the penalty methods; otherwise f_eps = f is recorded.
RunTrace saddle_point(const Problem& problem, const Vector& x0, const Vector& mu0,
                      const SolverConfig& config,
                      const PenaltyOracle* trace_oracle = nullptr);

/// How the driver picks the penalty parameter.
struct EpsilonPolicy {
  enum class Kind { kFixed, kTheoremBound, kStrongBound, kQuadraticBound };
  Kind kind = Kind::kFixed;
  double fixed_value = 0.0;  // kFixed
  double strong_c = 0.0;     // kStrongBound; <= 0 requests the sampled estimate
  double strong_s = 0.0;     // kStrongBound
  SamplerConfig sampler;     // for the sampled bounds and Lipschitz estimate

  static EpsilonPolicy fixed(double eps);
  static EpsilonPolicy theorem_bound();
  static EpsilonPolicy strong_bound(double c, double s);
  static EpsilonPolicy quadratic_bound();
};

struct EpsilonResolution {
  double epsilon = 0.0;
  std::string provenance;  // "fixed", "theorem_bound", ...
  std::optional<ConvexityCertificate> certificate;
};

/// Applies the policy: sampled certificates for theorem/strong bounds (throws
/// RefusalError when one declines), the closed form for quadratic_bound.
EpsilonResolution resolve_epsilon(const Problem& problem, const EpsilonPolicy& policy);

struct SolveResult {
  RunTrace trace;
  double epsilon = 0.0;
  std::string epsilon_provenance;  // "fixed", "theorem_bound", ...
  std::optional<ConvexityCertificate> certificate;
};

/// Top-level driver: resolves eps from the policy (throwing RefusalError when
/// a certificate declines), fills alpha = 1/L and the strong variant's L when
/// unset, builds the oracle and dispatches config.variant from x0.
SolveResult solve(const Problem& problem, const EpsilonPolicy& policy,
                  const SolverConfig& config, const Vector& x0);

}  // namespace accpen
