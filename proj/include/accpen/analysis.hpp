#pragma once

#include <limits>
#include <vector>

#include "accpen/penalty.hpp"

namespace accpen {

/// Deterministic domain sampling: a Halton sequence (with a seeded
/// Cranley-Patterson rotation) scaled to the box, filtered by the cap rows,
/// plus the box vertices when the dimension is small enough to enumerate.
struct SamplerConfig {
  int count = 1000;
  std::uint64_t seed = 0;
  bool include_vertices = true;
  int max_vertex_dim = 12;
};

std::vector<Vector> make_domain_samples(const BoxDomain& domain,
                                        const SamplerConfig& config = {});

enum class CertificateKind { kConvex, kStronglyConvex };

struct SampleRecord {
  Vector x;
  double lambda_min_hw = 0.0;  // lambda_min of sym(hess f - W)
  double lambda_max_h = 0.0;   // lambda_max of hess f
  double r_value = 0.0;        // 2 lambda_max - lambda_min_hw
  double bound = std::numeric_limits<double>::quiet_NaN();
};

/// Result of a sampled convexity bound. The bound is the minimum of the
/// per-sample expressions over the recorded sample set; it is a sampled
/// surrogate for the minimum over the continuum, not a global certificate.
struct ConvexityCertificate {
  CertificateKind kind = CertificateKind::kConvex;
  double strong_s = 0.0;  // strongly-convex kind only
  double strong_c = 0.0;
  bool assumption_ok = false;
  bool for_all_epsilon = false;  // linear objective: convex for every epsilon
  double epsilon_bound = std::numeric_limits<double>::quiet_NaN();
  double lambda_min_aat = 0.0;
  std::vector<SampleRecord> samples;
  /// argmin of the per-sample bound when ok; the first failing sample otherwise.
  int worst_sample = -1;
  /// samples whose bound denominator fell below 1e-14 (flagged, never clamped)
  std::vector<int> degenerate_samples;
  std::string note;
};

/// Penalty parameter below which the penalty is convex on the sampled domain:
/// per sample, 2 lam_min(AA^T) lam_min(Hf - W) /
/// (lam_max(Hf)^2 + R lam_min(Hf - W)) with R = 2 lam_max(Hf) - lam_min(Hf - W).
/// Refuses (assumption_ok = false) when any sample has lam_min(Hf - W) <= 0.
ConvexityCertificate epsilon_bar(const PenaltyOracle& oracle,
                                 const std::vector<Vector>& samples);

/// Strong-convexity version with parameter s, assuming Hf - W >= c I on the
/// domain (verified at every sample): per sample,
/// 2 lam_min(AA^T) (c - s) / (lam_max(Hf)^2 + 2 (c-s) lam_max(Hf) - (c-s)^2).
/// Requires 0 < s < c.
ConvexityCertificate epsilon_bar_strong(const PenaltyOracle& oracle, double c,
                                        double s, const std::vector<Vector>& samples);

/// Closed form for quadratic objectives with Hessian Q > 0:
/// 2 lam_min(AA^T) lam_min(Q) / (lam_max(Q)^2 + 2 lam_min lam_max - lam_min^2).
/// No sampling needed. Throws std::invalid_argument when Q is not SPD.
double epsilon_bar_quadratic(const Matrix& Q, const Matrix& A);

/// Certificate for a constant-Hessian objective: Q = 0 yields
/// convex-for-every-epsilon, Q > 0 the closed-form bound. Throws RefusalError
/// for Q neither zero nor positive definite.
ConvexityCertificate certify_constant_hessian(const Matrix& Q, const Matrix& A);

/// Sampled estimate of c for the strong-convexity bound:
/// 0.95 x min over samples of lam_min(sym(Hf - W)) (raw min when nonpositive).
double estimate_strong_c(const PenaltyOracle& oracle,
                         const std::vector<Vector>& samples);

/// Empirical spectrum check of the assembled penalty Hessian at the oracle's
/// own epsilon: flags samples with lam_min < s - tol.
struct ConvexityReport {
  int num_samples = 0;
  int num_violations = 0;
  double worst_margin = std::numeric_limits<double>::infinity();  // min lam_min - s
  int worst_sample = -1;
  double tolerance = 1e-8;
};

ConvexityReport check_convexity_sampled(const PenaltyOracle& oracle,
                                        const std::vector<Vector>& samples,
                                        double s = 0.0, double tol = 1e-8);

enum class LipschitzMethod { kExactQuadratic, kSampledPowerIteration };

struct LipschitzEstimate {
  double L = 0.0;
  LipschitzMethod method = LipschitzMethod::kExactQuadratic;
  int samples_used = 0;
};

/// Gradient Lipschitz constant of the penalty. Constant-Hessian objectives get
/// the exact lam_max of the (constant) penalty Hessian; otherwise
/// 1.05 x max over samples of the dominant penalty-Hessian eigenvalue by power
/// iteration (matrix-free finite-difference products above the dense cutoff).
LipschitzEstimate estimate_lipschitz(const PenaltyOracle& oracle,
                                     const std::vector<Vector>& samples);

/// Dominant-magnitude eigenvalue of the penalty Hessian at x by power
/// iteration. Exposed for the large-n path and its agreement tests.
double penalty_hessian_lambda_dominant(const PenaltyOracle& oracle, const Vector& x,
                                       int max_iter = 2000, double tol = 1e-12);

/// Extreme eigenvalues of a symmetric matrix: dense solver up to the cutoff,
/// power iteration with a spectral shift above it.
void symmetric_extreme_eigenvalues(const Matrix& M, double* lambda_min,
                                   double* lambda_max);

/// Smallest eigenvalue of A A^T.
double lambda_min_aat(const Matrix& A);

/// Human-readable explanation of a declined certificate, naming the offending
/// sample and its spectral value. Only meaningful when !cert.assumption_ok.
std::string refusal_message(const ConvexityCertificate& cert);

}  // namespace accpen
