#include "accpen/analysis.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace accpen {

namespace {

constexpr int kDenseEigCutoff = 2000;
constexpr double kDenominatorFloor = 1e-14;

std::vector<int> first_primes(int count) {
  std::vector<int> primes;
  primes.reserve(count);
  for (int candidate = 2; static_cast<int>(primes.size()) < count; ++candidate) {
    bool is_prime = true;
    for (int p : primes) {
      if (p * p > candidate) break;
      if (candidate % p == 0) {
        is_prime = false;
        break;
      }
    }
    if (is_prime) primes.push_back(candidate);
  }
  return primes;
}

double radical_inverse(std::uint64_t index, int base) {
  double result = 0.0;
  double inv_base = 1.0 / base;
  double digit_weight = inv_base;
  while (index > 0) {
    result += static_cast<double>(index % base) * digit_weight;
    index /= base;
    digit_weight *= inv_base;
  }
  return result;
}

Matrix symmetrized(const Matrix& M) { return 0.5 * (M + M.transpose()); }

/// Dominant-magnitude eigenvalue of a symmetric operator given as a matvec.
double power_iteration_dominant(const std::function<Vector(const Vector&)>& matvec,
                                int n, int max_iter, double tol, std::uint64_t seed) {
  SeededRng rng(seed);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.normal();
  v.normalize();
  double lambda = 0.0;
  for (int iter = 0; iter < max_iter; ++iter) {
    Vector w = matvec(v);
    const double wnorm = w.norm();
    if (wnorm == 0.0) return 0.0;
    const double rayleigh = v.dot(w);
    w /= wnorm;
    if (iter > 0 && std::abs(rayleigh - lambda) <= tol * std::max(1.0, std::abs(rayleigh))) {
      lambda = rayleigh;
      break;
    }
    lambda = rayleigh;
    v = w;
  }
  return lambda;
}

void extreme_eigs_power(const Matrix& M, double* lambda_min, double* lambda_max) {
  const int n = static_cast<int>(M.rows());
  auto mv = [&M](const Vector& v) { return Vector(M * v); };
  const double dominant = power_iteration_dominant(mv, n, 2000, 1e-12, 12345);
  // Shift so the other end of the spectrum becomes dominant.
  const double shift = std::abs(dominant);
  auto mv_shift_up = [&](const Vector& v) { return Vector(M * v + shift * v); };
  auto mv_shift_down = [&](const Vector& v) { return Vector(M * v - shift * v); };
  const double up = power_iteration_dominant(mv_shift_up, n, 2000, 1e-12, 54321) - shift;
  const double down = power_iteration_dominant(mv_shift_down, n, 2000, 1e-12, 98765) + shift;
  *lambda_max = std::max(up, dominant);
  *lambda_min = std::min(down, dominant);
  if (*lambda_min > *lambda_max) std::swap(*lambda_min, *lambda_max);
}

struct SampleSpectrum {
  double lambda_min_hw;
  double lambda_max_h;
};

SampleSpectrum sample_spectrum(const PenaltyOracle& oracle, const Vector& x) {
  const Matrix Hf = oracle.problem().hessian(x);
  const Matrix M = symmetrized(Hf - oracle.w_matrix(x));
  double lo, hi, hf_lo, hf_hi;
  symmetric_extreme_eigenvalues(M, &lo, &hi);
  symmetric_extreme_eigenvalues(symmetrized(Hf), &hf_lo, &hf_hi);
  return {lo, hf_hi};
}

}  // namespace

void symmetric_extreme_eigenvalues(const Matrix& M, double* lambda_min,
                                   double* lambda_max) {
  if (M.rows() <= kDenseEigCutoff) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(M, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success)
      throw std::runtime_error("symmetric eigensolver failed");
    *lambda_min = eig.eigenvalues()(0);
    *lambda_max = eig.eigenvalues()(M.rows() - 1);
    return;
  }
  extreme_eigs_power(M, lambda_min, lambda_max);
}

double lambda_min_aat(const Matrix& A) {
  double lo, hi;
  symmetric_extreme_eigenvalues(A * A.transpose(), &lo, &hi);
  return lo;
}

std::vector<Vector> make_domain_samples(const BoxDomain& domain,
                                        const SamplerConfig& config) {
  if (!domain.bounded())
    throw std::invalid_argument("domain sampling requires a bounded box");
  if (config.count < 1) throw std::invalid_argument("sample count must be positive");

  const int n = domain.dim();
  const Vector span = domain.upper - domain.lower;
  std::vector<Vector> samples;
  samples.reserve(config.count + 16);

  if (config.include_vertices && n <= config.max_vertex_dim) {
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
      Vector v(n);
      for (int i = 0; i < n; ++i)
        v(i) = (mask >> i) & 1 ? domain.upper(i) : domain.lower(i);
      if (domain.contains(v)) samples.push_back(std::move(v));
    }
  }

  const std::vector<int> primes = first_primes(n);
  SeededRng rng(config.seed);
  Vector shift(n);
  for (int i = 0; i < n; ++i) shift(i) = rng.next01();

  const std::uint64_t max_attempts =
      std::uint64_t{200} * static_cast<std::uint64_t>(config.count) + 1000;
  std::uint64_t index = 1;
  int accepted = 0;
  while (accepted < config.count && index <= max_attempts) {
    Vector x(n);
    for (int i = 0; i < n; ++i) {
      double u = radical_inverse(index, primes[i]) + shift(i);
      u -= std::floor(u);
      x(i) = domain.lower(i) + u * span(i);
    }
    ++index;
    if (!domain.contains(x)) continue;  // cap rows reject
    samples.push_back(std::move(x));
    ++accepted;
  }
  if (accepted < config.count)
    throw std::runtime_error("domain sampler exhausted attempts (caps too tight?)");
  return samples;
}

ConvexityCertificate epsilon_bar(const PenaltyOracle& oracle,
                                 const std::vector<Vector>& samples) {
  if (samples.empty()) throw std::invalid_argument("empty sample set");
  ConvexityCertificate cert;
  cert.kind = CertificateKind::kConvex;
  cert.lambda_min_aat = lambda_min_aat(oracle.problem().constraint_matrix());
  cert.note = "sampled, not global";
  cert.assumption_ok = true;

  double best_bound = std::numeric_limits<double>::infinity();
  double worst_lmin = std::numeric_limits<double>::infinity();
  int worst_lmin_index = -1;
  cert.samples.reserve(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const SampleSpectrum spec = sample_spectrum(oracle, samples[k]);
    SampleRecord rec;
    rec.x = samples[k];
    rec.lambda_min_hw = spec.lambda_min_hw;
    rec.lambda_max_h = spec.lambda_max_h;
    rec.r_value = 2.0 * spec.lambda_max_h - spec.lambda_min_hw;
    if (spec.lambda_min_hw < worst_lmin) {
      worst_lmin = spec.lambda_min_hw;
      worst_lmin_index = static_cast<int>(k);
    }
    if (spec.lambda_min_hw <= 0.0) {
      cert.assumption_ok = false;
    } else {
      const double denom =
          spec.lambda_max_h * spec.lambda_max_h + rec.r_value * spec.lambda_min_hw;
      if (denom < kDenominatorFloor) {
        cert.degenerate_samples.push_back(static_cast<int>(k));
      } else {
        rec.bound = 2.0 * cert.lambda_min_aat * spec.lambda_min_hw / denom;
        if (rec.bound < best_bound) {
          best_bound = rec.bound;
          cert.worst_sample = static_cast<int>(k);
        }
      }
    }
    cert.samples.push_back(std::move(rec));
  }

  if (!cert.assumption_ok) {
    cert.worst_sample = worst_lmin_index;
    cert.epsilon_bound = std::numeric_limits<double>::quiet_NaN();
    cert.note += "; hessian-minus-W not positive definite at a sample";
    return cert;
  }
  if (!cert.degenerate_samples.empty()) {
    cert.assumption_ok = false;
    cert.worst_sample = cert.degenerate_samples.front();
    cert.epsilon_bound = std::numeric_limits<double>::quiet_NaN();
    cert.note += "; bound denominator degenerate at flagged samples";
    return cert;
  }
  cert.epsilon_bound = best_bound;
  return cert;
}

ConvexityCertificate epsilon_bar_strong(const PenaltyOracle& oracle, double c,
                                        double s, const std::vector<Vector>& samples) {
  if (samples.empty()) throw std::invalid_argument("empty sample set");
  if (!(s > 0.0) || s >= c)
    throw std::invalid_argument("need 0 < s < c for the strong-convexity bound");
  ConvexityCertificate cert;
  cert.kind = CertificateKind::kStronglyConvex;
  cert.strong_s = s;
  cert.strong_c = c;
  cert.lambda_min_aat = lambda_min_aat(oracle.problem().constraint_matrix());
  cert.note = "sampled, not global";
  cert.assumption_ok = true;

  const double c_tol = 1e-9 * std::max(1.0, std::abs(c));
  const double gap = c - s;
  double best_bound = std::numeric_limits<double>::infinity();
  double worst_lmin = std::numeric_limits<double>::infinity();
  int worst_lmin_index = -1;
  cert.samples.reserve(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const SampleSpectrum spec = sample_spectrum(oracle, samples[k]);
    SampleRecord rec;
    rec.x = samples[k];
    rec.lambda_min_hw = spec.lambda_min_hw;
    rec.lambda_max_h = spec.lambda_max_h;
    rec.r_value = 2.0 * spec.lambda_max_h - spec.lambda_min_hw;
    if (spec.lambda_min_hw < worst_lmin) {
      worst_lmin = spec.lambda_min_hw;
      worst_lmin_index = static_cast<int>(k);
    }
    if (spec.lambda_min_hw < c - c_tol) {
      cert.assumption_ok = false;
    } else {
      const double denom = spec.lambda_max_h * spec.lambda_max_h +
                           2.0 * gap * spec.lambda_max_h - gap * gap;
      if (denom < kDenominatorFloor) {
        cert.degenerate_samples.push_back(static_cast<int>(k));
      } else {
        rec.bound = 2.0 * cert.lambda_min_aat * gap / denom;
        if (rec.bound < best_bound) {
          best_bound = rec.bound;
          cert.worst_sample = static_cast<int>(k);
        }
      }
    }
    cert.samples.push_back(std::move(rec));
  }

  if (!cert.assumption_ok) {
    cert.worst_sample = worst_lmin_index;
    cert.epsilon_bound = std::numeric_limits<double>::quiet_NaN();
    cert.note += "; hessian-minus-W below c at a sample";
    return cert;
  }
  if (!cert.degenerate_samples.empty()) {
    cert.assumption_ok = false;
    cert.worst_sample = cert.degenerate_samples.front();
    cert.epsilon_bound = std::numeric_limits<double>::quiet_NaN();
    cert.note += "; bound denominator degenerate at flagged samples";
    return cert;
  }
  cert.epsilon_bound = best_bound;
  return cert;
}

double epsilon_bar_quadratic(const Matrix& Q, const Matrix& A) {
  double lmin, lmax;
  symmetric_extreme_eigenvalues(symmetrized(Q), &lmin, &lmax);
  if (!(lmin > 0.0)) {
    std::ostringstream msg;
    msg << "Q is not positive definite (lambda_min=" << lmin << ")";
    throw std::invalid_argument(msg.str());
  }
  const double denom = lmax * lmax + 2.0 * lmin * lmax - lmin * lmin;
  return 2.0 * lambda_min_aat(A) * lmin / denom;
}

ConvexityCertificate certify_constant_hessian(const Matrix& Q, const Matrix& A) {
  ConvexityCertificate cert;
  cert.kind = CertificateKind::kConvex;
  cert.lambda_min_aat = lambda_min_aat(A);
  if (Q.cwiseAbs().maxCoeff() == 0.0) {
    cert.assumption_ok = true;
    cert.for_all_epsilon = true;
    cert.note = "linear objective: penalty convex for every epsilon";
    return cert;
  }
  double lmin, lmax;
  symmetric_extreme_eigenvalues(symmetrized(Q), &lmin, &lmax);
  if (!(lmin > 0.0)) {
    std::ostringstream msg;
    msg << "constant Hessian is not positive definite (lambda_min=" << lmin
        << "); closed-form bound unavailable";
    throw RefusalError(msg.str());
  }
  cert.assumption_ok = true;
  cert.epsilon_bound = epsilon_bar_quadratic(Q, A);
  cert.note = "closed form (constant Hessian)";
  return cert;
}

double estimate_strong_c(const PenaltyOracle& oracle,
                         const std::vector<Vector>& samples) {
  if (samples.empty()) throw std::invalid_argument("empty sample set");
  double min_lmin = std::numeric_limits<double>::infinity();
  for (const Vector& x : samples)
    min_lmin = std::min(min_lmin, sample_spectrum(oracle, x).lambda_min_hw);
  return min_lmin > 0.0 ? 0.95 * min_lmin : min_lmin;
}

ConvexityReport check_convexity_sampled(const PenaltyOracle& oracle,
                                        const std::vector<Vector>& samples,
                                        double s, double tol) {
  ConvexityReport report;
  report.num_samples = static_cast<int>(samples.size());
  report.tolerance = tol;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    double lo, hi;
    symmetric_extreme_eigenvalues(oracle.hessian(samples[k]), &lo, &hi);
    const double margin = lo - s;
    if (margin < report.worst_margin) {
      report.worst_margin = margin;
      report.worst_sample = static_cast<int>(k);
    }
    if (margin < -tol) ++report.num_violations;
  }
  return report;
}

double penalty_hessian_lambda_dominant(const PenaltyOracle& oracle, const Vector& x,
                                       int max_iter, double tol) {
  const int n = oracle.problem().dim();
  if (n <= kDenseEigCutoff) {
    const Matrix H = oracle.hessian(x);
    auto mv = [&H](const Vector& v) { return Vector(H * v); };
    return std::abs(power_iteration_dominant(mv, n, max_iter, tol, 2024));
  }
  auto mv = [&oracle, &x](const Vector& v) { return oracle.hessian_vec_fd(x, v); };
  return std::abs(power_iteration_dominant(mv, n, max_iter, tol, 2024));
}

std::string refusal_message(const ConvexityCertificate& cert) {
  std::ostringstream msg;
  msg << "convexity certificate refused: ";
  if (cert.worst_sample < 0 ||
      cert.worst_sample >= static_cast<int>(cert.samples.size())) {
    msg << "assumption failed but no sample was recorded";
    return msg.str();
  }
  const SampleRecord& rec = cert.samples[cert.worst_sample];
  const bool strong = cert.kind == CertificateKind::kStronglyConvex;
  const bool spectral_failure =
      strong ? rec.lambda_min_hw < cert.strong_c : rec.lambda_min_hw <= 0.0;
  if (spectral_failure) {
    msg << "hessian-minus-W is not "
        << (strong ? "bounded below by c" : "positive definite");
  } else {
    msg << "bound denominator degenerate";
  }
  msg << " at sample " << cert.worst_sample << " (lambda_min = " << rec.lambda_min_hw;
  if (strong) msg << ", c = " << cert.strong_c;
  msg << ", x = [";
  const int show = std::min<int>(8, static_cast<int>(rec.x.size()));
  for (int i = 0; i < show; ++i) {
    if (i) msg << ", ";
    msg << rec.x(i);
  }
  if (show < rec.x.size()) msg << ", ...";
  msg << "])";
  if (!cert.degenerate_samples.empty())
    msg << "; " << cert.degenerate_samples.size()
        << " sample(s) had degenerate denominators";
  return msg.str();
}

LipschitzEstimate estimate_lipschitz(const PenaltyOracle& oracle,
                                     const std::vector<Vector>& samples) {
  LipschitzEstimate est;
  if (oracle.problem().objective().constant_hessian()) {
    est.method = LipschitzMethod::kExactQuadratic;
    double lo, hi;
    symmetric_extreme_eigenvalues(oracle.hessian(Vector::Zero(oracle.problem().dim())),
                                  &lo, &hi);
    est.L = hi;
    return est;
  }
  if (samples.empty()) throw std::invalid_argument("empty sample set");
  est.method = LipschitzMethod::kSampledPowerIteration;
  est.samples_used = static_cast<int>(samples.size());
  const int n = oracle.problem().dim();
  double worst = 0.0;
  for (const Vector& x : samples) {
    if (n <= kDenseEigCutoff) {
      double lo, hi;
      symmetric_extreme_eigenvalues(oracle.hessian(x), &lo, &hi);
      worst = std::max(worst, std::max(std::abs(lo), std::abs(hi)));
    } else {
      worst = std::max(worst, penalty_hessian_lambda_dominant(oracle, x));
    }
  }
  est.L = 1.05 * worst;
  return est;
}

}  // namespace accpen
