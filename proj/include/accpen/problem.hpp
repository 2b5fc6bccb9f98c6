#pragma once

#include <cstdint>
#include <memory>

#include "accpen/common.hpp"

namespace accpen {

/// Axis-aligned box, optionally intersected with extra half-spaces G x <= g.
/// Bounds may be +-infinity. Used for certificate sampling and start points;
/// solvers never project onto it.
struct BoxDomain {
  Vector lower;
  Vector upper;
  Matrix cap_G;  // 0 x n when absent
  Vector cap_g;

  BoxDomain() = default;
  BoxDomain(Vector lower, Vector upper);
  BoxDomain(Vector lower, Vector upper, Matrix cap_G, Vector cap_g);

  static BoxDomain cube(int n, double lo, double hi);

  int dim() const { return static_cast<int>(lower.size()); }
  bool bounded() const;
  bool contains(const Vector& x) const;
  /// Box midpoint (0 along unbounded axes). Ignores the cap rows.
  Vector center() const;
};

/// Derivative oracle for the objective. Implementations must be pure and
/// reentrant: all evaluations are const and a fixture is safe to share
/// across threads.
class ObjectiveOracle {
 public:
  virtual ~ObjectiveOracle() = default;

  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;
  virtual Matrix hessian(const Vector& x) const = 0;

  /// Hessian-vector product. Default materializes the dense Hessian;
  /// separable fixtures override with an O(n) product.
  virtual Vector hessian_vec(const Vector& x, const Vector& v) const {
    return hessian(x) * v;
  }

  /// d(hessian)/dx_i, a symmetric n x n matrix (0-based coordinate index).
  virtual Matrix third_derivative_slice(const Vector& x, int i) const = 0;

  /// True when hessian(x) does not depend on x (quadratic/linear objectives).
  virtual bool constant_hessian() const { return false; }
};

/// Equality-constrained instance: minimize f(x) over the box subject to
/// A x = b, with A full row rank (p < n). Immutable after construction.
class Problem {
 public:
  Problem(std::shared_ptr<const ObjectiveOracle> objective, Matrix A, Vector b,
          BoxDomain domain);

  int dim() const { return n_; }
  int num_constraints() const { return p_; }
  const Matrix& constraint_matrix() const { return A_; }
  const Vector& constraint_rhs() const { return b_; }
  const BoxDomain& domain() const { return domain_; }
  const ObjectiveOracle& objective() const { return *objective_; }
  std::shared_ptr<const ObjectiveOracle> objective_ptr() const { return objective_; }

  double value(const Vector& x) const { return objective_->value(x); }
  Vector gradient(const Vector& x) const { return objective_->gradient(x); }
  Matrix hessian(const Vector& x) const { return objective_->hessian(x); }
  Vector residual(const Vector& x) const { return A_ * x - b_; }

 private:
  std::shared_ptr<const ObjectiveOracle> objective_;
  Matrix A_;
  Vector b_;
  BoxDomain domain_;
  int n_ = 0;
  int p_ = 0;
};

struct KKTPoint {
  Vector x;
  Vector mu;
};

/// f(x) = x1^4 + x2^4 subject to x1 + x2 = 0, with exact closed-form
/// derivatives up to third order. The penalty built on it is non-convex for
/// every penalty parameter, which makes it the standard refusal fixture.
Problem make_example1(const BoxDomain& domain = BoxDomain::cube(2, -5.0, 5.0));

/// f(x) = 1/2 x^T Q x + h^T x. Q must be symmetric (Q = 0 gives a linear
/// objective); positive definiteness is the caller's contract.
Problem make_quadratic(Matrix Q, Vector h, Matrix A, Vector b, BoxDomain domain);

/// Separable benchmark: f(x) = sum_i 1/2 beta_i x_i^2 + gamma_i exp(x_i)
/// subject to sum_i x_i = rhs. Default domain: |x|_inf <= 5 intersected with
/// sum_i x_i <= rhs + 50.
Problem make_exp_benchmark(int n, Vector beta, Vector gamma, double rhs);
Problem make_exp_benchmark(int n, Vector beta, Vector gamma, double rhs,
                           BoxDomain domain);

/// Deterministic seeded instance: Q = M^T M / n + I/2 with M uniform(-1,1),
/// h standard normal, A standard normal p x n (full row rank with
/// probability one, checked), b standard normal. Domain defaults to
/// [-10, 10]^n.
Problem make_random_quadratic(int n, int p, std::uint64_t seed);

/// Default beta (uniform(0.5,1.5)) and gamma (uniform(0.1,1.0)) streams for
/// the exp benchmark, deterministic in the seed.
void default_exp_coefficients(int n, std::uint64_t seed, Vector* beta, Vector* gamma);

/// Least-norm correction onto {x : A x = b}: x - A^T (A A^T)^{-1} (A x - b).
/// Idempotent; throws if A A^T cannot be factored.
Vector project_to_feasible(const Problem& problem, const Vector& x);

/// Reference KKT solve for quadratic objectives: dense LU on
/// [Q A^T; A 0][x; mu] = [-h; b]. Residuals are verified to 1e-10 * scale.
KKTPoint solve_kkt_quadratic(const Matrix& Q, const Vector& h, const Matrix& A,
                             const Vector& b);

}  // namespace accpen
