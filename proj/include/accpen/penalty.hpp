#pragma once

#include <Eigen/Cholesky>

#include "accpen/problem.hpp"

namespace accpen {

/// Evaluator for the exact penalty reformulation of an equality-constrained
/// problem. With residual r(x) = A x - b and multiplier function
/// mu(x) = -(A A^T)^{-1} A grad f(x), the penalty is
///
///   f_eps(x) = f(x) + mu(x)^T r(x) + (1/eps) ||r(x)||^2,
///
/// which agrees with f on the feasible set for every eps > 0. The Cholesky
/// factor of A A^T is computed once at construction; no inverse is formed.
/// Immutable after construction; all evaluations are pure.
class PenaltyOracle {
 public:
  PenaltyOracle(Problem problem, double epsilon);

  const Problem& problem() const { return problem_; }
  double epsilon() const { return epsilon_; }

  Vector residual(const Vector& x) const { return problem_.residual(x); }

  /// mu(x) = -(A A^T)^{-1} A grad f(x). At a KKT point this recovers the
  /// optimal multiplier.
  Vector multiplier(const Vector& x) const;

  double value(const Vector& x) const;

  /// grad f - hess f * A^T (A A^T)^{-1} r - A^T (A A^T)^{-1} A grad f
  /// + (2/eps) A^T r. Uses Hessian-vector products only, so separable
  /// objectives evaluate in O(n).
  Vector gradient(const Vector& x) const;

  /// Third-derivative correction: column i is
  /// (d hess f / dx_i) * A^T (A A^T)^{-1} r(x). Vanishes on the feasible set
  /// and for quadratic objectives. Not symmetric in general.
  Matrix w_matrix(const Vector& x) const;

  /// Symmetrized penalty Hessian
  ///   sym( hess f - W - hess f * P - P * hess f + (2/eps) A^T A ),
  /// P = A^T (A A^T)^{-1} A. Quadratic forms v^T H v are unaffected by the
  /// symmetrization. Dense; intended for moderate n.
  Matrix hessian(const Vector& x) const;

  /// Matrix-free product with the penalty Hessian via central differences of
  /// gradient(). Used by the Lipschitz estimator at large n.
  Vector hessian_vec_fd(const Vector& x, const Vector& v) const;

  /// (A A^T)^{-1} rhs through the cached factorization.
  Vector solve_normal(const Vector& rhs) const { return llt_.solve(rhs); }

  /// P v = A^T (A A^T)^{-1} A v.
  Vector project_range(const Vector& v) const;

  /// A^T (A A^T)^{-1} (A x - b), the correction that takes x to the feasible set.
  Vector lifted_residual(const Vector& x) const;

 private:
  Problem problem_;
  double epsilon_;
  Eigen::LLT<Matrix> llt_;   // of A A^T
  Matrix normal_rows_;       // (A A^T)^{-1} A, p x n, for dense assembly
};

}  // namespace accpen
