#include "accpen/penalty.hpp"

#include <cmath>
#include <utility>

namespace accpen {

PenaltyOracle::PenaltyOracle(Problem problem, double epsilon)
    : problem_(std::move(problem)), epsilon_(epsilon) {
  if (!(epsilon_ > 0.0)) throw std::invalid_argument("epsilon must be positive");
  const Matrix& A = problem_.constraint_matrix();
  llt_.compute(A * A.transpose());
  if (llt_.info() != Eigen::Success)
    throw std::runtime_error("A A^T factorization failed (ill-conditioned constraints)");
  normal_rows_ = llt_.solve(A);
}

Vector PenaltyOracle::multiplier(const Vector& x) const {
  const Matrix& A = problem_.constraint_matrix();
  return -llt_.solve(A * problem_.gradient(x));
}

double PenaltyOracle::value(const Vector& x) const {
  const Vector r = residual(x);
  return problem_.value(x) + multiplier(x).dot(r) + r.squaredNorm() / epsilon_;
}

Vector PenaltyOracle::gradient(const Vector& x) const {
  const Matrix& A = problem_.constraint_matrix();
  const Vector g = problem_.gradient(x);
  const Vector r = residual(x);
  const Vector lift = A.transpose() * llt_.solve(r);
  return g - problem_.objective().hessian_vec(x, lift) -
         A.transpose() * llt_.solve(A * g) + (2.0 / epsilon_) * (A.transpose() * r);
}

Matrix PenaltyOracle::w_matrix(const Vector& x) const {
  const int n = problem_.dim();
  const Vector lift = lifted_residual(x);
  Matrix W(n, n);
  for (int i = 0; i < n; ++i)
    W.col(i) = problem_.objective().third_derivative_slice(x, i) * lift;
  return W;
}

Matrix PenaltyOracle::hessian(const Vector& x) const {
  const Matrix& A = problem_.constraint_matrix();
  const Matrix Hf = problem_.hessian(x);
  const Matrix W = w_matrix(x);
  const Matrix HfP = (Hf * A.transpose()) * normal_rows_;
  Matrix H = Hf - W - HfP - HfP.transpose() +
             (2.0 / epsilon_) * (A.transpose() * A);
  return 0.5 * (H + H.transpose());
}

Vector PenaltyOracle::hessian_vec_fd(const Vector& x, const Vector& v) const {
  const double vnorm = v.norm();
  if (vnorm == 0.0) return Vector::Zero(x.size());
  const double delta = 1e-6 * (1.0 + x.norm()) / vnorm;
  return (gradient(x + delta * v) - gradient(x - delta * v)) / (2.0 * delta);
}

Vector PenaltyOracle::project_range(const Vector& v) const {
  const Matrix& A = problem_.constraint_matrix();
  return A.transpose() * llt_.solve(A * v);
}

Vector PenaltyOracle::lifted_residual(const Vector& x) const {
  const Matrix& A = problem_.constraint_matrix();
  return A.transpose() * llt_.solve(residual(x));
}

}  // namespace accpen
