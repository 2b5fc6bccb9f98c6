#include "accpen/problem.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

namespace accpen {

namespace {

constexpr double kRankTolerance = 1e-10;  // sigma_min(A) must exceed this times ||A||

void check_full_row_rank(const Matrix& A) {
  Eigen::JacobiSVD<Matrix> svd(A);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(sv.size() - 1) <= kRankTolerance * sv(0)) {
    std::ostringstream msg;
    msg << "constraint matrix is rank deficient: sigma_min=" << (sv.size() ? sv(sv.size() - 1) : 0.0)
        << ", ||A||=" << (sv.size() ? sv(0) : 0.0);
    throw std::invalid_argument(msg.str());
  }
}

class Example1Oracle final : public ObjectiveOracle {
 public:
  double value(const Vector& x) const override {
    return std::pow(x(0), 4) + std::pow(x(1), 4);
  }
  Vector gradient(const Vector& x) const override {
    Vector g(2);
    g << 4.0 * std::pow(x(0), 3), 4.0 * std::pow(x(1), 3);
    return g;
  }
  Matrix hessian(const Vector& x) const override {
    Matrix H = Matrix::Zero(2, 2);
    H(0, 0) = 12.0 * x(0) * x(0);
    H(1, 1) = 12.0 * x(1) * x(1);
    return H;
  }
  Matrix third_derivative_slice(const Vector& x, int i) const override {
    Matrix S = Matrix::Zero(2, 2);
    S(i, i) = 24.0 * x(i);
    return S;
  }
};

class QuadraticOracle final : public ObjectiveOracle {
 public:
  QuadraticOracle(Matrix Q, Vector h) : Q_(std::move(Q)), h_(std::move(h)) {}

  double value(const Vector& x) const override {
    return 0.5 * x.dot(Q_ * x) + h_.dot(x);
  }
  Vector gradient(const Vector& x) const override { return Q_ * x + h_; }
  Matrix hessian(const Vector&) const override { return Q_; }
  Vector hessian_vec(const Vector&, const Vector& v) const override { return Q_ * v; }
  Matrix third_derivative_slice(const Vector&, int) const override {
    return Matrix::Zero(Q_.rows(), Q_.cols());
  }
  bool constant_hessian() const override { return true; }

 private:
  Matrix Q_;
  Vector h_;
};

class ExpBenchmarkOracle final : public ObjectiveOracle {
 public:
  ExpBenchmarkOracle(Vector beta, Vector gamma)
      : beta_(std::move(beta)), gamma_(std::move(gamma)) {}

  double value(const Vector& x) const override {
    double s = 0.0;
    for (int i = 0; i < x.size(); ++i)
      s += 0.5 * beta_(i) * x(i) * x(i) + gamma_(i) * std::exp(x(i));
    return s;
  }
  Vector gradient(const Vector& x) const override {
    Vector g(x.size());
    for (int i = 0; i < x.size(); ++i)
      g(i) = beta_(i) * x(i) + gamma_(i) * std::exp(x(i));
    return g;
  }
  Matrix hessian(const Vector& x) const override {
    return hessian_diag(x).asDiagonal();
  }
  Vector hessian_vec(const Vector& x, const Vector& v) const override {
    return hessian_diag(x).cwiseProduct(v);
  }
  Matrix third_derivative_slice(const Vector& x, int i) const override {
    Matrix S = Matrix::Zero(x.size(), x.size());
    S(i, i) = gamma_(i) * std::exp(x(i));
    return S;
  }

 private:
  Vector hessian_diag(const Vector& x) const {
    Vector d(x.size());
    for (int i = 0; i < x.size(); ++i) d(i) = beta_(i) + gamma_(i) * std::exp(x(i));
    return d;
  }
  Vector beta_;
  Vector gamma_;
};

}  // namespace

BoxDomain::BoxDomain(Vector lower_in, Vector upper_in)
    : lower(std::move(lower_in)), upper(std::move(upper_in)) {
  if (lower.size() != upper.size())
    throw std::invalid_argument("box bounds have mismatched sizes");
  for (int i = 0; i < lower.size(); ++i)
    if (!(lower(i) <= upper(i)))
      throw std::invalid_argument("box has lower > upper at coordinate " + std::to_string(i));
  cap_G.resize(0, lower.size());
  cap_g.resize(0);
}

BoxDomain::BoxDomain(Vector lower_in, Vector upper_in, Matrix cap_G_in, Vector cap_g_in)
    : BoxDomain(std::move(lower_in), std::move(upper_in)) {
  if (cap_G_in.rows() != cap_g_in.size() || cap_G_in.cols() != lower.size())
    throw std::invalid_argument("cap rows have inconsistent dimensions");
  cap_G = std::move(cap_G_in);
  cap_g = std::move(cap_g_in);
}

BoxDomain BoxDomain::cube(int n, double lo, double hi) {
  return BoxDomain(Vector::Constant(n, lo), Vector::Constant(n, hi));
}

bool BoxDomain::bounded() const {
  return lower.allFinite() && upper.allFinite();
}

bool BoxDomain::contains(const Vector& x) const {
  if (x.size() != lower.size()) return false;
  for (int i = 0; i < x.size(); ++i)
    if (x(i) < lower(i) || x(i) > upper(i)) return false;
  if (cap_G.rows() > 0) {
    Vector slack = cap_G * x - cap_g;
    for (int i = 0; i < slack.size(); ++i)
      if (slack(i) > 0.0) return false;
  }
  return true;
}

Vector BoxDomain::center() const {
  Vector c(lower.size());
  for (int i = 0; i < lower.size(); ++i) {
    const bool lo_fin = std::isfinite(lower(i));
    const bool hi_fin = std::isfinite(upper(i));
    if (lo_fin && hi_fin)
      c(i) = 0.5 * (lower(i) + upper(i));
    else if (lo_fin)
      c(i) = lower(i);
    else if (hi_fin)
      c(i) = upper(i);
    else
      c(i) = 0.0;
  }
  return c;
}

Problem::Problem(std::shared_ptr<const ObjectiveOracle> objective, Matrix A, Vector b,
                 BoxDomain domain)
    : objective_(std::move(objective)),
      A_(std::move(A)),
      b_(std::move(b)),
      domain_(std::move(domain)) {
  if (!objective_) throw std::invalid_argument("null objective oracle");
  n_ = static_cast<int>(A_.cols());
  p_ = static_cast<int>(A_.rows());
  if (p_ < 1 || p_ >= n_)
    throw std::invalid_argument("need 1 <= p < n, got p=" + std::to_string(p_) +
                                ", n=" + std::to_string(n_));
  if (b_.size() != p_) throw std::invalid_argument("b has wrong size");
  if (domain_.dim() != n_) throw std::invalid_argument("domain has wrong dimension");
  check_full_row_rank(A_);
}

Problem make_example1(const BoxDomain& domain) {
  Matrix A(1, 2);
  A << 1.0, 1.0;
  return Problem(std::make_shared<Example1Oracle>(), A, Vector::Zero(1), domain);
}

Problem make_quadratic(Matrix Q, Vector h, Matrix A, Vector b, BoxDomain domain) {
  if (Q.rows() != Q.cols()) throw std::invalid_argument("Q must be square");
  const double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument("Q must be symmetric");
  if (h.size() != Q.rows()) throw std::invalid_argument("h has wrong size");
  return Problem(std::make_shared<QuadraticOracle>(std::move(Q), std::move(h)),
                 std::move(A), std::move(b), std::move(domain));
}

Problem make_exp_benchmark(int n, Vector beta, Vector gamma, double rhs) {
  Matrix G = Matrix::Ones(1, n);
  Vector g(1);
  g << rhs + 50.0;
  BoxDomain domain(Vector::Constant(n, -5.0), Vector::Constant(n, 5.0), G, g);
  return make_exp_benchmark(n, std::move(beta), std::move(gamma), rhs, std::move(domain));
}

Problem make_exp_benchmark(int n, Vector beta, Vector gamma, double rhs,
                           BoxDomain domain) {
  if (beta.size() != n || gamma.size() != n)
    throw std::invalid_argument("beta/gamma must have length n");
  if ((beta.array() <= 0.0).any() || (gamma.array() <= 0.0).any())
    throw std::invalid_argument("beta and gamma must be strictly positive");
  Matrix A = Matrix::Ones(1, n);
  Vector b(1);
  b << rhs;
  return Problem(std::make_shared<ExpBenchmarkOracle>(std::move(beta), std::move(gamma)),
                 A, b, std::move(domain));
}

void default_exp_coefficients(int n, std::uint64_t seed, Vector* beta, Vector* gamma) {
  SeededRng rng(seed);
  beta->resize(n);
  gamma->resize(n);
  for (int i = 0; i < n; ++i) (*beta)(i) = rng.uniform(0.5, 1.5);
  for (int i = 0; i < n; ++i) (*gamma)(i) = rng.uniform(0.1, 1.0);
}

Problem make_random_quadratic(int n, int p, std::uint64_t seed) {
  SeededRng rng(seed);
  Matrix M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = rng.uniform(-1.0, 1.0);
  Matrix Q = M.transpose() * M / static_cast<double>(n) + 0.5 * Matrix::Identity(n, n);
  Q = 0.5 * (Q + Q.transpose());  // kill round-off asymmetry
  Vector h(n);
  for (int i = 0; i < n; ++i) h(i) = rng.normal();
  Matrix A(p, n);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = rng.normal();
  Vector b(p);
  for (int i = 0; i < p; ++i) b(i) = rng.normal();
  return make_quadratic(std::move(Q), std::move(h), std::move(A), std::move(b),
                        BoxDomain::cube(n, -10.0, 10.0));
}

Vector project_to_feasible(const Problem& problem, const Vector& x) {
  const Matrix& A = problem.constraint_matrix();
  Eigen::LLT<Matrix> llt(A * A.transpose());
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("A A^T factorization failed (ill-conditioned constraints)");
  return x - A.transpose() * llt.solve(A * x - problem.constraint_rhs());
}

KKTPoint solve_kkt_quadratic(const Matrix& Q, const Vector& h, const Matrix& A,
                             const Vector& b) {
  const int n = static_cast<int>(Q.rows());
  const int p = static_cast<int>(A.rows());
  check_full_row_rank(A);
  Matrix K = Matrix::Zero(n + p, n + p);
  K.topLeftCorner(n, n) = Q;
  K.topRightCorner(n, p) = A.transpose();
  K.bottomLeftCorner(p, n) = A;
  Vector rhs(n + p);
  rhs.head(n) = -h;
  rhs.tail(p) = b;
  Eigen::PartialPivLU<Matrix> lu(K);
  Vector sol = lu.solve(rhs);
  KKTPoint point{sol.head(n), sol.tail(p)};
  const double scale = std::max({1.0, h.norm(), b.norm(), Q.norm()});
  const double stationarity = (Q * point.x + h + A.transpose() * point.mu).norm();
  const double feasibility = (A * point.x - b).norm();
  if (!sol.allFinite() || stationarity > 1e-10 * scale || feasibility > 1e-10 * scale)
    throw std::runtime_error("singular KKT system (inputs violate Q > 0 / rank(A) = p)");
  return point;
}

}  // namespace accpen
