#include <cmath>

#include "doctest.h"

#include "accpen/analysis.hpp"
#include "accpen/penalty.hpp"
#include "testutil.hpp"

using namespace accpen;
using doctest::Approx;

namespace {

Problem identity_quadratic(double b_value) {
  Matrix A(1, 2);
  A << 1.0, 1.0;
  Vector b(1);
  b << b_value;
  return make_quadratic(Matrix::Identity(2, 2), Vector::Zero(2), A, b,
                        BoxDomain::cube(2, -10.0, 10.0));
}

}  // namespace

TEST_SUITE_BEGIN("penalty");

TEST_CASE("constructor validates epsilon") {
  CHECK_THROWS_AS(PenaltyOracle(make_example1(), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(PenaltyOracle(make_example1(), -1.0), std::invalid_argument);
}

TEST_CASE("multiplier hand values") {
  const PenaltyOracle pen(make_example1(), 1.0);
  Vector x(2);
  x << 1.0, 1.0;
  CHECK(pen.multiplier(x)[0] == Approx(-4.0).epsilon(1e-14));
  x << 0.0, 0.0;
  CHECK(pen.multiplier(x).norm() == Approx(0.0));

  const PenaltyOracle quad(identity_quadratic(0.0), 1.0);
  x << 1.0, 3.0;
  // Dense cross-check of the cached-factorization path.
  const Matrix A = quad.problem().constraint_matrix();
  const Vector expect =
      -(A * A.transpose()).ldlt().solve(A * quad.problem().gradient(x));
  CHECK(testutil::rel_err(quad.multiplier(x), expect) < 1e-14);
  CHECK(quad.multiplier(x)[0] == Approx(-2.0).epsilon(1e-14));
}

TEST_CASE("penalty value hand values") {
  const Problem ex1 = make_example1();
  Vector x(2);
  x << 1.0, 0.0;
  CHECK(PenaltyOracle(ex1, 1.0).value(x) == Approx(0.0).epsilon(1e-14));
  // f = 1, mu = -2, r = 1: value = 1 - 2 + 1/eps.
  CHECK(PenaltyOracle(ex1, 0.5).value(x) == Approx(1.0).epsilon(1e-14));

  const PenaltyOracle quad(identity_quadratic(0.0), 1.0);
  x << 1.0, 1.0;
  // f = 1, mu = -1, r = 2: value = 1 - 2 + 4 = 3.
  CHECK(quad.value(x) == Approx(3.0).epsilon(1e-14));
}

TEST_CASE("penalty agrees with the objective on the feasible set") {
  const Problem probs[] = {make_example1(), make_random_quadratic(8, 3, 2),
                           make_exp_benchmark(6, Vector::Ones(6), Vector::Ones(6),
                                              3.0)};
  SeededRng rng(17);
  for (const Problem& prob : probs) {
    for (double eps : {0.01, 1.0, 100.0}) {
      const PenaltyOracle pen(prob, eps);
      for (int trial = 0; trial < 10; ++trial) {
        Vector x(prob.dim());
        for (int i = 0; i < x.size(); ++i) x[i] = rng.uniform(-3.0, 3.0);
        x = project_to_feasible(prob, x);
        CHECK(testutil::rel_err(pen.value(x), prob.value(x)) < 1e-12);
        // On the feasible set the penalty gradient reduces to the projected
        // objective gradient (I - P) grad f.
        const Vector g = prob.gradient(x);
        const Vector expect = g - pen.project_range(g);
        CHECK(testutil::rel_err(pen.gradient(x), expect) < 1e-12);
      }
    }
  }
}

TEST_CASE("gradient vanishes at a stationary feasible point") {
  const PenaltyOracle pen(make_example1(), 2.0);
  CHECK(pen.gradient(Vector::Zero(2)).norm() == Approx(0.0));
}

TEST_CASE("gradient matches finite differences of the value") {
  const Problem probs[] = {make_example1(), make_random_quadratic(8, 3, 6),
                           make_exp_benchmark(10, Vector::Ones(10),
                                              Vector::Ones(10), 5.0)};
  for (const Problem& prob : probs) {
    for (double eps : {0.1, 1.0}) {
      const PenaltyOracle pen(prob, eps);
      const auto f = [&](const Vector& v) { return pen.value(v); };
      const auto samples =
          make_domain_samples(prob.domain(),
                              {.count = 15, .seed = 9, .include_vertices = false});
      for (const Vector& x : samples)
        CHECK(testutil::rel_err(testutil::fd_gradient(f, x), pen.gradient(x)) <
              1e-5);
    }
  }
}

TEST_CASE("third-derivative correction W") {
  const PenaltyOracle pen(make_example1(), 1.0);
  Vector x(2);
  x << 1.0, 0.0;
  Matrix want = Matrix::Zero(2, 2);
  want(0, 0) = 12.0;
  CHECK(testutil::rel_err(pen.w_matrix(x), want) < 1e-13);

  // Feasible points and quadratic objectives produce no correction.
  x << 1.0, -1.0;
  CHECK(pen.w_matrix(x).isZero(1e-13));
  const PenaltyOracle quad(make_random_quadratic(6, 2, 4), 1.0);
  Vector y = Vector::Constant(6, 2.0);
  CHECK(quad.w_matrix(y).isZero(0.0));
}

TEST_CASE("penalty Hessian: determinant identity on the quartic fixture") {
  for (double eps : {0.01, 1.0, 10.0}) {
    const PenaltyOracle pen(make_example1(), eps);
    for (double x2 : {0.5, 1.0, 2.0}) {
      Vector x(2);
      x << 0.0, x2;
      const double det = pen.hessian(x).determinant();
      const double want = -36.0 * std::pow(x2, 4);
      CHECK(det == Approx(want).epsilon(1e-10));
    }
  }
}

TEST_CASE("penalty Hessian: symmetric and consistent with the gradient") {
  const Problem probs[] = {make_example1(), make_exp_benchmark(8, Vector::Ones(8),
                                                              Vector::Ones(8), 4.0)};
  for (const Problem& prob : probs) {
    const PenaltyOracle pen(prob, 0.5);
    const auto g = [&](const Vector& v) { return pen.gradient(v); };
    const auto samples =
        make_domain_samples(prob.domain(),
                            {.count = 10, .seed = 13, .include_vertices = false});
    for (const Vector& x : samples) {
      const Matrix H = pen.hessian(x);
      CHECK((H - H.transpose()).norm() < 1e-12 * std::max(1.0, H.norm()));
      CHECK(testutil::rel_err(testutil::fd_jacobian(g, x), H) < 1e-4);
      Vector v(prob.dim());
      SeededRng rng(29);
      for (int i = 0; i < v.size(); ++i) v[i] = rng.normal();
      CHECK(testutil::rel_err(pen.hessian_vec_fd(x, v), (H * v).eval()) < 1e-6);
    }
  }
}

TEST_CASE("linear objective: penalty Hessian is the residual term only") {
  Matrix A(1, 3);
  A << 1.0, 2.0, -1.0;
  const Problem lin = make_quadratic(Matrix::Zero(3, 3), Vector::Ones(3), A,
                                     Vector::Zero(1), BoxDomain::cube(3, -5, 5));
  for (double eps : {0.25, 2.0}) {
    const PenaltyOracle pen(lin, eps);
    const Matrix want = (2.0 / eps) * (A.transpose() * A);
    CHECK(testutil::rel_err(pen.hessian(Vector::Constant(3, 1.5)), want) < 1e-13);
  }
}

TEST_CASE("KKT points are fixed points of the penalty gradient") {
  const Problem quads[] = {identity_quadratic(2.0), make_random_quadratic(6, 2, 11)};
  for (const Problem& quad : quads) {
    const Vector zero = Vector::Zero(quad.dim());
    const KKTPoint kkt = solve_kkt_quadratic(quad.hessian(zero), quad.gradient(zero),
                                             quad.constraint_matrix(),
                                             quad.constraint_rhs());
    for (double eps : {0.05, 1.0, 10.0}) {
      const PenaltyOracle pen(quad, eps);
      CHECK(pen.gradient(kkt.x).norm() < 1e-9 * (1.0 + kkt.x.norm()));
      CHECK(testutil::rel_err(pen.multiplier(kkt.x), kkt.mu) < 1e-9);
    }
  }
}

TEST_CASE("range projection and lifted residual") {
  const PenaltyOracle pen(make_random_quadratic(7, 3, 20), 1.0);
  SeededRng rng(31);
  Vector v(7);
  for (int i = 0; i < 7; ++i) v[i] = rng.normal();
  const Vector pv = pen.project_range(v);
  CHECK(testutil::rel_err(pen.project_range(pv), pv) < 1e-12);  // idempotent
  const Matrix& A = pen.problem().constraint_matrix();
  CHECK((A * (v - pv)).norm() < 1e-10 * (1.0 + v.norm()));

  // Subtracting the lifted residual lands on the constraint set.
  const Vector corrected = v - pen.lifted_residual(v);
  CHECK(pen.residual(corrected).norm() <
        1e-10 * (1.0 + pen.problem().constraint_rhs().norm()));
}

TEST_SUITE_END();
