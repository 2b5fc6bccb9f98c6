// Acceptance gate: nine end-to-end checks with pinned tolerances. Each
// criterion prints exactly one PASS/FAIL line with its headline number and
// wall time; the process exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <Eigen/Dense>

#include "accpen/analysis.hpp"
#include "accpen/harness.hpp"
#include "accpen/penalty.hpp"
#include "accpen/problem.hpp"
#include "accpen/solvers.hpp"
#include "accpen/spec_io.hpp"

#include "testutil.hpp"

#ifndef ACCPEN_CLI_PATH
#error "ACCPEN_CLI_PATH must point at the accpen_cli binary"
#endif
#ifndef ACCPEN_FIXTURE_DIR
#error "ACCPEN_FIXTURE_DIR must point at the fixtures directory"
#endif

namespace {

using namespace accpen;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(4);
  out << v;
  return out.str();
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

// ---------------------------------------------------------------------------
// 1. Determinant identity: det of the penalty Hessian of the example problem
//    at (0, x2) equals -36 x2^4 for every epsilon.

Outcome criterion1() {
  const Problem prob = make_example1();
  double worst = 0.0;
  for (double eps : {0.01, 0.1, 1.0, 10.0}) {
    const PenaltyOracle pen(prob, eps);
    for (double x2 : {0.5, 1.0, 2.0}) {
      Vector x(2);
      x << 0.0, x2;
      const double det = pen.hessian(x).determinant();
      const double want = -36.0 * std::pow(x2, 4);
      const double scaled =
          std::abs(det - want) / std::max(1.0, std::pow(x2, 4));
      worst = std::max(worst, scaled);
    }
  }
  return {worst <= 1e-8,
          "max scaled |det + 36 x2^4| = " + fmt(worst) + " (tol 1e-8)"};
}

// ---------------------------------------------------------------------------
// 2. The certified epsilon keeps the penalty Hessian PSD for 20 seeded
//    random SPD quadratics (n=10, p=3).

Outcome criterion2() {
  double worst = std::numeric_limits<double>::infinity();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Problem prob = make_random_quadratic(10, 3, seed);
    const Matrix q = prob.hessian(Vector::Zero(10));
    const double bar = epsilon_bar_quadratic(q, prob.constraint_matrix());
    const PenaltyOracle pen(prob, bar);
    double lo = 0.0, hi = 0.0;
    symmetric_extreme_eigenvalues(pen.hessian(Vector::Zero(10)), &lo, &hi);
    worst = std::min(worst, lo);
  }
  return {worst >= -1e-10, "min lambda_min over 20 seeds = " + fmt(worst) +
                               " (floor -1e-10)"};
}

// ---------------------------------------------------------------------------
// 3. Hand-evaluated bounds: epsilon_bar for (I2, [1 1]) is 2; the strong
//    bound for Q = 2 I2 with c = 2, s = 1 is 4/7.

Outcome criterion3() {
  Matrix a(1, 2);
  a << 1.0, 1.0;
  const double err_plain =
      std::abs(epsilon_bar_quadratic(Matrix::Identity(2, 2), a) - 2.0);

  const Problem prob =
      make_quadratic(2.0 * Matrix::Identity(2, 2), Vector::Zero(2), a,
                     Vector::Zero(1), BoxDomain::cube(2, -5.0, 5.0));
  const PenaltyOracle pen(prob, 1.0);
  Vector sample(2);
  sample << 0.5, -0.5;
  const ConvexityCertificate cert = epsilon_bar_strong(pen, 2.0, 1.0, {sample});
  const double err_strong = std::abs(cert.epsilon_bound - 4.0 / 7.0);

  const bool pass =
      err_plain <= 1e-12 && cert.assumption_ok && err_strong <= 1e-12;
  return {pass, "|eps_bar - 2| = " + fmt(err_plain) + ", |eps_bar_s - 4/7| = " +
                    fmt(err_strong) + " (tol 1e-12)"};
}

// ---------------------------------------------------------------------------
// 4. Finite-difference consistency of the penalty gradient and Hessian at
//    100 sampled points on each of the three problem families.

Outcome criterion4() {
  std::vector<Problem> problems;
  problems.push_back(make_example1());
  problems.push_back(make_random_quadratic(10, 3, 7));
  Vector beta, gamma;
  default_exp_coefficients(10, 3, &beta, &gamma);
  problems.push_back(make_exp_benchmark(10, beta, gamma, 20.0));

  double worst_grad = 0.0, worst_hess = 0.0;
  for (const Problem& prob : problems) {
    const PenaltyOracle pen(prob, 0.5);
    const SamplerConfig cfg{.count = 100, .seed = 11, .include_vertices = false};
    for (const Vector& x : make_domain_samples(prob.domain(), cfg)) {
      const Vector fd_g = testutil::fd_gradient(
          [&](const Vector& v) { return pen.value(v); }, x);
      worst_grad = std::max(worst_grad, testutil::rel_err(pen.gradient(x), fd_g));

      const Matrix fd_h = testutil::fd_jacobian(
          [&](const Vector& v) { return pen.gradient(v); }, x);
      const Matrix sym_fd = 0.5 * (fd_h + fd_h.transpose());
      worst_hess = std::max(worst_hess, testutil::rel_err(pen.hessian(x), sym_fd));
    }
  }
  const bool pass = worst_grad <= 1e-5 && worst_hess <= 1e-4;
  return {pass, "gradient rel err " + fmt(worst_grad) +
                    " (tol 1e-5), hessian rel err " + fmt(worst_hess) +
                    " (tol 1e-4), 300 points"};
}

// ---------------------------------------------------------------------------
// 5. Forward invariance: from a feasible start on the separable benchmark
//    (n=50), 1e4 accelerated iterations stay feasible and the penalty value
//    coincides with the raw objective at every recorded iterate.

Outcome criterion5() {
  Vector beta, gamma;
  default_exp_coefficients(50, 1, &beta, &gamma);
  const Problem prob = make_exp_benchmark(50, beta, gamma, 100.0);
  const Vector x0 = resolve_start(prob, "feasible");
  const double res_tol = 1e-9 * (1.0 + prob.constraint_rhs().norm());

  double worst_res = 0.0, worst_val = 0.0;
  for (double eps : {0.1, 10.0}) {
    const PenaltyOracle pen(prob, eps);
    const SamplerConfig scfg{.count = 32, .seed = 5, .include_vertices = false};
    const LipschitzEstimate est =
        estimate_lipschitz(pen, make_domain_samples(prob.domain(), scfg));
    SolverConfig cfg;
    cfg.alpha = 1.0 / est.L;
    cfg.max_iter = 10000;
    cfg.grad_tol = 0.0;
    const RunTrace run = nesterov_convex(pen, x0, cfg);
    for (const TraceRecord& rec : run.records) {
      worst_res = std::max(worst_res, rec.residual);
      worst_val = std::max(worst_val, std::abs(rec.f_eps - rec.f) /
                                          std::max(1.0, std::abs(rec.f)));
    }
  }
  const bool pass = worst_res <= res_tol && worst_val <= 1e-12;
  return {pass, "max residual " + fmt(worst_res) + " (tol " + fmt(res_tol) +
                    "), max rel |f_eps - f| = " + fmt(worst_val) +
                    " (tol 1e-12)"};
}

// ---------------------------------------------------------------------------
// 6. Exactness: at the certified epsilon, the accelerated run from an
//    infeasible start lands on the KKT solution of the quadratic fixture,
//    and the multiplier function evaluated there reproduces the KKT
//    multiplier.

Outcome criterion6() {
  const Problem prob = make_random_quadratic(10, 3, 7);
  const Matrix q = prob.hessian(Vector::Zero(10));
  const Vector h = prob.gradient(Vector::Zero(10));
  const KKTPoint kkt = solve_kkt_quadratic(q, h, prob.constraint_matrix(),
                                           prob.constraint_rhs());

  const double bar = epsilon_bar_quadratic(q, prob.constraint_matrix());
  const PenaltyOracle pen(prob, bar);
  double lo = 0.0, hi = 0.0;
  symmetric_extreme_eigenvalues(pen.hessian(Vector::Zero(10)), &lo, &hi);

  Vector x0 = Vector::Constant(10, 2.0);
  if (prob.residual(x0).norm() < 1e-6) x0[0] += 1.0;  // keep the start infeasible

  SolverConfig cfg;
  cfg.alpha = 1.0 / hi;
  cfg.max_iter = 200000;
  cfg.grad_tol = 1e-12;
  cfg.record_every = 10000;
  const RunTrace run = nesterov_convex(pen, x0, cfg);

  const double x_err = (run.final_x - kkt.x).norm();
  const double mu_err = (pen.multiplier(kkt.x) - kkt.mu).norm();
  const bool pass = x_err <= 1e-6 && mu_err <= 1e-9;
  return {pass, "|x - x_kkt| = " + fmt(x_err) + " (tol 1e-6), |mu(x_kkt) - mu_kkt| = " +
                    fmt(mu_err) + " (tol 1e-9), epsilon = " + fmt(bar)};
}

// ---------------------------------------------------------------------------
// 7. Rate envelopes: (a) the convex variant shows at least k^-1.8 decay of
//    the gap on an ill-conditioned quadratic; (b) the strongly convex
//    variant decays at least 0.8 sqrt(s/L) per iteration.

Outcome criterion7() {
  // (a) log-spaced spectrum over six decades; the aggregate gap then tracks
  // the k^-2 envelope across the whole fit window.
  const int na = 24;
  Vector diag_a(na);
  for (int i = 0; i < na; ++i)
    diag_a[i] = std::pow(10.0, -6.0 + 6.0 * i / (na - 1.0));
  Matrix a_row = Matrix::Zero(1, na);
  a_row(0, 0) = 1.0;
  const Problem prob_a =
      make_quadratic(Matrix(diag_a.asDiagonal()), Vector::Zero(na), a_row,
                     Vector::Zero(1), BoxDomain::cube(na, -50.0, 50.0));
  const PenaltyOracle pen_a(prob_a, 1.0);
  double lo = 0.0, hi = 0.0;
  symmetric_extreme_eigenvalues(pen_a.hessian(Vector::Zero(na)), &lo, &hi);

  SolverConfig cfg_a;
  cfg_a.alpha = 1.0 / hi;
  cfg_a.max_iter = 1000;
  cfg_a.grad_tol = 0.0;
  cfg_a.f_star = 0.0;  // minimizer is the origin
  const RunTrace run_a = nesterov_convex(pen_a, Vector::Ones(na), cfg_a);

  std::vector<double> log_k, log_gap;
  for (const TraceRecord& rec : run_a.records) {
    if (rec.k < 10 || rec.k > 1000) continue;
    if (!(rec.gap > 1e-14)) continue;
    log_k.push_back(std::log(static_cast<double>(rec.k)));
    log_gap.push_back(std::log(rec.gap));
  }
  const double slope =
      log_k.size() >= 100 ? testutil::fit_slope(log_k, log_gap) : 0.0;
  const bool pass_a = log_k.size() >= 100 && slope <= -1.8;

  // (b) strong variant on a one-decade spectrum at half the certified
  // epsilon, with s and L read off the assembled penalty Hessian.
  const int nb = 8;
  Vector diag_b(nb);
  for (int i = 0; i < nb; ++i)
    diag_b[i] = std::pow(10.0, -1.0 + 1.0 * i / (nb - 1.0));
  Matrix ones_row = Matrix::Ones(1, nb);
  Vector b(1);
  b << 1.0;
  const Matrix qb = diag_b.asDiagonal();
  const Problem prob_b = make_quadratic(qb, Vector::Zero(nb), ones_row, b,
                                        BoxDomain::cube(nb, -50.0, 50.0));
  const double eps_b = 0.5 * epsilon_bar_quadratic(qb, ones_row);
  const PenaltyOracle pen_b(prob_b, eps_b);
  double s = 0.0, L = 0.0;
  symmetric_extreme_eigenvalues(pen_b.hessian(Vector::Zero(nb)), &s, &L);
  if (!(s > 0.0))
    return {false, "strong fixture lost positive curvature (s = " + fmt(s) + ")"};

  const KKTPoint kkt = solve_kkt_quadratic(qb, Vector::Zero(nb), ones_row, b);
  SolverConfig cfg_b;
  cfg_b.alpha = 1.0 / L;
  cfg_b.max_iter = 600;
  cfg_b.grad_tol = 0.0;
  cfg_b.f_star = prob_b.value(kkt.x);
  Vector x0 = project_to_feasible(prob_b, Vector::Constant(nb, 5.0));
  x0[0] += 3.0;  // null-space kick so the initial gap is O(1)
  x0[1] -= 3.0;
  const RunTrace run_b = nesterov_strong(pen_b, x0, s, L, cfg_b);

  std::vector<double> ks, logs;
  for (const TraceRecord& rec : run_b.records) {
    if (rec.k < 50 || rec.k > 500) continue;
    if (!(rec.gap > 1e-13)) continue;
    ks.push_back(static_cast<double>(rec.k));
    logs.push_back(std::log(rec.gap));
  }
  const double decay = ks.size() >= 40 ? -testutil::fit_slope(ks, logs) : 0.0;
  const double floor = 0.8 * std::sqrt(s / L);
  const bool pass_b = ks.size() >= 40 && decay >= floor;

  return {pass_a && pass_b,
          "log-log slope " + fmt(slope) + " (ceiling -1.8, " +
              std::to_string(log_k.size()) + " pts); per-iteration decay " +
              fmt(decay) + " (floor " + fmt(floor) + ", " +
              std::to_string(ks.size()) + " pts)"};
}

// ---------------------------------------------------------------------------
// 8. Benchmark ordering: on the n=50 separable instance the accelerated
//    method reaches gap 1e-6 in strictly fewer iterations than plain
//    descent and both saddle-point baselines, and all four traces are
//    well-formed CSV files.

bool csv_well_formed(const std::string& path, std::string* why) {
  const std::vector<std::string> lines = testutil::read_lines(path);
  if (lines.size() < 2) {
    *why = "fewer than two lines in " + path;
    return false;
  }
  if (lines[0] != "k,f,f_eps,gap,residual,wall_time_s") {
    *why = "bad header in " + path;
    return false;
  }
  long prev_k = -1;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::stringstream ss(lines[i]);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 6) {
      *why = "row with " + std::to_string(fields.size()) + " fields in " + path;
      return false;
    }
    const long k = std::stol(fields[0]);
    if (k <= prev_k) {
      *why = "non-increasing k in " + path;
      return false;
    }
    prev_k = k;
    for (int j = 1; j < 6; ++j) (void)std::stod(fields[j]);  // throws if not numeric
  }
  return true;
}

Outcome criterion8() {
  const std::string spec_path =
      std::string(ACCPEN_FIXTURE_DIR) + "/bench_exp50.json";
  const LoadedExperiment loaded = load_experiment(spec_path);
  RunContext ctx = prepare_run(loaded);
  const std::string out = testutil::temp_dir("acceptance_bench");
  const BenchResult result = run_bench(ctx, out);

  if (result.rows.size() != 4)
    return {false, std::to_string(result.rows.size()) + " rows (want 4)"};

  long accel = -1;
  for (const BenchRow& row : result.rows)
    if (row.label == "nesterov_strong") accel = row.iters_to_tol;
  bool ordering = accel > 0;
  std::string iters_text = "iters to 1e-6:";
  for (const BenchRow& row : result.rows) {
    iters_text += " " + row.label + "=" + std::to_string(row.iters_to_tol);
    if (row.label == "nesterov_strong") continue;
    if (!(row.iters_to_tol == -1 || row.iters_to_tol > accel)) ordering = false;
  }

  std::string why;
  bool csv_ok = true;
  for (const BenchRow& row : result.rows)
    if (!csv_well_formed(row.trace_path, &why)) csv_ok = false;

  return {ordering && csv_ok,
          iters_text + (csv_ok ? "; 4 well-formed traces" : "; " + why)};
}

// ---------------------------------------------------------------------------
// 9. Refusal path: the CLI exits with code 2 on the example problem and
//    names a sample where the corrected Hessian is not positive definite.

Outcome criterion9() {
  const std::string dir = testutil::temp_dir("acceptance_cli");
  const std::string err_path = dir + "/stderr.txt";
  const std::string cmd = std::string(ACCPEN_CLI_PATH) + " epsilon --problem \"" +
                          std::string(ACCPEN_FIXTURE_DIR) +
                          "/example1.json\" --out \"" + dir + "\" > /dev/null 2> \"" +
                          err_path + "\"";
  const int raw = std::system(cmd.c_str());
  if (raw == -1 || !WIFEXITED(raw)) return {false, "could not launch the CLI"};
  const int code = WEXITSTATUS(raw);
  const std::string err = testutil::read_text(err_path);
  const bool message_ok =
      contains(err, "not positive definite") && contains(err, "x = [");
  return {code == 2 && message_ok,
          "exit code " + std::to_string(code) +
              (message_ok ? ", sample named in the message"
                          : ", message missing the sample")};
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* title;
    double budget_s;
    std::function<Outcome()> fn;
  };
  const std::vector<Entry> entries = {
      {1, "penalty Hessian determinant identity", 1.0, criterion1},
      {2, "certified epsilon keeps random quadratics PSD", 5.0, criterion2},
      {3, "hand-computed convexity bounds", 1.0, criterion3},
      {4, "finite-difference derivative consistency", 10.0, criterion4},
      {5, "forward invariance of feasible iterates", 30.0, criterion5},
      {6, "penalty minimizer matches the KKT solution", 10.0, criterion6},
      {7, "convergence-rate envelopes", 30.0, criterion7},
      {8, "benchmark ordering and trace files", 120.0, criterion8},
      {9, "CLI refusal path", 1.0, criterion9},
  };

  bool all_pass = true;
  for (const Entry& entry : entries) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = entry.fn();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double dt =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    if (dt > entry.budget_s) {
      outcome.pass = false;
      outcome.detail += " [over the " + fmt(entry.budget_s) + " s budget]";
    }
    std::cout << "C" << entry.id << (outcome.pass ? " PASS " : " FAIL ")
              << entry.title << ": " << outcome.detail << " [" << fmt(dt)
              << " s]" << std::endl;
    all_pass = all_pass && outcome.pass;
  }
  return all_pass ? 0 : 1;
}
