#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace accpen {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when a certified penalty parameter was requested but the convexity
/// assumption failed at some sample (or the certificate is otherwise unusable).
class RefusalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a solver iterate becomes non-finite or leaves the guard radius.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& msg, long iteration, double iterate_norm)
      : std::runtime_error(msg), iteration(iteration), iterate_norm(iterate_norm) {}
  long iteration = 0;
  double iterate_norm = 0.0;
};

/// Raised on malformed or inconsistent spec files.
class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Deterministic RNG with a platform-independent uniform mapping.
/// mt19937_64 output is fully specified by the standard; the [0,1) mapping
/// avoids std::uniform_real_distribution, whose stream is implementation-defined.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : gen_(seed) {}

  double next01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next01(); }

  /// Standard normal via Box-Muller on the deterministic uniform stream.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = next01();
    double u2 = next01();
    while (u1 <= 0.0) u1 = next01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  std::uint64_t next_u64() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace accpen
