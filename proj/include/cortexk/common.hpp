#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace cortexk {

using Index = Eigen::Index;
using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Configuration / parameter validation failure (CLI exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numeric degeneracy, e.g. a transition-operator column with zero mass
/// (CLI exit code 3).
struct DegenerateOperatorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// File I/O failure (CLI exit code 4).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Reduce an angle to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::remainder(a, kTwoPi);  // lands in [-pi, pi]
  if (a <= -kPi) a += kTwoPi;
  return a;
}

/// Seeded generator with platform-independent uniform draws. The standard
/// distributions are implementation-defined, so doubles are built from the
/// raw 64-bit stream directly.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t bits() { return eng_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace cortexk
