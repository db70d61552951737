#pragma once

#include "cortexk/common.hpp"

namespace cortexk {

/// Orientation preference map on a square pixel lattice centered at the
/// origin. Values lie in (-pi/2, pi/2].
struct PinwheelMap {
  Eigen::ArrayXXd theta;  ///< (height rows, width cols)
  double spacing = 1.0;   ///< physical units per pixel

  int width() const { return static_cast<int>(theta.cols()); }
  int height() const { return static_cast<int>(theta.rows()); }

  double xcoord(int col) const {
    return spacing * (col - (width() - 1) / 2.0);
  }
  double ycoord(int row) const {
    return spacing * ((height() - 1) / 2.0 - row);  // row 0 on top
  }

  /// Orientation at an exact lattice position; off-lattice input is an error.
  double at(double x, double y, double tol = 1e-9) const;
};

/// Superposition-of-plane-waves orientation map,
///   theta(x, y) = arg(sum_j exp(i(k n_j . (x, y) + phi_j))) / 2,
/// with m directions n_j = (cos(pi j / m), sin(pi j / m)) and seeded random
/// phases phi_j uniform in [0, 2pi).
PinwheelMap generate_pinwheel(int width, int height, double spacing, int m,
                              double k, std::uint64_t seed);

}  // namespace cortexk
