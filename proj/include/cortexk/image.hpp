#pragma once

#include "cortexk/common.hpp"

namespace cortexk {

/// Grayscale image on a square pixel lattice centered at the origin,
/// values in [0, 1]. Row 0 is the top of the picture (largest y).
struct ImageGray {
  Eigen::ArrayXXd values;  ///< (height rows, width cols)
  double spacing = 1.0;

  int width() const { return static_cast<int>(values.cols()); }
  int height() const { return static_cast<int>(values.rows()); }
  double xcoord(int col) const { return spacing * (col - (width() - 1) / 2.0); }
  double ycoord(int row) const {
    return spacing * ((height() - 1) / 2.0 - row);
  }
};

}  // namespace cortexk
