#include "cortexk/pinwheel.hpp"

#include <cmath>
#include <vector>

namespace cortexk {

double PinwheelMap::at(double x, double y, double tol) const {
  const double cf = x / spacing + (width() - 1) / 2.0;
  const double rf = (height() - 1) / 2.0 - y / spacing;
  const int c = static_cast<int>(std::llround(cf));
  const int r = static_cast<int>(std::llround(rf));
  if (c < 0 || c >= width() || r < 0 || r >= height() ||
      std::abs(cf - c) > tol || std::abs(rf - r) > tol)
    throw ConfigError("PinwheelMap::at: point is not on the map lattice");
  return theta(r, c);
}

PinwheelMap generate_pinwheel(int width, int height, double spacing, int m,
                              double k, std::uint64_t seed) {
  if (width <= 0 || height <= 0 || !(spacing > 0.0))
    throw ConfigError("generate_pinwheel: bad raster dimensions");
  if (m < 2 || !(k > 0.0))
    throw ConfigError("generate_pinwheel: need m >= 2 waves and k > 0");

  Rng rng(seed);
  std::vector<double> phi(static_cast<size_t>(m));
  for (double& p : phi) p = rng.uniform(0.0, kTwoPi);

  PinwheelMap map;
  map.spacing = spacing;
  map.theta.resize(height, width);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const double x = map.xcoord(c);
      const double y = map.ycoord(r);
      Complex sum = 0.0;
      for (int j = 1; j <= m; ++j) {
        const double ang = kPi * static_cast<double>(j) / m;
        const double phase =
            k * (std::cos(ang) * x + std::sin(ang) * y) + phi[static_cast<size_t>(j - 1)];
        sum += Complex(std::cos(phase), std::sin(phase));
      }
      double th = 0.5 * std::arg(sum);  // arg in (-pi, pi] -> th in (-pi/2, pi/2]
      if (th <= -kPi / 2) th += kPi;
      map.theta(r, c) = th;
    }
  }
  return map;
}

}  // namespace cortexk
