#pragma once

#include <optional>

#include "cortexk/common.hpp"

namespace cortexk {

/// A point of the feature space a filter bank is indexed by. Position and
/// orientation are always meaningful; the remaining coordinates are present
/// only for the richer banks (spatiotemporal, c-weighted, discrete).
struct FeaturePoint {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;               ///< orientation, reduced to (-pi, pi]
  std::optional<double> t;          ///< temporal center
  std::optional<double> alpha;      ///< temporal frequency
  std::optional<double> c;          ///< separability index in [0, 1]
  std::optional<int> f;             ///< discrete filter index

  static FeaturePoint spatial(double x, double y, double theta) {
    return FeaturePoint{x, y, wrap_angle(theta), {}, {}, {}, {}};
  }
  static FeaturePoint spacetime(double x, double y, double theta, double t,
                                double alpha) {
    return FeaturePoint{x, y, wrap_angle(theta), t, alpha, {}, {}};
  }
};

struct GaborParams {
  double lambda = 1.0;  ///< wavelength of the plane-wave factor
  double sigma = 0.5;   ///< isotropic Gaussian width
};

inline void validate(const GaborParams& g) {
  if (!(g.lambda > 0.0) || !(g.sigma > 0.0))
    throw ConfigError("GaborParams: lambda and sigma must be positive");
}

/// Difference-of-Gabors profile cS*psi_S - cL*psi_L sharing position and
/// orientation. The aspect factors stretch each Gaussian along the stripe
/// axis, which is how profile length is varied while keeping the width.
struct EndstopParams {
  double cs = 2.0;
  double cl = 1.0;
  GaborParams short_gp{1.0, 0.35};
  GaborParams long_gp{1.0, 0.7};
  double aspect_short = 1.0;
  double aspect_long = 1.0;
};

inline void validate(const EndstopParams& e) {
  if (!(e.cs > e.cl) || !(e.cl > 0.0))
    throw ConfigError("EndstopParams: require cS > cL > 0");
  validate(e.short_gp);
  validate(e.long_gp);
  if (!(e.aspect_short > 0.0) || !(e.aspect_long > 0.0))
    throw ConfigError("EndstopParams: aspect factors must be positive");
}

struct SpatioTemporalParams {
  double lambda = 1.0;
  double sigma = 0.5;
  double beta = 1.0;  ///< temporal Gaussian width
};

inline void validate(const SpatioTemporalParams& s) {
  validate(GaborParams{s.lambda, s.sigma});
  if (!(s.beta > 0.0))
    throw ConfigError("SpatioTemporalParams: beta must be positive");
}

}  // namespace cortexk
