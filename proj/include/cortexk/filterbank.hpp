#pragma once

#include <vector>

#include "cortexk/feature.hpp"
#include "cortexk/pinwheel.hpp"

namespace cortexk {

/// Gabor receptive profile centered at p, evaluated at (u, v):
///   exp(2 pi i X / lambda) * exp(-(X^2 + Y^2) / (2 sigma^2)),
/// where (X, Y) are the offsets (u - x, v - y) rotated into the filter frame.
/// The profile oscillates across its stripes (the X direction); the stripe
/// axis (Y direction) is the axis of preferred orientation.
template <typename Scalar = double>
std::complex<Scalar> gabor_value(const GaborParams& g, const FeaturePoint& p,
                                 Scalar u, Scalar v) {
  const Scalar du = u - static_cast<Scalar>(p.x);
  const Scalar dv = v - static_cast<Scalar>(p.y);
  const Scalar ct = std::cos(static_cast<Scalar>(p.theta));
  const Scalar st = std::sin(static_cast<Scalar>(p.theta));
  const Scalar X = du * ct + dv * st;
  const Scalar Y = -du * st + dv * ct;
  const Scalar phase = Scalar(2) * static_cast<Scalar>(kPi) * X / static_cast<Scalar>(g.lambda);
  const Scalar env = std::exp(-(X * X + Y * Y) / (Scalar(2) * static_cast<Scalar>(g.sigma * g.sigma)));
  return std::polar(env, phase);
}

/// Gabor atom with an anisotropic Gaussian envelope. sigma_across is the
/// width in the oscillation direction, sigma_along the extent down the
/// stripe axis. The isotropic profile is sigma_across == sigma_along.
struct AnisoGabor {
  double x = 0.0, y = 0.0, theta = 0.0;
  double lambda = 1.0;
  double sigma_across = 0.5;
  double sigma_along = 0.5;
};

Complex aniso_gabor_value(const AnisoGabor& a, double u, double v);

/// Short and long atoms of an endstopped profile, as positioned at p.
AnisoGabor endstop_short_atom(const EndstopParams& e, const FeaturePoint& p);
AnisoGabor endstop_long_atom(const EndstopParams& e, const FeaturePoint& p);

/// Endstopped profile cS * psi_S(u, v) - cL * psi_L(u, v).
Complex endstopped_value(const EndstopParams& e, const FeaturePoint& p,
                         double u, double v);

/// Endstopped response combination h(cS h(rS) - cL h(rL)) with the
/// half-wave rectifier h(z) = max(z, 0).
double endstopped_response(const EndstopParams& e, double r_short,
                           double r_long);

/// Spatiotemporal profile centered at (x, y, theta, t) with temporal
/// frequency alpha:
///   exp(-2 pi i (X / lambda + alpha (s - t)))
///     * exp(-(X^2 + Y^2) / (2 sigma^2) - (s - t)^2 / (2 beta^2)).
Complex spatiotemporal_value(const SpatioTemporalParams& sp,
                             const FeaturePoint& p, double u, double v,
                             double s);

/// Inseparable-pair mixture C psi_{+alpha} + (1 - C) psi_{-alpha}.
/// Requires p.c in [0, 1] and p.alpha >= 0.
Complex c_weighted_value(const SpatioTemporalParams& sp, const FeaturePoint& p,
                         double u, double v, double s);

/// A discrete filter on a square pixel lattice with spacing delta.
struct DiscreteFilter {
  Eigen::MatrixXcd values;       ///< (rows, cols), centered support
  double delta = 1.0;
  bool real_valued = false;
  Eigen::Vector2i peak_shift{0, 0};  ///< (row, col) translation applied when centering

  int rows() const { return static_cast<int>(values.rows()); }
  int cols() const { return static_cast<int>(values.cols()); }
};

/// Center raw filter arrays and crop them to a common odd support:
/// each filter is zero-padded by `pad` pixels, recentered on its peak
/// (modulus maximum for complex filters, signed maximum for real ones; ties
/// break to the smallest row, then column), and cropped to crop x crop.
/// Re-ingesting already centered filters with pad = 0 is the identity.
std::vector<DiscreteFilter> ingest_discrete_bank(
    const std::vector<Eigen::MatrixXcd>& raw, int pad, int crop,
    double delta = 1.0);

/// A finite bank of discrete filters sharing support size and spacing.
/// Feature space: integer pixel shifts times the filter index.
class DiscreteBank {
 public:
  DiscreteBank() = default;
  explicit DiscreteBank(std::vector<DiscreteFilter> filters);

  int count() const { return static_cast<int>(filters_.size()); }
  int support() const { return support_; }
  double delta() const { return delta_; }
  const DiscreteFilter& filter(int f) const {
    return filters_.at(static_cast<size_t>(f));
  }

  /// Squared L2 norm (cell-weighted) of one filter.
  double filter_eta(int f) const;

  /// Rescale every filter to the bank-mean eta. Filters whose eta already
  /// agree to `tol` relative are left untouched.
  DiscreteBank normalized(double tol = 1e-6) const;

 private:
  std::vector<DiscreteFilter> filters_;
  int support_ = 0;
  double delta_ = 1.0;
};

/// Seeded generator of oriented, bandpass, localized real filters on a
/// size x size lattice, standing in for a learned dictionary.
std::vector<Eigen::MatrixXcd> synthetic_learned_bank(int count, int size,
                                                     std::uint64_t seed);

/// Ground-truth stripe orientations of the synthetic bank above, one angle
/// in [0, pi) per filter, in generation order. Angles are measured in the
/// filter's array frame (x along columns, y along rows) and give the axis
/// the atom is elongated along.
std::vector<double> synthetic_learned_orientations(int count,
                                                   std::uint64_t seed);

// Analytic bank wrappers. Each exposes value(p, u, v) plus the radius beyond
// which the envelope is negligible, which is what the numeric kernel
// quadrature uses to pick its window.

struct GaborBank {
  GaborParams params;
  Complex value(const FeaturePoint& p, double u, double v) const {
    return gabor_value(params, p, u, v);
  }
  double support_radius() const { return 4.0 * params.sigma; }
};

struct EndstopBank {
  EndstopParams params;
  Complex value(const FeaturePoint& p, double u, double v) const {
    return endstopped_value(params, p, u, v);
  }
  double support_radius() const;
};

struct SpatioTemporalBank {
  SpatioTemporalParams params;
  Complex value(const FeaturePoint& p, double u, double v, double s) const {
    return spatiotemporal_value(params, p, u, v, s);
  }
  double support_radius() const { return 4.0 * params.sigma; }
  double temporal_radius() const { return 4.0 * params.beta; }
};

struct CFamilyBank {
  SpatioTemporalParams params;
  Complex value(const FeaturePoint& p, double u, double v, double s) const {
    return c_weighted_value(params, p, u, v, s);
  }
  double support_radius() const { return 4.0 * params.sigma; }
  double temporal_radius() const { return 4.0 * params.beta; }
};

/// Gabor bank restricted to the orientations of a pinwheel map: a purely
/// spatial family psi_(x, y) = psi_(x, y, theta(x, y)).
struct PinwheelBank {
  GaborParams params;
  PinwheelMap map;
  Complex value(const FeaturePoint& p, double u, double v) const {
    FeaturePoint q = p;
    q.theta = map.at(p.x, p.y);
    return gabor_value(params, q, u, v);
  }
  double support_radius() const { return 4.0 * params.sigma; }
};

PinwheelBank pinwheel_restrict(const GaborParams& g, PinwheelMap map);

}  // namespace cortexk
