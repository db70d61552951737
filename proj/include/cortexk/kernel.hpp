#pragma once

#include <concepts>

#include "cortexk/filterbank.hpp"
#include "cortexk/grid.hpp"

namespace cortexk {

template <typename B>
concept SpatialBankLike = requires(const B& b, const FeaturePoint& p, double u,
                                   double v) {
  { b.value(p, u, v) } -> std::convertible_to<Complex>;
  { b.support_radius() } -> std::convertible_to<double>;
};

template <typename B>
concept SpaceTimeBankLike = requires(const B& b, const FeaturePoint& p,
                                     double u, double v, double s) {
  { b.value(p, u, v, s) } -> std::convertible_to<Complex>;
  { b.support_radius() } -> std::convertible_to<double>;
  { b.temporal_radius() } -> std::convertible_to<double>;
};

/// Generating kernel between two bank members, by Riemann quadrature of
/// Re <psi_p, psi_q> on a shared grid of spacing delta covering both
/// supports. The sampled sum is delta^2 * sum psi_p * conj(psi_q).
template <SpatialBankLike B>
double kernel_numeric(const B& bank, const FeaturePoint& p,
                      const FeaturePoint& q, double delta) {
  if (!(delta > 0.0)) throw ConfigError("kernel_numeric: delta must be > 0");
  const double r = bank.support_radius();
  const double ulo = std::min(p.x, q.x) - r, uhi = std::max(p.x, q.x) + r;
  const double vlo = std::min(p.y, q.y) - r, vhi = std::max(p.y, q.y) + r;
  const int nu = static_cast<int>(std::ceil((uhi - ulo) / delta));
  const int nv = static_cast<int>(std::ceil((vhi - vlo) / delta));
  double acc = 0.0;
  for (int j = 0; j < nv; ++j) {
    const double v = vlo + (j + 0.5) * delta;
    for (int i = 0; i < nu; ++i) {
      const double u = ulo + (i + 0.5) * delta;
      const Complex a = bank.value(p, u, v);
      const Complex b = bank.value(q, u, v);
      acc += a.real() * b.real() + a.imag() * b.imag();
    }
  }
  return delta * delta * acc;
}

/// Same quadrature for spatiotemporal banks; the cell volume is
/// delta^2 * delta_t.
template <SpaceTimeBankLike B>
double kernel_numeric(const B& bank, const FeaturePoint& p,
                      const FeaturePoint& q, double delta, double delta_t) {
  if (!(delta > 0.0) || !(delta_t > 0.0))
    throw ConfigError("kernel_numeric: steps must be > 0");
  if (!p.t || !q.t)
    throw ConfigError("kernel_numeric: spatiotemporal points lack t");
  const double r = bank.support_radius();
  const double rt = bank.temporal_radius();
  const double ulo = std::min(p.x, q.x) - r, uhi = std::max(p.x, q.x) + r;
  const double vlo = std::min(p.y, q.y) - r, vhi = std::max(p.y, q.y) + r;
  const double slo = std::min(*p.t, *q.t) - rt, shi = std::max(*p.t, *q.t) + rt;
  const int nu = static_cast<int>(std::ceil((uhi - ulo) / delta));
  const int nv = static_cast<int>(std::ceil((vhi - vlo) / delta));
  const int ns = static_cast<int>(std::ceil((shi - slo) / delta_t));
  double acc = 0.0;
  for (int k = 0; k < ns; ++k) {
    const double s = slo + (k + 0.5) * delta_t;
    for (int j = 0; j < nv; ++j) {
      const double v = vlo + (j + 0.5) * delta;
      for (int i = 0; i < nu; ++i) {
        const double u = ulo + (i + 0.5) * delta;
        const Complex a = bank.value(p, u, v, s);
        const Complex b = bank.value(q, u, v, s);
        acc += a.real() * b.real() + a.imag() * b.imag();
      }
    }
  }
  return delta * delta * delta_t * acc;
}

/// Exact kernel for a discrete bank: the lattice sum over the overlap of the
/// two shifted supports. Positions must be integer pixel shifts and both
/// points must carry a filter index.
double kernel_numeric(const DiscreteBank& bank, const FeaturePoint& p,
                      const FeaturePoint& q);

/// Squared L2 norm of one bank member.
template <typename B>
double eta_numeric(const B& bank, const FeaturePoint& p, double delta) {
  return kernel_numeric(bank, p, p, delta);
}

/// Exact inner product <psi_1, psi_2> of two anisotropic Gabor atoms,
/// evaluated through the closed-form Gaussian integral.
Complex gabor_pair_inner(const AnisoGabor& a, const AnisoGabor& b);

/// Closed-form Gabor kernel against the origin filter:
///   K(p, 0) = sigma^2 pi
///     * exp(-x^2 / 4 sigma^2 - y^2 / 4 sigma^2
///           - 2 sigma^2 pi^2 (1 - cos theta) / lambda^2)
///     * cos(pi (x (1 + cos theta) + y sin theta) / lambda).
double kernel_gabor_analytic(const GaborParams& g, const FeaturePoint& p);

/// Kernel between two arbitrary Gabor filters via the group shift:
/// p is carried into p0's frame (translate by -p0, rotate by -theta0) and
/// the origin formula is applied there.
double kernel_gabor_shifted(const GaborParams& g, const FeaturePoint& p,
                            const FeaturePoint& p0);

/// pose of p in p0's frame: (a, b) offsets and relative angle.
struct RelativePose {
  double a, b, dtheta;
};
RelativePose relative_pose(const FeaturePoint& p, const FeaturePoint& p0);

/// Norm constant of the Gabor bank, sigma^2 pi.
double eta_gabor(const GaborParams& g);

/// Closed-form kernel between two endstopped profiles (four atom pairs).
double kernel_endstop(const EndstopParams& e, const FeaturePoint& p,
                      const FeaturePoint& q);
double eta_endstop(const EndstopParams& e);

/// Kernel metric d(p, q) = sqrt(2 (eta - k)); rejects k > eta + tol.
double kernel_distance(double eta, double k, double tol = 1e-8);

/// The perceptual patch around p0: p belongs iff
/// |a (1 + cos dtheta) + b sin dtheta| < lambda in p0's frame. The zero set
/// of that expression is the cocircularity locus, so the patch keeps
/// near-cocircular poses at every relative angle.
struct PatchSpec {
  double lambda = 1.0;
};

bool patch_contains(const PatchSpec& ps, const FeaturePoint& p,
                    const FeaturePoint& p0);

enum class TruncateMode {
  ZeroOutside,  ///< zero the field outside the patch
  FloorClip     ///< clip everything below the in-patch minimum
};

/// Restrict a kernel field to the patch around its origin.
KernelField truncate_kernel(const KernelField& field, const PatchSpec& ps,
                            TruncateMode mode = TruncateMode::ZeroOutside);

/// Spatiotemporal kernel. For t == t0 it factorizes into the spatial Gabor
/// kernel times the temporal factor beta sqrt(pi) exp(-pi^2 beta^2
/// (alpha - alpha0)^2); otherwise it falls back to numeric quadrature.
double kernel_spatiotemporal(const SpatioTemporalParams& sp,
                             const FeaturePoint& p, const FeaturePoint& p0);
double eta_spatiotemporal(const SpatioTemporalParams& sp);

/// Kernel of the C-weighted family, expanded bilinearly over the four
/// (+alpha, -alpha) atom pairs.
double kernel_c_family(const SpatioTemporalParams& sp, const FeaturePoint& q,
                       const FeaturePoint& q0);

/// Kernel of the pinwheel-restricted bank: the Gabor kernel with the
/// orientations read off the map at the two positions.
double kernel_pinwheel(const PinwheelMap& map, const GaborParams& g, double x,
                       double y, double x0, double y0);

}  // namespace cortexk
