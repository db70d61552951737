#include "cortexk/kernel.hpp"

#include <cmath>

namespace cortexk {

double kernel_numeric(const DiscreteBank& bank, const FeaturePoint& p,
                      const FeaturePoint& q) {
  const auto pixel = [](double v, const char* what) {
    const long long r = std::llround(v);
    if (std::abs(v - static_cast<double>(r)) > 1e-9)
      throw ConfigError(std::string("kernel_numeric: ") + what +
                        " is not an integer pixel shift");
    return static_cast<int>(r);
  };
  if (!p.f || !q.f)
    throw ConfigError("kernel_numeric: discrete points lack a filter index");
  if (*p.f < 0 || *p.f >= bank.count() || *q.f < 0 || *q.f >= bank.count())
    throw ConfigError("kernel_numeric: filter index out of range");
  const int px = pixel(p.x, "p.x"), py = pixel(p.y, "p.y");
  const int qx = pixel(q.x, "q.x"), qy = pixel(q.y, "q.y");
  const Eigen::MatrixXcd& fp = bank.filter(*p.f).values;
  const Eigen::MatrixXcd& fq = bank.filter(*q.f).values;
  const int half = (bank.support() - 1) / 2;

  const int ulo = std::max(px, qx) - half, uhi = std::min(px, qx) + half;
  const int vlo = std::max(py, qy) - half, vhi = std::min(py, qy) + half;
  double acc = 0.0;
  for (int v = vlo; v <= vhi; ++v) {
    for (int u = ulo; u <= uhi; ++u) {
      const Complex a = fp(v - py + half, u - px + half);
      const Complex b = fq(v - qy + half, u - qx + half);
      acc += a.real() * b.real() + a.imag() * b.imag();
    }
  }
  return bank.delta() * bank.delta() * acc;
}

Complex gabor_pair_inner(const AnisoGabor& a, const AnisoGabor& b) {
  using Mat2 = Eigen::Matrix2d;
  using Vec2 = Eigen::Vector2d;
  const auto rot = [](double t) {
    Mat2 r;
    r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
    return r;
  };
  const auto quad = [&](const AnisoGabor& g) {
    const Mat2 r = rot(g.theta);
    Mat2 d = Mat2::Zero();
    d(0, 0) = 1.0 / (g.sigma_across * g.sigma_across);
    d(1, 1) = 1.0 / (g.sigma_along * g.sigma_along);
    return Mat2(r * d * r.transpose());
  };
  const Vec2 m1(a.x, a.y), m2(b.x, b.y);
  const Vec2 k1 = (kTwoPi / a.lambda) * Vec2(std::cos(a.theta), std::sin(a.theta));
  const Vec2 k2 = (kTwoPi / b.lambda) * Vec2(std::cos(b.theta), std::sin(b.theta));
  const Mat2 q1 = quad(a), q2 = quad(b);
  const Mat2 A = q1 + q2;
  const Mat2 Ainv = A.inverse();
  const Vec2 wr = q1 * m1 + q2 * m2;
  const Vec2 wi = k1 - k2;
  // exponent = -1/2 (m1'Q1 m1 + m2'Q2 m2) + 1/2 w'A^-1 w - i k1'm1 + i k2'm2
  const double re = -0.5 * (m1.dot(q1 * m1) + m2.dot(q2 * m2)) +
                    0.5 * (wr.dot(Ainv * wr) - wi.dot(Ainv * wi));
  const double im = wr.dot(Ainv * wi) - k1.dot(m1) + k2.dot(m2);
  const double amp = kTwoPi / std::sqrt(A.determinant());
  return amp * std::exp(re) * Complex(std::cos(im), std::sin(im));
}

double kernel_gabor_analytic(const GaborParams& g, const FeaturePoint& p) {
  validate(g);
  const double s2 = g.sigma * g.sigma;
  const double ct = std::cos(p.theta);
  const double env =
      std::exp(-p.x * p.x / (4.0 * s2) - p.y * p.y / (4.0 * s2) -
               2.0 * s2 * kPi * kPi * (1.0 - ct) / (g.lambda * g.lambda));
  const double carrier =
      std::cos(kPi * (p.x * (1.0 + ct) + p.y * std::sin(p.theta)) / g.lambda);
  return s2 * kPi * env * carrier;
}

RelativePose relative_pose(const FeaturePoint& p, const FeaturePoint& p0) {
  const double dx = p.x - p0.x;
  const double dy = p.y - p0.y;
  const double c0 = std::cos(p0.theta);
  const double s0 = std::sin(p0.theta);
  return RelativePose{c0 * dx + s0 * dy, -s0 * dx + c0 * dy,
                      p.theta - p0.theta};
}

double kernel_gabor_shifted(const GaborParams& g, const FeaturePoint& p,
                            const FeaturePoint& p0) {
  const RelativePose rp = relative_pose(p, p0);
  return kernel_gabor_analytic(g, FeaturePoint::spatial(rp.a, rp.b, rp.dtheta));
}

double eta_gabor(const GaborParams& g) {
  validate(g);
  return g.sigma * g.sigma * kPi;
}

double kernel_endstop(const EndstopParams& e, const FeaturePoint& p,
                      const FeaturePoint& q) {
  validate(e);
  const AnisoGabor ps = endstop_short_atom(e, p), pl = endstop_long_atom(e, p);
  const AnisoGabor qs = endstop_short_atom(e, q), ql = endstop_long_atom(e, q);
  return e.cs * e.cs * gabor_pair_inner(ps, qs).real() -
         e.cs * e.cl * gabor_pair_inner(ps, ql).real() -
         e.cl * e.cs * gabor_pair_inner(pl, qs).real() +
         e.cl * e.cl * gabor_pair_inner(pl, ql).real();
}

double eta_endstop(const EndstopParams& e) {
  const FeaturePoint o = FeaturePoint::spatial(0, 0, 0);
  return kernel_endstop(e, o, o);
}

double kernel_distance(double eta, double k, double tol) {
  if (!(eta > 0.0)) throw ConfigError("kernel_distance: eta must be > 0");
  if (k > eta + tol * std::max(1.0, eta))
    throw ConfigError("kernel_distance: k exceeds eta, normalization broken");
  return std::sqrt(std::max(0.0, 2.0 * (eta - k)));
}

bool patch_contains(const PatchSpec& ps, const FeaturePoint& p,
                    const FeaturePoint& p0) {
  if (!(ps.lambda > 0.0)) throw ConfigError("patch_contains: lambda <= 0");
  const RelativePose rp = relative_pose(p, p0);
  return std::abs(rp.a * (1.0 + std::cos(rp.dtheta)) +
                  rp.b * std::sin(rp.dtheta)) < ps.lambda;
}

KernelField truncate_kernel(const KernelField& field, const PatchSpec& ps,
                            TruncateMode mode) {
  KernelField out = field;
  const FeaturePoint p0 = field.grid.point(field.origin);
  std::vector<char> inside(static_cast<size_t>(field.grid.size()));
  for (Index i = 0; i < field.grid.size(); ++i)
    inside[static_cast<size_t>(i)] =
        patch_contains(ps, field.grid.point(i), p0) ? 1 : 0;
  if (mode == TruncateMode::ZeroOutside) {
    for (Index i = 0; i < field.grid.size(); ++i)
      if (!inside[static_cast<size_t>(i)]) out.values[i] = 0.0;
  } else {
    double floor = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < field.grid.size(); ++i)
      if (inside[static_cast<size_t>(i)])
        floor = std::min(floor, field.values[i]);
    if (!std::isfinite(floor))
      throw DegenerateOperatorError("truncate_kernel: empty patch");
    out.values = field.values.max(floor);
  }
  return out;
}

double kernel_spatiotemporal(const SpatioTemporalParams& sp,
                             const FeaturePoint& p, const FeaturePoint& p0) {
  validate(sp);
  if (!p.t || !p.alpha || !p0.t || !p0.alpha)
    throw ConfigError("kernel_spatiotemporal: points lack (t, alpha)");
  if (*p.t != *p0.t) {
    // No closed form across distinct temporal centers; integrate directly.
    const SpatioTemporalBank bank{sp};
    return kernel_numeric(bank, p, p0, sp.sigma / 10.0, sp.beta / 10.0);
  }
  const GaborParams g{sp.lambda, sp.sigma};
  const double da = *p.alpha - *p0.alpha;
  const double temporal = sp.beta * std::sqrt(kPi) *
                          std::exp(-kPi * kPi * sp.beta * sp.beta * da * da);
  return kernel_gabor_shifted(g, FeaturePoint::spatial(p.x, p.y, p.theta),
                              FeaturePoint::spatial(p0.x, p0.y, p0.theta)) *
         temporal;
}

double eta_spatiotemporal(const SpatioTemporalParams& sp) {
  validate(sp);
  return sp.sigma * sp.sigma * kPi * sp.beta * std::sqrt(kPi);
}

double kernel_c_family(const SpatioTemporalParams& sp, const FeaturePoint& q,
                       const FeaturePoint& q0) {
  if (!q.c || !q0.c || *q.c < 0.0 || *q.c > 1.0 || *q0.c < 0.0 || *q0.c > 1.0)
    throw ConfigError("kernel_c_family: C must lie in [0, 1]");
  if (!q.alpha || !q0.alpha || *q.alpha < 0.0 || *q0.alpha < 0.0)
    throw ConfigError("kernel_c_family: requires alpha >= 0");
  const double c = *q.c, c0 = *q0.c;
  const auto with_alpha = [](const FeaturePoint& base, double alpha) {
    FeaturePoint p = base;
    p.alpha = alpha;
    return p;
  };
  const double app = kernel_spatiotemporal(sp, with_alpha(q, *q.alpha),
                                           with_alpha(q0, *q0.alpha));
  const double apm = kernel_spatiotemporal(sp, with_alpha(q, *q.alpha),
                                           with_alpha(q0, -*q0.alpha));
  const double amp = kernel_spatiotemporal(sp, with_alpha(q, -*q.alpha),
                                           with_alpha(q0, *q0.alpha));
  const double amm = kernel_spatiotemporal(sp, with_alpha(q, -*q.alpha),
                                           with_alpha(q0, -*q0.alpha));
  return c * c0 * app + c * (1.0 - c0) * apm + (1.0 - c) * c0 * amp +
         (1.0 - c) * (1.0 - c0) * amm;
}

double kernel_pinwheel(const PinwheelMap& map, const GaborParams& g, double x,
                       double y, double x0, double y0) {
  return kernel_gabor_shifted(
      g, FeaturePoint::spatial(x, y, map.at(x, y)),
      FeaturePoint::spatial(x0, y0, map.at(x0, y0)));
}

}  // namespace cortexk
