#include "cortexk/filterbank.hpp"

#include <algorithm>
#include <cmath>

namespace cortexk {

Complex aniso_gabor_value(const AnisoGabor& a, double u, double v) {
  const double du = u - a.x;
  const double dv = v - a.y;
  const double ct = std::cos(a.theta);
  const double st = std::sin(a.theta);
  const double X = du * ct + dv * st;
  const double Y = -du * st + dv * ct;
  const double env = std::exp(-X * X / (2.0 * a.sigma_across * a.sigma_across) -
                              Y * Y / (2.0 * a.sigma_along * a.sigma_along));
  return std::polar(env, kTwoPi * X / a.lambda);
}

AnisoGabor endstop_short_atom(const EndstopParams& e, const FeaturePoint& p) {
  return AnisoGabor{p.x, p.y, p.theta, e.short_gp.lambda, e.short_gp.sigma,
                    e.short_gp.sigma * e.aspect_short};
}

AnisoGabor endstop_long_atom(const EndstopParams& e, const FeaturePoint& p) {
  return AnisoGabor{p.x, p.y, p.theta, e.long_gp.lambda, e.long_gp.sigma,
                    e.long_gp.sigma * e.aspect_long};
}

Complex endstopped_value(const EndstopParams& e, const FeaturePoint& p,
                         double u, double v) {
  validate(e);
  return e.cs * aniso_gabor_value(endstop_short_atom(e, p), u, v) -
         e.cl * aniso_gabor_value(endstop_long_atom(e, p), u, v);
}

double endstopped_response(const EndstopParams& e, double r_short,
                           double r_long) {
  validate(e);
  const auto h = [](double z) { return std::max(z, 0.0); };
  return h(e.cs * h(r_short) - e.cl * h(r_long));
}

Complex spatiotemporal_value(const SpatioTemporalParams& sp,
                             const FeaturePoint& p, double u, double v,
                             double s) {
  if (!p.t || !p.alpha)
    throw ConfigError("spatiotemporal_value: point lacks (t, alpha)");
  const double du = u - p.x;
  const double dv = v - p.y;
  const double ct = std::cos(p.theta);
  const double st = std::sin(p.theta);
  const double X = du * ct + dv * st;
  const double Y = -du * st + dv * ct;
  const double ds = s - *p.t;
  const double env = std::exp(-(X * X + Y * Y) / (2.0 * sp.sigma * sp.sigma) -
                              ds * ds / (2.0 * sp.beta * sp.beta));
  return std::polar(env, -kTwoPi * (X / sp.lambda + *p.alpha * ds));
}

Complex c_weighted_value(const SpatioTemporalParams& sp, const FeaturePoint& p,
                         double u, double v, double s) {
  if (!p.c || *p.c < 0.0 || *p.c > 1.0)
    throw ConfigError("c_weighted_value: C must lie in [0, 1]");
  if (!p.alpha || *p.alpha < 0.0)
    throw ConfigError("c_weighted_value: requires alpha >= 0");
  FeaturePoint plus = p;
  FeaturePoint minus = p;
  minus.alpha = -*p.alpha;
  return *p.c * spatiotemporal_value(sp, plus, u, v, s) +
         (1.0 - *p.c) * spatiotemporal_value(sp, minus, u, v, s);
}

double EndstopBank::support_radius() const {
  const double s = std::max(params.short_gp.sigma,
                            params.short_gp.sigma * params.aspect_short);
  const double l = std::max(params.long_gp.sigma,
                            params.long_gp.sigma * params.aspect_long);
  return 4.0 * std::max(s, l);
}

namespace {

bool is_real(const Eigen::MatrixXcd& m) {
  for (Index c = 0; c < m.cols(); ++c)
    for (Index r = 0; r < m.rows(); ++r)
      if (m(r, c).imag() != 0.0) return false;
  return true;
}

// Peak of the raw array: signed maximum for real filters, modulus maximum
// otherwise; ties to the smallest row, then smallest column.
std::pair<int, int> peak_location(const Eigen::MatrixXcd& m, bool real) {
  int br = 0, bc = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < static_cast<int>(m.rows()); ++r) {
    for (int c = 0; c < static_cast<int>(m.cols()); ++c) {
      const double v = real ? m(r, c).real() : std::abs(m(r, c));
      if (v > best) {
        best = v;
        br = r;
        bc = c;
      }
    }
  }
  return {br, bc};
}

}  // namespace

std::vector<DiscreteFilter> ingest_discrete_bank(
    const std::vector<Eigen::MatrixXcd>& raw, int pad, int crop,
    double delta) {
  if (raw.empty()) throw ConfigError("ingest_discrete_bank: empty bank");
  if (pad < 0) throw ConfigError("ingest_discrete_bank: pad must be >= 0");
  if (crop <= 0 || crop % 2 == 0)
    throw ConfigError("ingest_discrete_bank: crop size must be odd");
  if (!(delta > 0.0)) throw ConfigError("ingest_discrete_bank: delta <= 0");
  const Index rows = raw.front().rows();
  const Index cols = raw.front().cols();
  if (rows == 0 || cols == 0)
    throw ConfigError("ingest_discrete_bank: empty filter array");
  if (crop > rows + 2 * pad || crop > cols + 2 * pad)
    throw ConfigError("ingest_discrete_bank: crop exceeds padded size");

  std::vector<DiscreteFilter> out;
  out.reserve(raw.size());
  const int half = (crop - 1) / 2;
  for (const Eigen::MatrixXcd& m : raw) {
    if (m.rows() != rows || m.cols() != cols)
      throw ConfigError("ingest_discrete_bank: mismatched filter sizes");
    DiscreteFilter f;
    f.delta = delta;
    f.real_valued = is_real(m);
    const auto [pr, pc] = peak_location(m, f.real_valued);
    // Crop window centered on the peak of the padded array; anything falling
    // outside the padded extent reads as zero.
    f.values = Eigen::MatrixXcd::Zero(crop, crop);
    for (int r = 0; r < crop; ++r) {
      for (int c = 0; c < crop; ++c) {
        const int sr = pr - half + r;  // raw-array row
        const int sc = pc - half + c;
        if (sr >= -pad && sr < rows + pad && sc >= -pad && sc < cols + pad &&
            sr >= 0 && sr < rows && sc >= 0 && sc < cols)
          f.values(r, c) = m(sr, sc);
      }
    }
    f.peak_shift = Eigen::Vector2i(half - pr, half - pc);
    out.push_back(std::move(f));
  }
  return out;
}

DiscreteBank::DiscreteBank(std::vector<DiscreteFilter> filters)
    : filters_(std::move(filters)) {
  if (filters_.empty()) throw ConfigError("DiscreteBank: empty bank");
  support_ = filters_.front().rows();
  delta_ = filters_.front().delta;
  for (const DiscreteFilter& f : filters_) {
    if (f.rows() != support_ || f.cols() != support_)
      throw ConfigError("DiscreteBank: filters must share a square support");
    if (f.delta != delta_)
      throw ConfigError("DiscreteBank: filters must share the lattice spacing");
  }
}

double DiscreteBank::filter_eta(int f) const {
  const DiscreteFilter& df = filter(f);
  return delta_ * delta_ * df.values.squaredNorm();
}

DiscreteBank DiscreteBank::normalized(double tol) const {
  double mean = 0.0;
  for (int f = 0; f < count(); ++f) mean += filter_eta(f);
  mean /= count();
  double spread = 0.0;
  for (int f = 0; f < count(); ++f)
    spread = std::max(spread, std::abs(filter_eta(f) - mean));
  if (spread <= tol * mean) return *this;
  std::vector<DiscreteFilter> scaled = filters_;
  for (int f = 0; f < count(); ++f) {
    const double eta = filter_eta(f);
    if (!(eta > 0.0))
      throw DegenerateOperatorError("DiscreteBank: filter " +
                                    std::to_string(f) + " has zero norm");
    scaled[static_cast<size_t>(f)].values *= std::sqrt(mean / eta);
  }
  return DiscreteBank(std::move(scaled));
}

namespace {

struct SynthDraw {
  double theta, lambda, phase, sig_across, sig_along, cx, cy;
};

SynthDraw synth_draw(Rng& rng, int size) {
  SynthDraw d;
  d.theta = rng.uniform(0.0, kPi);
  d.lambda = rng.uniform(3.0, 5.0);
  d.phase = rng.uniform(0.0, kTwoPi);
  d.sig_across = rng.uniform(1.2, 1.8);
  d.sig_along = rng.uniform(2.2, 3.2);
  const double mid = (size - 1) / 2.0;
  d.cx = mid + rng.uniform(-2.5, 2.5);
  d.cy = mid + rng.uniform(-2.5, 2.5);
  return d;
}

}  // namespace

std::vector<Eigen::MatrixXcd> synthetic_learned_bank(int count, int size,
                                                     std::uint64_t seed) {
  if (count <= 0 || size <= 0)
    throw ConfigError("synthetic_learned_bank: bad dimensions");
  Rng rng(seed);
  std::vector<Eigen::MatrixXcd> bank;
  bank.reserve(static_cast<size_t>(count));
  for (int f = 0; f < count; ++f) {
    const SynthDraw d = synth_draw(rng, size);
    Eigen::MatrixXcd m(size, size);
    Eigen::MatrixXd env(size, size);
    for (int r = 0; r < size; ++r) {
      for (int c = 0; c < size; ++c) {
        const double du = c - d.cx;
        const double dv = r - d.cy;
        const double X = du * std::cos(d.theta) + dv * std::sin(d.theta);
        const double Y = -du * std::sin(d.theta) + dv * std::cos(d.theta);
        env(r, c) =
            std::exp(-X * X / (2.0 * d.sig_across * d.sig_across) -
                     Y * Y / (2.0 * d.sig_along * d.sig_along));
        m(r, c) = env(r, c) * std::cos(kTwoPi * X / d.lambda + d.phase);
      }
    }
    // remove the envelope-shaped DC component so the atom is truly bandpass
    const double dc = m.real().sum() / env.sum();
    m -= (env * dc).cast<Complex>();
    bank.push_back(std::move(m));
  }
  return bank;
}

std::vector<double> synthetic_learned_orientations(int count,
                                                   std::uint64_t seed) {
  if (count <= 0) throw ConfigError("synthetic_learned_orientations: bad count");
  Rng rng(seed);
  std::vector<double> thetas;
  thetas.reserve(static_cast<size_t>(count));
  for (int f = 0; f < count; ++f) {
    // the draw's theta is the oscillation direction; stripes run across it
    thetas.push_back(std::fmod(synth_draw(rng, 16).theta + kPi / 2.0, kPi));
  }
  return thetas;
}

PinwheelBank pinwheel_restrict(const GaborParams& g, PinwheelMap map) {
  validate(g);
  if (map.theta.size() == 0)
    throw ConfigError("pinwheel_restrict: empty orientation map");
  return PinwheelBank{g, std::move(map)};
}

}  // namespace cortexk
