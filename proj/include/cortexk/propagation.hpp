#pragma once

#include <memory>

#include "cortexk/image.hpp"
#include "cortexk/kernel.hpp"
#include "cortexk/metric.hpp"

namespace cortexk {

/// Pointwise nonlinearity applied to kernel values before normalization.
struct Nonlinearity {
  enum class Kind { Rectifier, Logistic };
  Kind kind = Kind::Rectifier;
  double tau = 0.0;

  double operator()(double z) const {
    if (kind == Kind::Rectifier) return std::max(z - tau, 0.0);
    return 1.0 / (1.0 + std::exp(-z));
  }
  static Nonlinearity rectifier(double tau = 0.0) {
    return Nonlinearity{Kind::Rectifier, tau};
  }
  static Nonlinearity logistic() {
    return Nonlinearity{Kind::Logistic, 0.0};
  }
};

using KernelFn = std::function<double(Index, Index)>;
using PairKernelFn =
    std::function<double(const FeaturePoint&, const FeaturePoint&)>;

/// Markov transition operator S obtained from a kernel K by the two-stage
/// normalization
///   K1(p, q) = h(K(p, q)) / (int h(K(p', q)) dmu(p') int h(K(p, q')) dmu(q'))
///   S(p, q)  = K1(p, q) / int K1(p', q) dmu(p'),
/// which is column-stochastic under mu: int S(p, q) dmu(p) = 1 for every q.
class TransitionOperator {
 public:
  virtual ~TransitionOperator() = default;

  const FeatureGrid& grid() const { return grid_; }
  Index size() const { return grid_.size(); }

  /// One propagation step: out(p) = sum_q S(p, q) in(q) mu(q).
  virtual Eigen::ArrayXd apply(const Eigen::ArrayXd& in) const = 0;

  /// The column S(., q).
  virtual Eigen::ArrayXd column(Index q) const = 0;

  /// The raw kernel column K(., q), before the nonlinearity.
  Eigen::ArrayXd raw_column(Index q) const;

 protected:
  TransitionOperator(FeatureGrid grid, KernelFn raw)
      : grid_(std::move(grid)), raw_(std::move(raw)) {}

  FeatureGrid grid_;
  KernelFn raw_;
};

/// Fully materialized S; memory grows with size^2, keep for modest grids.
std::unique_ptr<TransitionOperator> make_dense_operator(FeatureGrid grid,
                                                        KernelFn kernel,
                                                        Nonlinearity h);

/// On-the-fly S: only the normalization vectors are stored and kernel values
/// are recomputed per application.
std::unique_ptr<TransitionOperator> make_lazy_operator(FeatureGrid grid,
                                                       KernelFn kernel,
                                                       Nonlinearity h);

/// On-the-fly S for translation-invariant kernels on an (x, y, theta) grid:
/// h(K) is tabulated once over (dx, dy, theta, theta') and applications
/// become table gathers. The pair kernel must satisfy
/// K(p + (d, 0), q + (d, 0)) = K(p, q) for spatial shifts d.
std::unique_ptr<TransitionOperator> make_stencil_operator(FeatureGrid grid,
                                                          PairKernelFn kernel,
                                                          Nonlinearity h);

/// Iterates of a kernel column under S. Step 1 is S(., p0) for
/// InitMode::TransitionColumn (unit mass, preserved exactly by later steps)
/// or the signed raw column for InitMode::RawKernel.
KernelField iterate_kernel(const TransitionOperator& op, Index p0, int n,
                           InitMode mode = InitMode::TransitionColumn);

/// Lift of an image through the bank: I0(p) = h(Re int I psi_p), sampled on
/// the image lattice (whose spacing must match the bank's sampling).
template <SpatialBankLike B>
Activation lift_image(const ImageGray& img, const B& bank,
                      const FeatureGrid& grid, const Nonlinearity& h) {
  Activation act;
  act.grid = grid;
  act.steps = 0;
  act.values.resize(grid.size());
  const double r = bank.support_radius();
  const double cell = img.spacing * img.spacing;
  for (Index i = 0; i < grid.size(); ++i) {
    const FeaturePoint p = grid.point(i);
    double acc = 0.0;
    for (int row = 0; row < img.height(); ++row) {
      const double v = img.ycoord(row);
      if (v < p.y - r || v > p.y + r) continue;
      for (int col = 0; col < img.width(); ++col) {
        const double u = img.xcoord(col);
        if (u < p.x - r || u > p.x + r) continue;
        const double pix = img.values(row, col);
        if (pix != 0.0) acc += pix * bank.value(p, u, v).real();
      }
    }
    act.values[i] = h(cell * acc);
  }
  return act;
}

/// n further propagation steps of an activation.
Activation evolve_activation(const TransitionOperator& op, const Activation& a,
                             int n);

/// Propagation of the pinwheel-restricted kernel from (x0, y0): the kernel
/// on map positions with orientations read off the map, organised as a 2D
/// operator and iterated n times. When `patch` is set the kernel is
/// truncated with the map orientations before normalization.
KernelField propagate_pinwheel(const PinwheelMap& map, const GaborParams& g,
                               double x0, double y0, int n, Nonlinearity h,
                               const PatchSpec* patch = nullptr,
                               Index dense_limit = 3000);

/// Smallest step count whose support, growing by `growth_per_step` times the
/// receptive-field radius per step, reaches `ratio` times the radius.
int default_step_count(double rf_radius, double growth_per_step,
                       double ratio = 2.2);

}  // namespace cortexk
