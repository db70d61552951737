#include "cortexk/propagation.hpp"

#include <cmath>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cortexk {

namespace {

std::string describe_point(const FeatureGrid& grid, Index i) {
  const std::vector<double> c = grid.coords(i);
  std::ostringstream os;
  os << "(";
  for (size_t k = 0; k < c.size(); ++k) {
    if (k) os << ", ";
    os << grid.axis(static_cast<int>(k)).name << "=" << c[k];
  }
  os << ")";
  return os.str();
}

void check_positive(const Eigen::ArrayXd& v, const FeatureGrid& grid,
                    const char* stage) {
  for (Index i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0) || !std::isfinite(v[i]))
      throw DegenerateOperatorError(
          std::string("transition operator: zero ") + stage + " mass at " +
          describe_point(grid, i) +
          "; the rectified kernel column vanished");
  }
}

class DenseOperator final : public TransitionOperator {
 public:
  DenseOperator(FeatureGrid grid, KernelFn kernel, Nonlinearity h)
      : TransitionOperator(std::move(grid), std::move(kernel)) {
    const Index n = grid_.size();
    if (n * n > (Index(1) << 26))
      throw ConfigError(
          "dense transition operator: grid too large to materialize; use the "
          "lazy or stencil form");
    Eigen::MatrixXd A(n, n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (Index q = 0; q < n; ++q)
      for (Index p = 0; p < n; ++p) A(p, q) = h(raw_(p, q));

    const Eigen::ArrayXd& mu = grid_.weights();
    Eigen::ArrayXd col_sum(n), row_sum(n);
    for (Index q = 0; q < n; ++q) col_sum[q] = (A.col(q).array() * mu).sum();
    for (Index p = 0; p < n; ++p) row_sum[p] = (A.row(p).transpose().array() * mu).sum();
    check_positive(col_sum, grid_, "column");
    check_positive(row_sum, grid_, "row");

    // K1(p, q) = A / (col_sum(q) row_sum(p)); then column-normalize under mu.
    for (Index q = 0; q < n; ++q)
      for (Index p = 0; p < n; ++p) A(p, q) /= col_sum[q] * row_sum[p];
    Eigen::ArrayXd z(n);
    for (Index q = 0; q < n; ++q) z[q] = (A.col(q).array() * mu).sum();
    check_positive(z, grid_, "normalized column");
    for (Index q = 0; q < n; ++q) A.col(q) /= z[q];
    S_ = std::move(A);
  }

  Eigen::ArrayXd apply(const Eigen::ArrayXd& in) const override {
    if (in.size() != S_.rows())
      throw ConfigError("transition operator: field size mismatch");
    return (S_ * (in * grid_.weights()).matrix()).array();
  }

  Eigen::ArrayXd column(Index q) const override {
    if (q < 0 || q >= S_.cols())
      throw ConfigError("transition operator: column out of range");
    return S_.col(q).array();
  }

 private:
  Eigen::MatrixXd S_;
};

class LazyOperator final : public TransitionOperator {
 public:
  LazyOperator(FeatureGrid grid, KernelFn kernel, Nonlinearity h)
      : TransitionOperator(std::move(grid), std::move(kernel)), h_(h) {
    const Index n = grid_.size();
    const Eigen::ArrayXd& mu = grid_.weights();
    r_.resize(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (Index p = 0; p < n; ++p) {
      double acc = 0.0;
      for (Index q = 0; q < n; ++q) acc += h_(raw_(p, q)) * mu[q];
      r_[p] = acc;
    }
    check_positive(r_, grid_, "row");
    z_.resize(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (Index q = 0; q < n; ++q) {
      double acc = 0.0;
      for (Index p = 0; p < n; ++p) acc += h_(raw_(p, q)) * mu[p] / r_[p];
      z_[q] = acc;
    }
    check_positive(z_, grid_, "column");
  }

  Eigen::ArrayXd apply(const Eigen::ArrayXd& in) const override {
    const Index n = grid_.size();
    if (in.size() != n)
      throw ConfigError("transition operator: field size mismatch");
    const Eigen::ArrayXd v = in * grid_.weights() / z_;
    Eigen::ArrayXd out(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (Index p = 0; p < n; ++p) {
      double acc = 0.0;
      for (Index q = 0; q < n; ++q) acc += h_(raw_(p, q)) * v[q];
      out[p] = acc / r_[p];
    }
    return out;
  }

  Eigen::ArrayXd column(Index q) const override {
    const Index n = grid_.size();
    if (q < 0 || q >= n)
      throw ConfigError("transition operator: column out of range");
    Eigen::ArrayXd col(n);
    for (Index p = 0; p < n; ++p) col[p] = h_(raw_(p, q)) / (r_[p] * z_[q]);
    return col;
  }

 private:
  Nonlinearity h_;
  Eigen::ArrayXd r_, z_;
};

class StencilOperator final : public TransitionOperator {
 public:
  StencilOperator(FeatureGrid grid, PairKernelFn kernel, Nonlinearity h)
      : TransitionOperator(std::move(grid), KernelFn{}), pair_(kernel) {
    if (grid_.dim() != 3 || grid_.axis(0).name != "x" ||
        grid_.axis(1).name != "y" || grid_.axis(2).name != "theta")
      throw ConfigError(
          "stencil transition operator: grid must have axes (x, y, theta)");
    nx_ = grid_.axis(0).count;
    ny_ = grid_.axis(1).count;
    nt_ = grid_.axis(2).count;
    raw_ = [this](Index p, Index q) {
      return pair_(grid_.point(p), grid_.point(q));
    };

    // h(K) over every displacement and orientation pair.
    const Index dxn = 2 * nx_ - 1, dyn = 2 * ny_ - 1;
    table_.resize(static_cast<size_t>(nt_ * nt_ * dxn * dyn));
    const double sx = grid_.axis(0).step, sy = grid_.axis(1).step;
#ifdef _OPENMP
#pragma omp parallel for collapse(2) schedule(static)
#endif
    for (Index it = 0; it < nt_; ++it) {
      for (Index jt = 0; jt < nt_; ++jt) {
        const double ti = grid_.axis(2).coord(static_cast<int>(it));
        const double tj = grid_.axis(2).coord(static_cast<int>(jt));
        double* slice = table_.data() + static_cast<size_t>((it * nt_ + jt) * dxn * dyn);
        for (Index dx = 0; dx < dxn; ++dx) {
          const double dxv = sx * static_cast<double>(dx - (nx_ - 1));
          for (Index dy = 0; dy < dyn; ++dy) {
            const double dyv = sy * static_cast<double>(dy - (ny_ - 1));
            slice[dx * dyn + dy] =
                h(pair_(FeaturePoint::spatial(dxv, dyv, ti),
                        FeaturePoint::spatial(0.0, 0.0, tj)));
          }
        }
      }
    }

    r_ = matvec_table(grid_.weights());
    check_positive(r_, grid_, "row");
    z_ = matvec_table(grid_.weights() / r_);
    check_positive(z_, grid_, "column");
  }

  Eigen::ArrayXd apply(const Eigen::ArrayXd& in) const override {
    if (in.size() != grid_.size())
      throw ConfigError("transition operator: field size mismatch");
    return matvec_table(in * grid_.weights() / z_) / r_;
  }

  Eigen::ArrayXd column(Index q) const override {
    const Index n = grid_.size();
    if (q < 0 || q >= n)
      throw ConfigError("transition operator: column out of range");
    Eigen::ArrayXd col(n);
    const auto qi = grid_.unflatten(q);
    for (Index p = 0; p < n; ++p) {
      const auto pi = grid_.unflatten(p);
      col[p] = table_at(pi[2], qi[2], pi[0] - qi[0], pi[1] - qi[1]) /
               (r_[p] * z_[q]);
    }
    return col;
  }

 private:
  double table_at(Index it, Index jt, Index dx, Index dy) const {
    const Index dxn = 2 * nx_ - 1, dyn = 2 * ny_ - 1;
    return table_[static_cast<size_t>(
        ((it * nt_ + jt) * dxn + (dx + nx_ - 1)) * dyn + (dy + ny_ - 1))];
  }

  // out(p) = sum_q table(p, q) v(q)
  Eigen::ArrayXd matvec_table(const Eigen::ArrayXd& v) const {
    const Index dyn = 2 * ny_ - 1;
    Eigen::ArrayXd out(grid_.size());
    // v rearranged into per-orientation planes, contiguous in y.
    std::vector<Eigen::ArrayXd> plane(static_cast<size_t>(nt_));
    for (Index jt = 0; jt < nt_; ++jt) {
      Eigen::ArrayXd& pl = plane[static_cast<size_t>(jt)];
      pl.resize(nx_ * ny_);
      for (Index jx = 0; jx < nx_; ++jx)
        for (Index jy = 0; jy < ny_; ++jy)
          pl[jx * ny_ + jy] = v[(jx * ny_ + jy) * nt_ + jt];
    }
#ifdef _OPENMP
#pragma omp parallel for collapse(2) schedule(static)
#endif
    for (Index it = 0; it < nt_; ++it) {
      for (Index ix = 0; ix < nx_; ++ix) {
        for (Index iy = 0; iy < ny_; ++iy) {
          double acc = 0.0;
          for (Index jt = 0; jt < nt_; ++jt) {
            const double* slice =
                table_.data() +
                static_cast<size_t>((it * nt_ + jt) * (2 * nx_ - 1) * dyn);
            const double* pl = plane[static_cast<size_t>(jt)].data();
            for (Index jx = 0; jx < nx_; ++jx) {
              const double* row = slice + (ix - jx + nx_ - 1) * dyn + (iy + ny_ - 1);
              const double* pv = pl + jx * ny_;
              for (Index jy = 0; jy < ny_; ++jy) acc += row[-jy] * pv[jy];
            }
          }
          out[(ix * ny_ + iy) * nt_ + it] = acc;
        }
      }
    }
    return out;
  }

  PairKernelFn pair_;
  Index nx_ = 0, ny_ = 0, nt_ = 0;
  std::vector<double> table_;
  Eigen::ArrayXd r_, z_;
};

}  // namespace

Eigen::ArrayXd TransitionOperator::raw_column(Index q) const {
  if (q < 0 || q >= size())
    throw ConfigError("transition operator: column out of range");
  Eigen::ArrayXd col(size());
  for (Index p = 0; p < size(); ++p) col[p] = raw_(p, q);
  return col;
}

std::unique_ptr<TransitionOperator> make_dense_operator(FeatureGrid grid,
                                                        KernelFn kernel,
                                                        Nonlinearity h) {
  return std::make_unique<DenseOperator>(std::move(grid), std::move(kernel), h);
}

std::unique_ptr<TransitionOperator> make_lazy_operator(FeatureGrid grid,
                                                       KernelFn kernel,
                                                       Nonlinearity h) {
  return std::make_unique<LazyOperator>(std::move(grid), std::move(kernel), h);
}

std::unique_ptr<TransitionOperator> make_stencil_operator(FeatureGrid grid,
                                                          PairKernelFn kernel,
                                                          Nonlinearity h) {
  return std::make_unique<StencilOperator>(std::move(grid), std::move(kernel),
                                           h);
}

KernelField iterate_kernel(const TransitionOperator& op, Index p0, int n,
                           InitMode mode) {
  if (n < 1) throw ConfigError("iterate_kernel: need n >= 1");
  if (p0 < 0 || p0 >= op.size())
    throw ConfigError("iterate_kernel: origin out of range");
  KernelField field;
  field.grid = op.grid();
  field.origin = p0;
  field.init = mode;
  field.values = (mode == InitMode::TransitionColumn) ? op.column(p0)
                                                      : op.raw_column(p0);
  field.steps = 1;
  for (int s = 1; s < n; ++s) {
    field.values = op.apply(field.values);
    ++field.steps;
  }
  return field;
}

Activation evolve_activation(const TransitionOperator& op, const Activation& a,
                             int n) {
  if (n < 0) throw ConfigError("evolve_activation: need n >= 0");
  if (!a.grid.same_layout(op.grid()))
    throw ConfigError("evolve_activation: grid mismatch");
  Activation out = a;
  for (int s = 0; s < n; ++s) {
    out.values = op.apply(out.values);
    ++out.steps;
  }
  return out;
}

KernelField propagate_pinwheel(const PinwheelMap& map, const GaborParams& g,
                               double x0, double y0, int n, Nonlinearity h,
                               const PatchSpec* patch, Index dense_limit) {
  validate(g);
  const int w = map.width(), ht = map.height();
  Axis ax{"x", map.xcoord(0), map.spacing, w, false};
  Axis ay{"y", map.ycoord(ht - 1), map.spacing, ht, false};
  FeatureGrid grid({ax, ay});

  auto pts = std::make_shared<std::vector<FeaturePoint>>();
  pts->reserve(static_cast<size_t>(grid.size()));
  for (Index i = 0; i < grid.size(); ++i) {
    FeaturePoint p = grid.point(i);
    p.theta = map.at(p.x, p.y);
    pts->push_back(p);
  }
  const PatchSpec ps = patch ? *patch : PatchSpec{};
  const bool truncate = patch != nullptr;
  KernelFn kernel = [pts, g, ps, truncate](Index i, Index j) {
    const FeaturePoint& pa = (*pts)[static_cast<size_t>(i)];
    const FeaturePoint& pb = (*pts)[static_cast<size_t>(j)];
    if (truncate && !patch_contains(ps, pa, pb)) return 0.0;
    return kernel_gabor_shifted(g, pa, pb);
  };

  std::unique_ptr<TransitionOperator> op =
      (grid.size() <= dense_limit)
          ? make_dense_operator(grid, kernel, h)
          : make_lazy_operator(grid, kernel, h);
  const auto p0 = grid.find(FeaturePoint::spatial(x0, y0, 0.0));
  if (!p0)
    throw ConfigError("propagate_pinwheel: seed point is not a map position");
  return iterate_kernel(*op, *p0, n, InitMode::TransitionColumn);
}

int default_step_count(double rf_radius, double growth_per_step, double ratio) {
  if (!(rf_radius > 0.0) || !(growth_per_step > 0.0) || !(ratio >= 1.0))
    throw ConfigError("default_step_count: bad parameters");
  const double needed = (ratio - 1.0) * rf_radius / growth_per_step;
  const int n = static_cast<int>(std::ceil(needed - 1e-9));
  return std::max(1, n);
}

}  // namespace cortexk
