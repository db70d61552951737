#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cortexk/feature.hpp"

namespace cortexk {

/// One uniformly sampled coordinate axis: values min, min+step, ...
struct Axis {
  std::string name;
  double min = 0.0;
  double step = 1.0;
  int count = 1;
  bool periodic = false;

  double coord(int i) const { return min + step * static_cast<double>(i); }
  double max() const { return coord(count - 1); }

  /// Axis symmetric about 0: [-half, half] with the origin an exact sample.
  static Axis symmetric(std::string name, double half, double step,
                        bool periodic = false);
};

/// Cartesian product of named axes; points are enumerated row-major with the
/// last axis fastest. Carries per-point measure weights, defaulting to the
/// grid-cell measure (product of axis steps).
class FeatureGrid {
 public:
  FeatureGrid() = default;
  explicit FeatureGrid(std::vector<Axis> axes);

  Index size() const { return size_; }
  int dim() const { return static_cast<int>(axes_.size()); }
  const std::vector<Axis>& axes() const { return axes_; }
  const Axis& axis(int i) const { return axes_.at(static_cast<size_t>(i)); }

  /// Index of the axis with the given name, or -1.
  int axis_index(const std::string& name) const;
  bool has_axis(const std::string& name) const { return axis_index(name) >= 0; }

  std::vector<int> unflatten(Index flat) const;
  Index flatten(const std::vector<int>& multi) const;

  /// Coordinates of a flat index, in axis order.
  std::vector<double> coords(Index flat) const;

  /// FeaturePoint assembled from the named axes (x, y, theta, t, alpha, c, f).
  FeaturePoint point(Index flat) const;

  /// Flat index of the grid point matching p on every axis (within tol*step),
  /// or nullopt. Axes absent from the grid must be absent from p.
  std::optional<Index> find(const FeaturePoint& p, double tol = 1e-9) const;

  const Eigen::ArrayXd& weights() const { return weights_; }
  void set_weights(Eigen::ArrayXd w);
  double total_measure() const { return weights_.sum(); }

  bool same_layout(const FeatureGrid& other) const;

 private:
  std::vector<Axis> axes_;
  std::vector<Index> strides_;
  Index size_ = 0;
  Eigen::ArrayXd weights_;
};

/// All-ones weights, the counting measure of a finite bank.
Eigen::ArrayXd counting_measure(const FeatureGrid& grid);

/// Product of axis steps, constant over the grid.
Eigen::ArrayXd grid_cell_measure(const FeatureGrid& grid);

/// Measure of the open metric ball { p : d(p, center) < eps }.
double ball_measure(const FeatureGrid& grid, Index center, double eps,
                    const std::function<double(Index, Index)>& dist);

enum class InitMode {
  TransitionColumn,  ///< start from S(., p0); unit mass is preserved
  RawKernel          ///< start from the signed kernel column K(., p0)
};

/// A kernel column and its propagated iterates: values over `grid`, centered
/// at grid point `origin`, after `steps` applications of the operator.
struct KernelField {
  FeatureGrid grid;
  Eigen::ArrayXd values;
  Index origin = 0;
  int steps = 0;
  InitMode init = InitMode::TransitionColumn;
};

/// A lifted activation over a feature grid.
struct Activation {
  FeatureGrid grid;
  Eigen::ArrayXd values;
  int steps = 0;
};

}  // namespace cortexk
