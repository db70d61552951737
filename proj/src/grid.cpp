#include "cortexk/grid.hpp"

#include <cmath>

namespace cortexk {

Axis Axis::symmetric(std::string name, double half, double step,
                     bool periodic) {
  if (!(step > 0.0) || !(half >= 0.0))
    throw ConfigError("Axis::symmetric: need step > 0 and half >= 0");
  const int h = static_cast<int>(std::llround(half / step));
  Axis a;
  a.name = std::move(name);
  a.step = step;
  a.count = 2 * h + 1;
  a.min = -step * static_cast<double>(h);
  a.periodic = periodic;
  return a;
}

FeatureGrid::FeatureGrid(std::vector<Axis> axes) : axes_(std::move(axes)) {
  if (axes_.empty()) throw ConfigError("FeatureGrid: no axes");
  size_ = 1;
  for (const Axis& a : axes_) {
    if (a.count <= 0 || !(a.step > 0.0) || a.name.empty())
      throw ConfigError("FeatureGrid: bad axis '" + a.name + "'");
    size_ *= a.count;
  }
  strides_.assign(axes_.size(), 1);
  for (int i = static_cast<int>(axes_.size()) - 2; i >= 0; --i)
    strides_[i] = strides_[i + 1] * axes_[i + 1].count;
  weights_ = grid_cell_measure(*this);
}

int FeatureGrid::axis_index(const std::string& name) const {
  for (size_t i = 0; i < axes_.size(); ++i)
    if (axes_[i].name == name) return static_cast<int>(i);
  return -1;
}

std::vector<int> FeatureGrid::unflatten(Index flat) const {
  std::vector<int> multi(axes_.size());
  for (size_t i = 0; i < axes_.size(); ++i) {
    multi[i] = static_cast<int>(flat / strides_[i]);
    flat %= strides_[i];
  }
  return multi;
}

Index FeatureGrid::flatten(const std::vector<int>& multi) const {
  if (multi.size() != axes_.size())
    throw ConfigError("FeatureGrid::flatten: rank mismatch");
  Index flat = 0;
  for (size_t i = 0; i < axes_.size(); ++i) {
    if (multi[i] < 0 || multi[i] >= axes_[i].count)
      throw ConfigError("FeatureGrid::flatten: index out of range on axis '" +
                        axes_[i].name + "'");
    flat += strides_[i] * multi[i];
  }
  return flat;
}

std::vector<double> FeatureGrid::coords(Index flat) const {
  const std::vector<int> multi = unflatten(flat);
  std::vector<double> c(axes_.size());
  for (size_t i = 0; i < axes_.size(); ++i) c[i] = axes_[i].coord(multi[i]);
  return c;
}

FeaturePoint FeatureGrid::point(Index flat) const {
  const std::vector<int> multi = unflatten(flat);
  FeaturePoint p;
  for (size_t i = 0; i < axes_.size(); ++i) {
    const double v = axes_[i].coord(multi[i]);
    const std::string& n = axes_[i].name;
    if (n == "x") p.x = v;
    else if (n == "y") p.y = v;
    else if (n == "theta") p.theta = wrap_angle(v);
    else if (n == "t") p.t = v;
    else if (n == "alpha") p.alpha = v;
    else if (n == "c") p.c = v;
    else if (n == "f") p.f = multi[i];
    else throw ConfigError("FeatureGrid: unknown axis name '" + n + "'");
  }
  return p;
}

std::optional<Index> FeatureGrid::find(const FeaturePoint& p,
                                       double tol) const {
  if ((p.t && !has_axis("t")) || (p.alpha && !has_axis("alpha")) ||
      (p.c && !has_axis("c")) || (p.f && !has_axis("f")))
    return std::nullopt;
  std::vector<int> multi(axes_.size());
  for (size_t i = 0; i < axes_.size(); ++i) {
    const Axis& a = axes_[i];
    double want;
    if (a.name == "x") want = p.x;
    else if (a.name == "y") want = p.y;
    else if (a.name == "theta") want = p.theta;
    else if (a.name == "t") { if (!p.t) return std::nullopt; want = *p.t; }
    else if (a.name == "alpha") { if (!p.alpha) return std::nullopt; want = *p.alpha; }
    else if (a.name == "c") { if (!p.c) return std::nullopt; want = *p.c; }
    else if (a.name == "f") { if (!p.f) return std::nullopt; want = static_cast<double>(*p.f) * a.step + a.min; }
    else return std::nullopt;
    const double rel = (want - a.min) / a.step;
    const int idx = static_cast<int>(std::llround(rel));
    if (idx < 0 || idx >= a.count) return std::nullopt;
    if (std::abs(rel - static_cast<double>(idx)) > tol) return std::nullopt;
    multi[i] = idx;
  }
  return flatten(multi);
}

void FeatureGrid::set_weights(Eigen::ArrayXd w) {
  if (w.size() != size_)
    throw ConfigError("FeatureGrid::set_weights: size mismatch");
  if ((w <= 0.0).any())
    throw ConfigError("FeatureGrid::set_weights: weights must be positive");
  weights_ = std::move(w);
}

bool FeatureGrid::same_layout(const FeatureGrid& other) const {
  if (axes_.size() != other.axes_.size()) return false;
  for (size_t i = 0; i < axes_.size(); ++i) {
    const Axis &a = axes_[i], &b = other.axes_[i];
    if (a.name != b.name || a.count != b.count || a.min != b.min ||
        a.step != b.step || a.periodic != b.periodic)
      return false;
  }
  return true;
}

Eigen::ArrayXd counting_measure(const FeatureGrid& grid) {
  return Eigen::ArrayXd::Ones(grid.size());
}

Eigen::ArrayXd grid_cell_measure(const FeatureGrid& grid) {
  double cell = 1.0;
  for (const Axis& a : grid.axes()) cell *= a.step;
  return Eigen::ArrayXd::Constant(grid.size(), cell);
}

double ball_measure(const FeatureGrid& grid, Index center, double eps,
                    const std::function<double(Index, Index)>& dist) {
  if (center < 0 || center >= grid.size())
    throw ConfigError("ball_measure: center index out of range");
  if (!(eps >= 0.0)) throw ConfigError("ball_measure: eps must be >= 0");
  double total = 0.0;
  for (Index q = 0; q < grid.size(); ++q)
    if (dist(q, center) < eps) total += grid.weights()[q];
  return total;
}

}  // namespace cortexk
