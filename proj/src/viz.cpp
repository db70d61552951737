#include "cortexk/viz.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <memory>

namespace cortexk {

namespace {

int require_axis(const FeatureGrid& grid, const std::string& name) {
  const int idx = grid.axis_index(name);
  if (idx < 0)
    throw ConfigError("field has no axis named '" + name + "'");
  return idx;
}

}  // namespace

KernelField reduce_max(const KernelField& field, const std::string& axis) {
  const int drop = require_axis(field.grid, axis);
  if (field.grid.dim() < 2)
    throw ConfigError("reduce_max: cannot reduce a 1-axis field");
  std::vector<Axis> rest;
  for (int i = 0; i < field.grid.dim(); ++i)
    if (i != drop) rest.push_back(field.grid.axis(i));
  KernelField out;
  out.grid = FeatureGrid(rest);
  out.steps = field.steps;
  out.init = field.init;
  out.values =
      Eigen::ArrayXd::Constant(out.grid.size(),
                               -std::numeric_limits<double>::infinity());
  for (Index i = 0; i < field.grid.size(); ++i) {
    const std::vector<int> multi = field.grid.unflatten(i);
    std::vector<int> kept;
    kept.reserve(static_cast<size_t>(field.grid.dim() - 1));
    for (int a = 0; a < field.grid.dim(); ++a)
      if (a != drop) kept.push_back(multi[static_cast<size_t>(a)]);
    const Index j = out.grid.flatten(kept);
    out.values[j] = std::max(out.values[j], field.values[i]);
  }
  // keep the reduced origin consistent with the source origin
  const std::vector<int> om = field.grid.unflatten(field.origin);
  std::vector<int> ok;
  for (int a = 0; a < field.grid.dim(); ++a)
    if (a != drop) ok.push_back(om[static_cast<size_t>(a)]);
  out.origin = out.grid.flatten(ok);
  return out;
}

Projection2D as_projection(const KernelField& field) {
  if (field.grid.dim() != 2)
    throw ConfigError("as_projection: expected a 2-axis field");
  Projection2D proj;
  proj.xaxis = field.grid.axis(0);
  proj.yaxis = field.grid.axis(1);
  proj.values.resize(proj.yaxis.count, proj.xaxis.count);
  for (int ix = 0; ix < proj.xaxis.count; ++ix)
    for (int iy = 0; iy < proj.yaxis.count; ++iy)
      proj.values(proj.yaxis.count - 1 - iy, ix) =
          field.values[field.grid.flatten({ix, iy})];
  return proj;
}

Projection2D project_max(const KernelField& field, const std::string& axis) {
  if (field.grid.dim() != 3)
    throw ConfigError("project_max: expected a 3-axis field");
  return as_projection(reduce_max(field, axis));
}

Projection2D project_max(const Activation& act, const std::string& axis) {
  KernelField field;
  field.grid = act.grid;
  field.values = act.values;
  field.steps = act.steps;
  return project_max(field, axis);
}

ArgmaxField argmax_feature(const KernelField& field, const std::string& axis,
                           double threshold) {
  const int drop = require_axis(field.grid, axis);
  if (field.grid.dim() != 3 || field.grid.axis_index("x") < 0 ||
      field.grid.axis_index("y") < 0)
    throw ConfigError("argmax_feature: expected an (x, y, feature) field");
  ArgmaxField af;
  af.feature_axis = field.grid.axis(drop);
  const int ax = field.grid.axis_index("x");
  const int ay = field.grid.axis_index("y");
  if (ax == drop || ay == drop)
    throw ConfigError("argmax_feature: cannot reduce a spatial axis");
  af.xaxis = field.grid.axis(ax);
  af.yaxis = field.grid.axis(ay);
  af.feature = Eigen::ArrayXXd::Zero(af.yaxis.count, af.xaxis.count);
  af.peak = Eigen::ArrayXXd::Zero(af.yaxis.count, af.xaxis.count);
  af.mask.setConstant(af.yaxis.count, af.xaxis.count, false);
  std::vector<int> multi(3);
  for (int ix = 0; ix < af.xaxis.count; ++ix) {
    for (int iy = 0; iy < af.yaxis.count; ++iy) {
      double best = -std::numeric_limits<double>::infinity();
      int best_k = 0;
      for (int k = 0; k < af.feature_axis.count; ++k) {
        multi[static_cast<size_t>(ax)] = ix;
        multi[static_cast<size_t>(ay)] = iy;
        multi[static_cast<size_t>(drop)] = k;
        const double v = field.values[field.grid.flatten(multi)];
        if (v > best) {  // strict: ties keep the smallest coordinate
          best = v;
          best_k = k;
        }
      }
      if (best > threshold) {
        const int row = af.yaxis.count - 1 - iy;
        af.mask(row, ix) = true;
        af.feature(row, ix) = af.feature_axis.coord(best_k);
        af.peak(row, ix) = best;
      }
    }
  }
  return af;
}

double positive_quantile(const Eigen::ArrayXd& values, double q) {
  if (!(q >= 0.0 && q <= 1.0))
    throw ConfigError("positive_quantile: q must lie in [0, 1]");
  std::vector<double> pos;
  pos.reserve(static_cast<size_t>(values.size()));
  for (Index i = 0; i < values.size(); ++i)
    if (values[i] > 0.0) pos.push_back(values[i]);
  if (pos.empty()) return 0.0;
  std::sort(pos.begin(), pos.end());
  const double idx = q * static_cast<double>(pos.size() - 1);
  const size_t lo = static_cast<size_t>(idx);
  const size_t hi = std::min(lo + 1, pos.size() - 1);
  const double frac = idx - static_cast<double>(lo);
  return pos[lo] * (1.0 - frac) + pos[hi] * frac;
}

std::vector<GlyphStamp> glyph_stamps(const ArgmaxField& af, int stride) {
  if (stride < 1) throw ConfigError("glyph_stamps: stride must be >= 1");
  std::vector<GlyphStamp> out;
  for (int row = 0; row < af.yaxis.count; row += stride) {
    for (int col = 0; col < af.xaxis.count; col += stride) {
      if (!af.mask(row, col)) continue;
      GlyphStamp s;
      s.col = col;
      s.row = row;
      s.x = af.xaxis.coord(col);
      s.y = af.yaxis.coord(af.yaxis.count - 1 - row);
      s.feature = af.feature(row, col);
      s.value = af.peak(row, col);
      out.push_back(s);
    }
  }
  return out;
}

GlyphFn gabor_glyph(double lambda, double sigma) {
  if (!(lambda > 0.0) || !(sigma > 0.0))
    throw ConfigError("gabor_glyph: bad parameters");
  return [lambda, sigma](double theta, int size) {
    Eigen::ArrayXXd g(size, size);
    const double half = (size - 1) / 2.0;
    const double span = 2.5 * sigma;  // physical halfwidth of the miniature
    for (int r = 0; r < size; ++r) {
      for (int c = 0; c < size; ++c) {
        const double u = (c - half) / half * span;
        const double v = (half - r) / half * span;
        const double X = u * std::cos(theta) + v * std::sin(theta);
        const double Y = -u * std::sin(theta) + v * std::cos(theta);
        g(r, c) = std::exp(-(X * X + Y * Y) / (2.0 * sigma * sigma)) *
                  std::cos(kTwoPi * X / lambda);
      }
    }
    return g;
  };
}

GlyphFn discrete_glyph(const DiscreteBank& bank) {
  auto shared = std::make_shared<DiscreteBank>(bank);
  return [shared](double feature, int size) {
    const int f = static_cast<int>(std::llround(feature));
    if (f < 0 || f >= shared->count())
      throw ConfigError("discrete_glyph: filter index out of range");
    const Eigen::MatrixXcd& src = shared->filter(f).values;
    Eigen::ArrayXXd g(size, size);
    double peak = 0.0;
    for (int r = 0; r < size; ++r) {
      for (int c = 0; c < size; ++c) {
        const int sr = static_cast<int>(static_cast<double>(r) * src.rows() / size);
        const int sc = static_cast<int>(static_cast<double>(c) * src.cols() / size);
        g(r, c) = src(sr, sc).real();
        peak = std::max(peak, std::abs(g(r, c)));
      }
    }
    if (peak > 0.0) g /= peak;
    return g;
  };
}

RasterGray render_glyph_field(const ArgmaxField& af, const GlyphFn& glyph,
                              int glyph_size, int stride, int scale) {
  if (glyph_size < 1 || glyph_size % 2 == 0)
    throw ConfigError("render_glyph_field: glyph size must be odd");
  if (scale < 1) throw ConfigError("render_glyph_field: scale must be >= 1");
  const int W = af.xaxis.count * scale;
  const int H = af.yaxis.count * scale;
  Eigen::ArrayXXd canvas = Eigen::ArrayXXd::Zero(H, W);
  const int half = (glyph_size - 1) / 2;
  for (const GlyphStamp& s : glyph_stamps(af, stride)) {
    const Eigen::ArrayXXd g = glyph(s.feature, glyph_size);
    const int cr = s.row * scale + scale / 2;
    const int cc = s.col * scale + scale / 2;
    for (int r = 0; r < glyph_size; ++r) {
      for (int c = 0; c < glyph_size; ++c) {
        const int rr = cr + r - half;
        const int ccx = cc + c - half;
        if (rr < 0 || rr >= H || ccx < 0 || ccx >= W) continue;
        canvas(rr, ccx) += g(r, c);
      }
    }
  }
  RasterGray img;
  img.width = W;
  img.height = H;
  img.pixels.resize(static_cast<size_t>(W) * H);
  for (int r = 0; r < H; ++r)
    for (int c = 0; c < W; ++c) {
      const double v = std::clamp(0.5 + 0.5 * canvas(r, c), 0.0, 1.0);
      img.pixels[static_cast<size_t>(r) * W + c] =
          static_cast<std::uint8_t>(std::llround(v * 255.0));
    }
  return img;
}

RasterRGB overlay_threshold(const Projection2D& proj, const PinwheelMap& map,
                            double threshold) {
  if (proj.width() != map.width() || proj.height() != map.height())
    throw ConfigError("overlay_threshold: projection and map sizes differ");
  RasterRGB img;
  img.width = map.width();
  img.height = map.height();
  img.pixels.resize(static_cast<size_t>(img.width) * img.height * 3);
  const int orow = (map.height() - 1) / 2;
  const int ocol = (map.width() - 1) / 2;
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      std::uint8_t rgb[3];
      if (r == orow && c == ocol) {
        rgb[0] = rgb[1] = rgb[2] = 255;
      } else if (proj.values(r, c) > threshold) {
        rgb[0] = rgb[1] = rgb[2] = 0;
      } else {
        // theta in (-pi/2, pi/2] -> hue in [0, 360)
        const double hue = (map.theta(r, c) + kPi / 2.0) / kPi * 360.0;
        const double hh = std::fmod(hue, 360.0) / 60.0;
        const int sector = static_cast<int>(hh) % 6;
        const double f = hh - std::floor(hh);
        const auto b = [](double x) {
          return static_cast<std::uint8_t>(std::llround(255.0 * x));
        };
        switch (sector) {
          case 0: rgb[0] = 255; rgb[1] = b(f); rgb[2] = 0; break;
          case 1: rgb[0] = b(1 - f); rgb[1] = 255; rgb[2] = 0; break;
          case 2: rgb[0] = 0; rgb[1] = 255; rgb[2] = b(f); break;
          case 3: rgb[0] = 0; rgb[1] = b(1 - f); rgb[2] = 255; break;
          case 4: rgb[0] = b(f); rgb[1] = 0; rgb[2] = 255; break;
          default: rgb[0] = 255; rgb[1] = 0; rgb[2] = b(1 - f); break;
        }
      }
      std::uint8_t* px = &img.pixels[(static_cast<size_t>(r) * img.width + c) * 3];
      px[0] = rgb[0];
      px[1] = rgb[1];
      px[2] = rgb[2];
    }
  }
  return img;
}

std::vector<Index> level_set(const KernelField& field, double level) {
  std::vector<Index> out;
  const FeatureGrid& grid = field.grid;
  for (Index i = 0; i < grid.size(); ++i) {
    const double di = field.values[i] - level;
    if (di == 0.0) {
      out.push_back(i);
      continue;
    }
    const std::vector<int> multi = grid.unflatten(i);
    bool crossing = false;
    for (int a = 0; a < grid.dim() && !crossing; ++a) {
      for (int d = -1; d <= 1 && !crossing; d += 2) {
        std::vector<int> m = multi;
        m[static_cast<size_t>(a)] += d;
        if (m[static_cast<size_t>(a)] < 0 ||
            m[static_cast<size_t>(a)] >= grid.axis(a).count)
          continue;
        const double dj = field.values[grid.flatten(m)] - level;
        if ((di > 0.0 && dj < 0.0) || (di < 0.0 && dj > 0.0)) crossing = true;
      }
    }
    if (crossing) out.push_back(i);
  }
  return out;
}

int count_components(const FeatureGrid& grid,
                     const std::vector<Index>& points) {
  std::vector<char> in(static_cast<size_t>(grid.size()), 0);
  for (Index p : points) in[static_cast<size_t>(p)] = 1;
  std::vector<char> seen(static_cast<size_t>(grid.size()), 0);
  int comps = 0;
  std::deque<Index> queue;
  for (Index start : points) {
    if (seen[static_cast<size_t>(start)]) continue;
    ++comps;
    seen[static_cast<size_t>(start)] = 1;
    queue.push_back(start);
    while (!queue.empty()) {
      const Index cur = queue.front();
      queue.pop_front();
      const std::vector<int> multi = grid.unflatten(cur);
      for (int a = 0; a < grid.dim(); ++a) {
        for (int d = -1; d <= 1; d += 2) {
          std::vector<int> m = multi;
          m[static_cast<size_t>(a)] += d;
          if (m[static_cast<size_t>(a)] < 0 ||
              m[static_cast<size_t>(a)] >= grid.axis(a).count)
            continue;
          const Index nb = grid.flatten(m);
          if (in[static_cast<size_t>(nb)] && !seen[static_cast<size_t>(nb)]) {
            seen[static_cast<size_t>(nb)] = 1;
            queue.push_back(nb);
          }
        }
      }
    }
  }
  return comps;
}

int suprathreshold_components(const KernelField& field, double level) {
  std::vector<Index> pts;
  for (Index i = 0; i < field.grid.size(); ++i)
    if (field.values[i] > level) pts.push_back(i);
  return count_components(field.grid, pts);
}

double fitted_arc_radius(const std::vector<GlyphStamp>& stamps,
                         double axis_theta, double band) {
  // axis tangent at the origin and its normal
  const double ex = -std::sin(axis_theta), ey = std::cos(axis_theta);
  const double nx = std::cos(axis_theta), ny = std::sin(axis_theta);
  // Strongest stamp per along-axis band marks the ridge of the field.
  std::map<long long, const GlyphStamp*> ridge;
  for (const GlyphStamp& s : stamps) {
    const double along = s.x * ex + s.y * ey;
    const long long key = std::llround(along / band);
    if (key == 0) continue;  // band containing the seed
    auto [it, fresh] = ridge.try_emplace(key, &s);
    if (!fresh && s.value > it->second->value) it->second = &s;
  }
  if (ridge.empty()) return std::numeric_limits<double>::infinity();
  double acc = 0.0;
  for (const auto& [key, s] : ridge) {
    const double along = s->x * ex + s->y * ey;
    const double off = s->x * nx + s->y * ny;
    // curvature of the circle through origin and ridge point, tangent to
    // the axis; an on-axis ridge point contributes zero
    acc += 2.0 * std::abs(off) / (along * along + off * off);
  }
  const double mean = acc / static_cast<double>(ridge.size());
  return mean > 0.0 ? 1.0 / mean : std::numeric_limits<double>::infinity();
}

}  // namespace cortexk
