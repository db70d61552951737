#pragma once

#include "cortexk/filterbank.hpp"
#include "cortexk/grid.hpp"
#include "cortexk/pinwheel.hpp"

namespace cortexk {

/// A field flattened onto the (x, y) plane. values(row, col) follows raster
/// order: row 0 carries the largest y.
struct Projection2D {
  Axis xaxis, yaxis;
  Eigen::ArrayXXd values;  ///< (yaxis.count rows, xaxis.count cols)

  int width() const { return static_cast<int>(values.cols()); }
  int height() const { return static_cast<int>(values.rows()); }
};

/// Pointwise maximum over one named axis; the result lives on the grid with
/// that axis removed.
KernelField reduce_max(const KernelField& field, const std::string& axis);

/// Maximum over the named axis of a 3-axis field, leaving a 2-axis image:
/// the first remaining axis runs along columns, the second along rows.
Projection2D project_max(const KernelField& field, const std::string& axis);

/// A 2-axis field viewed as a projection directly.
Projection2D as_projection(const KernelField& field);

Projection2D project_max(const Activation& act, const std::string& axis);

/// Per-pixel preferred feature: the axis coordinate maximizing the field,
/// recorded only where that maximum exceeds the threshold. Ties resolve to
/// the smallest coordinate.
struct ArgmaxField {
  Axis xaxis, yaxis;
  Axis feature_axis;
  Eigen::ArrayXXd feature;              ///< argmax coordinate per pixel
  Eigen::ArrayXXd peak;                 ///< field value at the argmax
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> mask;
};

ArgmaxField argmax_feature(const KernelField& field, const std::string& axis,
                           double threshold);

/// The `q`th quantile (in [0, 1]) of the strictly positive field values;
/// returns 0 when the field has none. The default rendering threshold is
/// quantile 0.9.
double positive_quantile(const Eigen::ArrayXd& values, double q);

/// One glyph location of a rendered field.
struct GlyphStamp {
  int col = 0, row = 0;   ///< pixel in the argmax raster
  double x = 0, y = 0;    ///< physical position
  double feature = 0;     ///< argmax coordinate at the pixel
  double value = 0;       ///< field value at the argmax
};

/// Masked pixels of `af` on a regular subsampling of the raster.
std::vector<GlyphStamp> glyph_stamps(const ArgmaxField& af, int stride);

using GlyphFn = std::function<Eigen::ArrayXXd(double feature, int size)>;

/// Signed miniature of the real part of a Gabor profile at the given
/// orientation, glyph pixels spanning +-2.5 sigma.
GlyphFn gabor_glyph(double lambda, double sigma);

/// Signed miniature of a discrete filter's real part, nearest-neighbor
/// resampled; `feature` is the filter index.
GlyphFn discrete_glyph(const DiscreteBank& bank);

struct RasterGray {
  int width = 0, height = 0;
  std::vector<std::uint8_t> pixels;  ///< row-major, row 0 on top
};

struct RasterRGB {
  int width = 0, height = 0;
  std::vector<std::uint8_t> pixels;  ///< rgb triples, row-major
};

/// Association-field picture: a mid-gray canvas with signed glyph miniatures
/// accumulated at the stamp positions (`scale` canvas pixels per field pixel),
/// saturating at black and white.
RasterGray render_glyph_field(const ArgmaxField& af, const GlyphFn& glyph,
                              int glyph_size, int stride, int scale);

/// Orientation-map overlay: map orientations as fully saturated hues (theta
/// in (-pi/2, pi/2] mapped linearly onto the color circle), suprathreshold
/// projection pixels in black, the origin marked white.
RasterRGB overlay_threshold(const Projection2D& proj, const PinwheelMap& map,
                            double threshold);

/// Grid points where the field crosses the level: the value equals the level
/// exactly, or an axis neighbor sits strictly on the other side.
std::vector<Index> level_set(const KernelField& field, double level);

/// Connected components of a point set under 2 dim-axis-neighbor
/// connectivity.
int count_components(const FeatureGrid& grid, const std::vector<Index>& points);

/// Connected components of the suprathreshold set { value > level }.
int suprathreshold_components(const KernelField& field, double level);

/// Radius of the circle the field's ridge bends along. Stamps are grouped
/// into bands of width `band` by their distance along the axis direction
/// `axis_theta` (unit tangent (-sin, cos) at the origin); the strongest
/// stamp of each band marks the ridge there. Each ridge point determines
/// the circle through the origin tangent to the axis (on-axis points count
/// as flat), and the reciprocal of the mean curvature is returned,
/// +infinity for a field whose ridge never leaves the axis.
double fitted_arc_radius(const std::vector<GlyphStamp>& stamps,
                         double axis_theta, double band);

}  // namespace cortexk
