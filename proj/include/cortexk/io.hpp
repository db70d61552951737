#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "cortexk/grid.hpp"
#include "cortexk/image.hpp"
#include "cortexk/viz.hpp"

namespace cortexk {

/// Binary field container. Layout, little-endian throughout:
///   magic "KGRD", u8 version (1), u8 axis count,
///   per axis: u8 name length, name bytes, f64 min, f64 step, u32 count,
///             u8 periodic,
///   then f64 values in row-major order, last axis fastest.
void write_kgrid(const std::filesystem::path& path, const FeatureGrid& grid,
                 const Eigen::ArrayXd& values);

struct KGrid {
  FeatureGrid grid;
  Eigen::ArrayXd values;
};

KGrid read_kgrid(const std::filesystem::path& path);

/// Binary filter-bank container. Layout, little-endian:
///   magic "FBK1", u32 count, u32 height, u32 width, u8 complex flag,
///   f64 pixel spacing, then count x height x width f64 values row-major,
///   (re, im) pairs when the complex flag is set.
void write_fbank(const std::filesystem::path& path,
                 const std::vector<Eigen::MatrixXcd>& filters, double delta);

struct RawBank {
  std::vector<Eigen::MatrixXcd> filters;
  double delta = 1.0;
};

RawBank read_fbank(const std::filesystem::path& path);

/// Bank ingestion from plain CSV matrices, one filter per file, with a
/// sidecar manifest: lines `delta = <spacing>` and one filename per line
/// (relative to the manifest), `#` comments allowed.
RawBank read_csv_bank(const std::filesystem::path& manifest_path);

/// 8-bit binary PGM (P5).
void write_pgm(const std::filesystem::path& path, const RasterGray& img);
RasterGray read_pgm(const std::filesystem::path& path);

/// 8-bit binary PPM (P6).
void write_ppm(const std::filesystem::path& path, const RasterRGB& img);

/// Linear [lo, hi] -> [0, 255] quantization, clamped; lo == hi gives black.
RasterGray rasterize(const Projection2D& proj, double lo, double hi);

/// As above with lo, hi taken from the projection's extremes.
RasterGray rasterize(const Projection2D& proj);

/// Intensity image ([0, 1]) from an 8-bit raster.
ImageGray image_from_raster(const RasterGray& img, double spacing);

/// Plain CSV dump of a projection, one raster row per line.
void write_csv(const std::filesystem::path& path, const Projection2D& proj);

/// FNV-1a 64-bit content hash.
std::uint64_t fnv1a64(const void* data, std::size_t n);
std::uint64_t file_hash(const std::filesystem::path& path);

/// Run manifest: the resolved configuration followed by one
/// `<filename> fnv1a64=<16 hex digits>` line per output, sorted by name.
void write_manifest(const std::filesystem::path& path,
                    const std::string& resolved_config,
                    const std::vector<std::filesystem::path>& outputs);

}  // namespace cortexk
