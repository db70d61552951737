#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cortexk/config.hpp"
#include "cortexk/io.hpp"
#include "cortexk/kernel.hpp"
#include "cortexk/propagation.hpp"
#include "cortexk/viz.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fs = std::filesystem;
using namespace cortexk;

namespace {

/// Config reader that records every effective value, so the resolved
/// configuration written next to the outputs is complete.
struct Resolver {
  const RunConfig& cfg;
  RunConfig resolved;

  double dbl(const std::string& k, double fallback) {
    const double v = cfg.get_double(k, fallback);
    resolved.set(k, format_double(v));
    return v;
  }
  int num(const std::string& k, int fallback) {
    const int v = cfg.get_int(k, fallback);
    resolved.set(k, std::to_string(v));
    return v;
  }
  std::uint64_t u64(const std::string& k, std::uint64_t fallback) {
    const std::uint64_t v = cfg.get_u64(k, fallback);
    resolved.set(k, std::to_string(v));
    return v;
  }
  bool flag(const std::string& k, bool fallback) {
    const bool v = cfg.get_bool(k, fallback);
    resolved.set(k, v ? "true" : "false");
    return v;
  }
  std::string str(const std::string& k, const std::string& fallback) {
    const std::string v = cfg.get_string(k, fallback);
    resolved.set(k, v);
    return v;
  }
  std::string required(const std::string& k) {
    const std::string v = cfg.get_string(k);
    resolved.set(k, v);
    return v;
  }
  std::vector<double> list(const std::string& k,
                           const std::vector<double>& fallback) {
    const std::vector<double> v = cfg.get_double_list(k, fallback);
    std::string joined;
    for (size_t i = 0; i < v.size(); ++i) {
      if (i) joined += ",";
      joined += format_double(v[i]);
    }
    resolved.set(k, joined);
    return v;
  }
};

struct Outputs {
  fs::path dir;
  std::vector<fs::path> files;

  fs::path file(const std::string& name) {
    fs::path p = dir / name;
    files.push_back(p);
    return p;
  }
};

void finish_run(Outputs& out, const RunConfig& resolved) {
  const fs::path cfg_path = out.file("run_config.txt");
  std::ofstream os(cfg_path);
  if (!os) throw IoError("cannot open " + cfg_path.string() + " for writing");
  os << resolved.serialize();
  os.close();
  write_manifest(out.dir / "manifest.txt", resolved.serialize(), out.files);
}

Axis sym_axis(Resolver& r, const std::string& name, double dflt_half,
              double dflt_step) {
  const double half = r.dbl(name + "_half", dflt_half);
  const double step = r.dbl(name + "_step", dflt_step);
  if (!(step > 0.0) || !(half >= 0.0))
    throw ConfigError("axis " + name + ": need step > 0 and half >= 0");
  return Axis::symmetric(name, half, step);
}

KernelField field_on_grid(FeatureGrid grid, Index origin, int steps,
                          InitMode init) {
  KernelField f;
  f.grid = std::move(grid);
  f.values = Eigen::ArrayXd::Zero(f.grid.size());
  f.origin = origin;
  f.steps = steps;
  f.init = init;
  return f;
}

Index find_or_throw(const FeatureGrid& grid, const FeaturePoint& p,
                    const std::string& what) {
  const auto idx = grid.find(p);
  if (!idx)
    throw ConfigError(what + " does not land on a grid point; "
                      "adjust the grid ranges or steps");
  return *idx;
}

void write_projection_outputs(Outputs& out, const std::string& stem,
                              const KernelField& field) {
  write_kgrid(out.file(stem + ".kgrid"), field.grid, field.values);
  if (field.grid.dim() == 3) {
    const Projection2D proj = project_max(field, field.grid.axis(2).name);
    write_pgm(out.file(stem + ".pgm"), rasterize(proj));
  } else if (field.grid.dim() == 2) {
    write_pgm(out.file(stem + ".pgm"), rasterize(as_projection(field)));
  }
}

struct GlyphOptions {
  double quantile = 0.9;
  int size = 17;
  int stride = 2;
  int scale = 8;
};

GlyphOptions read_glyph_options(Resolver& r, int dflt_size, int dflt_stride,
                                int dflt_scale) {
  GlyphOptions o;
  o.quantile = r.dbl("threshold_quantile", 0.9);
  o.size = r.num("glyph_size", dflt_size);
  o.stride = r.num("glyph_stride", dflt_stride);
  o.scale = r.num("glyph_scale", dflt_scale);
  return o;
}

/// Association-field render of a 3-axis field; returns the stamps used.
/// The threshold quantile is taken over the per-position maxima (the
/// feature-axis projection), so it selects a fraction of the picture's
/// pixels rather than of the raw grid values.
std::vector<GlyphStamp> write_glyph_render(Outputs& out,
                                           const std::string& name,
                                           const KernelField& field,
                                           const GlyphFn& glyph,
                                           const GlyphOptions& o) {
  const std::string& feature = field.grid.axis(2).name;
  const Projection2D proj = project_max(field, feature);
  const Eigen::ArrayXd maxima = proj.values.reshaped();
  const double thr = positive_quantile(maxima, o.quantile);
  const ArgmaxField af = argmax_feature(field, feature, thr);
  write_pgm(out.file(name),
            render_glyph_field(af, glyph, o.size, o.stride, o.scale));
  return glyph_stamps(af, o.stride);
}

// ---------------------------------------------------------------- kernel --

const std::vector<std::string> kKernelKeys = {
    "bank",        "lambda",       "sigma",
    "x_half",      "x_step",       "y_half",
    "y_step",      "theta_half",   "theta_step",
    "x0",          "y0",           "theta0",
    "truncate",    "truncate_lambda", "truncate_mode",
    "threshold_quantile", "glyph_size", "glyph_stride", "glyph_scale",
    "seed",        "cs",           "cl",
    "es_width",    "es_short_length", "es_long_length",
    "bank_file",   "bank_csv",     "bank_count",
    "bank_size",   "bank_pad",     "bank_crop",
    "bank_delta",  "normalize_bank", "filter"};

RunConfig run_kernel(const RunConfig& cfg, Outputs& out) {
  Resolver r{cfg, {}};
  const std::string bank_kind = r.str("bank", "gabor");

  if (bank_kind == "learned") {
    const int pad = r.num("bank_pad", 5);
    const int crop = r.num("bank_crop", 11);
    const bool normalize = r.flag("normalize_bank", true);
    const int f0 = r.num("filter", 0);
    std::vector<Eigen::MatrixXcd> raw;
    double delta = r.dbl("bank_delta", 1.0);
    const std::string bank_file = r.str("bank_file", "");
    const std::string bank_csv = r.str("bank_csv", "");
    if (!bank_file.empty()) {
      RawBank rb = read_fbank(bank_file);
      raw = std::move(rb.filters);
      delta = rb.delta;
      r.resolved.set("bank_delta", format_double(delta));
    } else if (!bank_csv.empty()) {
      RawBank rb = read_csv_bank(bank_csv);
      raw = std::move(rb.filters);
      delta = rb.delta;
      r.resolved.set("bank_delta", format_double(delta));
    } else {
      const int count = r.num("bank_count", 128);
      const int size = r.num("bank_size", 16);
      const std::uint64_t seed = r.u64("seed", 11);
      raw = synthetic_learned_bank(count, size, seed);
    }
    DiscreteBank bank(ingest_discrete_bank(raw, pad, crop, delta));
    if (normalize) bank = bank.normalized();
    if (f0 < 0 || f0 >= bank.count())
      throw ConfigError("filter index out of range for this bank");

    const int half = bank.support() - 1;
    std::vector<Axis> axes = {
        Axis{"x", static_cast<double>(-half), 1.0, 2 * half + 1, false},
        Axis{"y", static_cast<double>(-half), 1.0, 2 * half + 1, false},
        Axis{"f", 0.0, 1.0, bank.count(), false}};
    FeatureGrid grid(axes);
    FeaturePoint p0;
    p0.f = f0;
    const Index origin = find_or_throw(grid, p0, "the central filter");
    KernelField field =
        field_on_grid(std::move(grid), origin, 0, InitMode::RawKernel);
    for (Index i = 0; i < field.grid.size(); ++i)
      field.values[i] = kernel_numeric(bank, field.grid.point(i), p0);

    write_kgrid(out.file("kernel.kgrid"), field.grid, field.values);
    write_pgm(out.file("kernel_xy.pgm"), rasterize(project_max(field, "f")));
    // slice at the central filter index
    KernelField slice = field_on_grid(
        FeatureGrid({field.grid.axis(0), field.grid.axis(1)}), 0, 0,
        InitMode::RawKernel);
    for (int ix = 0; ix < field.grid.axis(0).count; ++ix)
      for (int iy = 0; iy < field.grid.axis(1).count; ++iy)
        slice.values[slice.grid.flatten({ix, iy})] =
            field.values[field.grid.flatten({ix, iy, f0})];
    write_pgm(out.file("kernel_slice.pgm"), rasterize(as_projection(slice)));
    const GlyphOptions o = read_glyph_options(r, 11, 1, 12);
    write_glyph_render(out, "field.pgm", field, discrete_glyph(bank), o);
    return r.resolved;
  }

  const double lambda = r.dbl("lambda", 1.0);
  const double sigma = r.dbl("sigma", 0.5);
  std::vector<Axis> axes = {sym_axis(r, "x", 1.0, 0.01),
                            sym_axis(r, "y", 1.0, 0.01),
                            sym_axis(r, "theta", 1.5, 0.015)};
  FeatureGrid grid(axes);
  const FeaturePoint p0 = FeaturePoint::spatial(
      r.dbl("x0", 0.0), r.dbl("y0", 0.0), r.dbl("theta0", 0.0));
  const Index origin = find_or_throw(grid, p0, "the kernel center p0");
  KernelField field =
      field_on_grid(std::move(grid), origin, 0, InitMode::RawKernel);

  if (bank_kind == "gabor") {
    const GaborParams g{lambda, sigma};
    validate(g);
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < field.grid.size(); ++i)
      field.values[i] = kernel_gabor_shifted(g, field.grid.point(i), p0);
  } else if (bank_kind == "endstop") {
    const double width = r.dbl("es_width", 0.5);
    const double slen = r.dbl("es_short_length", 1.6);
    const double llen = r.dbl("es_long_length", 2.6);
    EndstopParams e;
    e.cs = r.dbl("cs", 2.0);
    e.cl = r.dbl("cl", 1.0);
    e.short_gp = GaborParams{lambda, width};
    e.long_gp = GaborParams{lambda, width};
    e.aspect_short = slen / width;
    e.aspect_long = llen / width;
    validate(e);
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < field.grid.size(); ++i)
      field.values[i] = kernel_endstop(e, field.grid.point(i), p0);
  } else {
    throw ConfigError("unknown bank '" + bank_kind +
                      "' (expected gabor, endstop, or learned)");
  }

  if (r.flag("truncate", false)) {
    const PatchSpec ps{r.dbl("truncate_lambda", lambda)};
    const std::string mode = r.str("truncate_mode", "zero");
    if (mode == "zero")
      field = truncate_kernel(field, ps, TruncateMode::ZeroOutside);
    else if (mode == "floor")
      field = truncate_kernel(field, ps, TruncateMode::FloorClip);
    else
      throw ConfigError("truncate_mode must be 'zero' or 'floor'");
  }

  write_kgrid(out.file("kernel.kgrid"), field.grid, field.values);
  write_pgm(out.file("kernel_xy.pgm"), rasterize(project_max(field, "theta")));
  const int itheta = static_cast<int>(
      std::llround((p0.theta - field.grid.axis(2).min) /
                   field.grid.axis(2).step));
  KernelField slice = field_on_grid(
      FeatureGrid({field.grid.axis(0), field.grid.axis(1)}), 0, 0,
      InitMode::RawKernel);
  for (int ix = 0; ix < field.grid.axis(0).count; ++ix)
    for (int iy = 0; iy < field.grid.axis(1).count; ++iy)
      slice.values[slice.grid.flatten({ix, iy})] =
          field.values[field.grid.flatten({ix, iy, itheta})];
  write_pgm(out.file("kernel_slice.pgm"), rasterize(as_projection(slice)));
  const GlyphOptions o = read_glyph_options(r, 33, 10, 4);
  write_glyph_render(out, "field.pgm", field, gabor_glyph(lambda, sigma), o);
  return r.resolved;
}

// ------------------------------------------------------------- propagate --

const std::vector<std::string> kPropagateKeys = {
    "bank",       "lambda",     "sigma",      "x_half",
    "x_step",     "y_half",     "y_step",     "theta_half",
    "theta_step", "x0",         "y0",         "theta0",
    "steps",      "init",       "truncate",   "truncate_lambda",
    "tau",        "threshold_quantile",       "glyph_size",
    "glyph_stride", "glyph_scale"};

InitMode read_init(Resolver& r, const char* dflt = "transition") {
  const std::string init = r.str("init", dflt);
  if (init == "transition") return InitMode::TransitionColumn;
  if (init == "raw") return InitMode::RawKernel;
  throw ConfigError("init must be 'transition' or 'raw'");
}

RunConfig run_propagate(const RunConfig& cfg, Outputs& out) {
  Resolver r{cfg, {}};
  const std::string bank_kind = r.str("bank", "gabor");
  if (bank_kind != "gabor")
    throw ConfigError("propagate supports bank = gabor; "
                      "use the endstop command for endstopped banks");
  const GaborParams g{r.dbl("lambda", 1.0), r.dbl("sigma", 0.5)};
  validate(g);
  FeatureGrid grid({sym_axis(r, "x", 1.5, 0.1), sym_axis(r, "y", 3.0, 0.1),
                    sym_axis(r, "theta", 1.5, 0.15)});
  const FeaturePoint p0 = FeaturePoint::spatial(
      r.dbl("x0", 0.0), r.dbl("y0", 0.0), r.dbl("theta0", 0.0));
  const Index origin = find_or_throw(grid, p0, "the seed point p0");
  const int steps = r.num("steps", 4);
  if (steps < 1) throw ConfigError("steps must be >= 1");
  const InitMode init = read_init(r);
  const bool truncate = r.flag("truncate", true);
  const PatchSpec ps{r.dbl("truncate_lambda", g.lambda)};
  const Nonlinearity h = Nonlinearity::rectifier(r.dbl("tau", 0.0));

  PairKernelFn pair = [g, truncate, ps](const FeaturePoint& p,
                                        const FeaturePoint& q) {
    if (truncate && !patch_contains(ps, p, q)) return 0.0;
    return kernel_gabor_shifted(g, p, q);
  };
  const auto op = make_stencil_operator(grid, pair, h);

  std::ofstream report(out.file("report.txt"));
  Eigen::ArrayXd cur = init == InitMode::TransitionColumn
                           ? op->column(origin)
                           : op->raw_column(origin);
  KernelField field = field_on_grid(grid, origin, 1, init);
  for (int k = 1; k <= steps; ++k) {
    if (k > 1) cur = op->apply(cur);
    field.values = cur;
    field.steps = k;
    const double mass = (cur * grid.weights()).sum();
    char line[64];
    std::snprintf(line, sizeof line, "step %d mass %.6f", k, mass);
    std::cout << line << "\n";
    report << line << "\n";
    write_projection_outputs(out, "step_" + std::to_string(k), field);
  }
  report.close();

  const GlyphOptions o = read_glyph_options(r, 17, 2, 8);
  write_glyph_render(out, "field.pgm", field, gabor_glyph(g.lambda, g.sigma),
                     o);
  return r.resolved;
}

// -------------------------------------------------------------- pinwheel --

const std::vector<std::string> kPinwheelKeys = {
    "lambda",     "sigma",       "map_width", "map_height",
    "map_spacing", "map_m",      "map_k",     "seed",
    "steps",      "x0",          "y0",        "truncate",
    "truncate_lambda", "tau",    "threshold_quantile"};

double orientation_distance(double a, double b) {
  double d = std::abs(std::remainder(a - b, kPi));
  return d;  // in [0, pi/2]
}

RunConfig run_pinwheel(const RunConfig& cfg, Outputs& out) {
  Resolver r{cfg, {}};
  const GaborParams g{r.dbl("lambda", 1.0), r.dbl("sigma", 0.5)};
  validate(g);
  const int width = r.num("map_width", 65);
  const int height = r.num("map_height", 65);
  const double spacing = r.dbl("map_spacing", 0.25);
  const int m = r.num("map_m", 30);
  const double k = r.dbl("map_k", kTwoPi / 5.0);
  const std::uint64_t seed = r.u64("seed", 7);
  const int steps = r.num("steps", 6);
  const double x0 = r.dbl("x0", 0.0);
  const double y0 = r.dbl("y0", 0.0);
  const bool truncate = r.flag("truncate", false);
  const PatchSpec ps{r.dbl("truncate_lambda", g.lambda)};
  const Nonlinearity h = Nonlinearity::rectifier(r.dbl("tau", 0.0));
  const double quantile = r.dbl("threshold_quantile", 0.9);

  const PinwheelMap map = generate_pinwheel(width, height, spacing, m, k, seed);
  const KernelField field = propagate_pinwheel(map, g, x0, y0, steps, h,
                                               truncate ? &ps : nullptr);
  write_kgrid(out.file("final.kgrid"), field.grid, field.values);
  const Projection2D proj = as_projection(field);
  write_ppm(out.file("map.ppm"),
            overlay_threshold(proj, map,
                              std::numeric_limits<double>::infinity()));
  const double thr = positive_quantile(field.values, quantile);
  write_ppm(out.file("overlay.ppm"), overlay_threshold(proj, map, thr));

  // patchiness: mean orientation distance of the suprathreshold set to the
  // seed orientation, against seeded random masks of the same size
  const double theta0 = map.at(x0, y0);
  std::vector<int> supra;
  for (int row = 0; row < map.height(); ++row)
    for (int col = 0; col < map.width(); ++col)
      if (proj.values(row, col) > thr) supra.push_back(row * map.width() + col);
  std::ofstream report(out.file("report.txt"));
  report << "suprathreshold_pixels = " << supra.size() << "\n";
  if (!supra.empty()) {
    double stat = 0.0;
    for (int px : supra)
      stat += orientation_distance(
          map.theta(px / map.width(), px % map.width()), theta0);
    stat /= static_cast<double>(supra.size());

    const int total = map.width() * map.height();
    Rng rng(seed + 1000003);
    std::vector<int> idx(static_cast<size_t>(total));
    std::vector<double> baseline;
    baseline.reserve(1000);
    for (int trial = 0; trial < 1000; ++trial) {
      for (int i = 0; i < total; ++i) idx[static_cast<size_t>(i)] = i;
      double s = 0.0;
      for (size_t i = 0; i < supra.size(); ++i) {
        const size_t j =
            i + static_cast<size_t>(rng.bits() %
                                    static_cast<std::uint64_t>(total - i));
        std::swap(idx[i], idx[j]);
        s += orientation_distance(
            map.theta(idx[i] / map.width(), idx[i] % map.width()), theta0);
      }
      baseline.push_back(s / static_cast<double>(supra.size()));
    }
    std::sort(baseline.begin(), baseline.end());
    const double pct5 = baseline[49];
    char buf[96];
    std::snprintf(buf, sizeof buf, "mean_orientation_distance = %.6f", stat);
    report << buf << "\n";
    std::snprintf(buf, sizeof buf, "baseline_5th_percentile = %.6f", pct5);
    report << buf << "\n";
    report << "patchy = " << (stat < pct5 ? "true" : "false") << "\n";
  }
  report.close();
  return r.resolved;
}

// --------------------------------------------------------------- endstop --

const std::vector<std::string> kEndstopKeys = {
    "lambda",     "sigma",        "es_width",  "es_short_lengths",
    "es_long_lengths", "cs",      "cl",        "include_plain",
    "orientations", "x_half",     "x_step",    "y_half",
    "y_step",     "x0",           "y0",        "theta0",
    "steps",      "init",         "truncate",  "truncate_lambda",
    "tau",        "threshold_quantile",        "glyph_size",
    "glyph_stride", "glyph_scale"};

RunConfig run_endstop(const RunConfig& cfg, Outputs& out) {
  Resolver r{cfg, {}};
  const double lambda = r.dbl("lambda", 1.0);
  const double sigma = r.dbl("sigma", 0.5);
  const double width = r.dbl("es_width", 0.5);
  const std::vector<double> shorts =
      r.list("es_short_lengths", {1.6, 1.1, 0.7});
  const std::vector<double> longs = r.list("es_long_lengths", {2.6, 1.9, 1.3});
  if (shorts.size() != longs.size())
    throw ConfigError("es_short_lengths and es_long_lengths differ in length");
  const double cs = r.dbl("cs", 2.0);
  const double cl = r.dbl("cl", 1.0);
  const bool include_plain = r.flag("include_plain", true);
  const int orientations = r.num("orientations", 21);
  if (orientations < 2) throw ConfigError("orientations must be >= 2");

  // orientation samples equally spaced over the full circle, endpoints kept
  const Axis theta_axis{"theta", -kPi, kTwoPi / (orientations - 1),
                        orientations, false};
  FeatureGrid grid({sym_axis(r, "x", 3.0, 0.15), sym_axis(r, "y", 3.0, 0.15),
                    theta_axis});
  const FeaturePoint p0 = FeaturePoint::spatial(
      r.dbl("x0", 0.0), r.dbl("y0", 0.0), r.dbl("theta0", 0.0));
  const Index origin = find_or_throw(grid, p0, "the seed point p0");
  const int steps = r.num("steps", 1);
  if (steps < 1) throw ConfigError("steps must be >= 1");
  const InitMode init = read_init(r, "raw");
  const bool truncate = r.flag("truncate", false);
  const PatchSpec ps{r.dbl("truncate_lambda", lambda)};
  const Nonlinearity h = Nonlinearity::rectifier(r.dbl("tau", 0.0));
  const GlyphOptions o = read_glyph_options(r, 13, 1, 10);

  std::ofstream report(out.file("report.txt"));
  std::vector<double> radii;
  const auto run_one = [&](const std::string& label, const PairKernelFn& pair,
                           const GlyphFn& glyph) {
    PairKernelFn eff = pair;
    if (truncate)
      eff = [pair, ps](const FeaturePoint& p, const FeaturePoint& q) {
        return patch_contains(ps, p, q) ? pair(p, q) : 0.0;
      };
    KernelField field;
    if (steps == 1 && init == InitMode::RawKernel) {
      // the field is just the kernel column, so skip the operator build
      field.grid = grid;
      field.origin = origin;
      field.init = InitMode::RawKernel;
      field.steps = 1;
      field.values.resize(grid.size());
      const FeaturePoint seed = grid.point(origin);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
      for (Index i = 0; i < grid.size(); ++i)
        field.values[i] = eff(grid.point(i), seed);
    } else {
      const auto op = make_stencil_operator(grid, eff, h);
      field = iterate_kernel(*op, origin, steps, init);
    }
    write_projection_outputs(out, label, field);
    write_glyph_render(out, label + "_field.pgm", field, glyph, o);
    // the arc fit uses every positive response so dim ridge bands count too
    const ArgmaxField af = argmax_feature(field, "theta", 0.0);
    const double radius = fitted_arc_radius(glyph_stamps(af, 1), p0.theta,
                                            grid.axis(1).step);
    char buf[96];
    std::snprintf(buf, sizeof buf, "radius_%s = %.6f", label.c_str(), radius);
    report << buf << "\n";
    std::cout << buf << "\n";
    return radius;
  };

  for (size_t j = 0; j < shorts.size(); ++j) {
    EndstopParams e;
    e.cs = cs;
    e.cl = cl;
    e.short_gp = GaborParams{lambda, width};
    e.long_gp = GaborParams{lambda, width};
    e.aspect_short = shorts[j] / width;
    e.aspect_long = longs[j] / width;
    validate(e);
    radii.push_back(run_one(
        "es" + std::to_string(j + 1),
        [e](const FeaturePoint& p, const FeaturePoint& q) {
          return kernel_endstop(e, p, q);
        },
        gabor_glyph(lambda, width)));
  }
  double plain_radius = 0.0;
  if (include_plain) {
    const GaborParams g{lambda, sigma};
    validate(g);
    plain_radius = run_one(
        "plain",
        [g](const FeaturePoint& p, const FeaturePoint& q) {
          return kernel_gabor_shifted(g, p, q);
        },
        gabor_glyph(lambda, sigma));
  }
  bool monotone = true;
  for (size_t j = 0; j + 1 < radii.size(); ++j)
    if (radii[j + 1] > radii[j]) monotone = false;
  report << "radii_nonincreasing = " << (monotone ? "true" : "false") << "\n";
  if (include_plain && !radii.empty()) {
    const double top = *std::max_element(radii.begin(), radii.end());
    report << "plain_at_least_double = "
           << (plain_radius >= 2.0 * top ? "true" : "false") << "\n";
  }
  report.close();
  return r.resolved;
}

// -------------------------------------------------------- spatiotemporal --

const std::vector<std::string> kSpatioTemporalKeys = {
    "lambda",     "sigma",      "beta",       "alpha0",
    "x_half",     "x_step",     "y_half",     "y_step",
    "theta_half", "theta_step", "alpha_half", "alpha_step",
    "c_family",   "c0"};

RunConfig run_spatiotemporal(const RunConfig& cfg, Outputs& out) {
  Resolver r{cfg, {}};
  const SpatioTemporalParams sp{r.dbl("lambda", 1.0), r.dbl("sigma", 0.5),
                                r.dbl("beta", 1.0)};
  validate(sp);
  const double alpha0 = r.dbl("alpha0", 0.0);
  const bool c_family = r.flag("c_family", false);
  const double c0 = r.dbl("c0", 0.5);
  const double alpha_half = r.dbl("alpha_half", 1.0);
  const double alpha_step = r.dbl("alpha_step", 0.1);
  if (!(alpha_step > 0.0)) throw ConfigError("alpha_step must be > 0");

  Axis alpha_axis;
  if (c_family) {
    // the C-weighted family is indexed by |alpha|
    if (alpha0 < 0.0)
      throw ConfigError("alpha0 must be >= 0 for the C-weighted family");
    const int n = static_cast<int>(std::llround(alpha_half / alpha_step)) + 1;
    alpha_axis = Axis{"alpha", 0.0, alpha_step, n, false};
  } else {
    alpha_axis = Axis::symmetric("alpha", alpha_half, alpha_step);
  }
  FeatureGrid grid({sym_axis(r, "x", 1.0, 0.1), sym_axis(r, "y", 1.0, 0.1),
                    sym_axis(r, "theta", 1.5, 0.15), alpha_axis});

  FeaturePoint p0 = FeaturePoint::spacetime(0.0, 0.0, 0.0, 0.0, alpha0);
  if (c_family) p0.c = c0;
  KernelField field = field_on_grid(grid, 0, 0, InitMode::RawKernel);
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < field.grid.size(); ++i) {
    FeaturePoint p = field.grid.point(i);
    p.t = 0.0;
    if (c_family) p.c = c0;
    field.values[i] = c_family ? kernel_c_family(sp, p, p0)
                               : kernel_spatiotemporal(sp, p, p0);
  }

  write_kgrid(out.file("kernel.kgrid"), field.grid, field.values);
  const KernelField xyt = reduce_max(field, "alpha");
  write_kgrid(out.file("proj_xyt.kgrid"), xyt.grid, xyt.values);
  write_pgm(out.file("proj_xyt.pgm"), rasterize(project_max(xyt, "theta")));
  const KernelField xya = reduce_max(field, "theta");
  write_kgrid(out.file("proj_xya.kgrid"), xya.grid, xya.values);
  write_pgm(out.file("proj_xya.pgm"), rasterize(project_max(xya, "y")));
  return r.resolved;
}

// ----------------------------------------------------------- lift-evolve --

const std::vector<std::string> kLiftEvolveKeys = {
    "image",      "image_spacing", "lambda",    "sigma",
    "x_half",     "x_step",        "y_half",    "y_step",
    "theta_half", "theta_step",    "steps",     "truncate",
    "truncate_lambda", "tau",      "threshold_quantile"};

RunConfig run_lift_evolve(const RunConfig& cfg, Outputs& out) {
  Resolver r{cfg, {}};
  const std::string image_path = r.required("image");
  const double spacing = r.dbl("image_spacing", 0.05);
  if (!(spacing > 0.0)) throw ConfigError("image_spacing must be > 0");
  const GaborParams g{r.dbl("lambda", 1.0), r.dbl("sigma", 0.5)};
  validate(g);
  const ImageGray img = image_from_raster(read_pgm(image_path), spacing);

  const double ext_x = spacing * (img.width() - 1) / 2.0;
  const double ext_y = spacing * (img.height() - 1) / 2.0;
  const double x_step = r.dbl("x_step", 0.1);
  const double y_step = r.dbl("y_step", 0.1);
  const double x_half =
      r.dbl("x_half", std::floor(ext_x / x_step + 1e-9) * x_step);
  const double y_half =
      r.dbl("y_half", std::floor(ext_y / y_step + 1e-9) * y_step);
  if (!(x_step > 0.0) || !(y_step > 0.0))
    throw ConfigError("grid steps must be > 0");
  FeatureGrid grid({Axis::symmetric("x", x_half, x_step),
                    Axis::symmetric("y", y_half, y_step),
                    sym_axis(r, "theta", 1.5, 0.15)});
  r.resolved.set("x_half", format_double(x_half));
  r.resolved.set("y_half", format_double(y_half));

  const int steps =
      r.num("steps", default_step_count(4.0 * g.sigma, g.lambda));
  if (steps < 0) throw ConfigError("steps must be >= 0");
  const bool truncate = r.flag("truncate", true);
  const PatchSpec ps{r.dbl("truncate_lambda", g.lambda)};
  const Nonlinearity h = Nonlinearity::rectifier(r.dbl("tau", 0.0));

  const GaborBank bank{g};
  Activation act = lift_image(img, bank, grid, h);
  const auto write_step = [&](const Activation& a) {
    KernelField f;
    f.grid = a.grid;
    f.values = a.values;
    f.steps = a.steps;
    write_projection_outputs(out, "step_" + std::to_string(a.steps), f);
  };
  write_step(act);

  if (steps > 0) {
    PairKernelFn pair = [g, truncate, ps](const FeaturePoint& p,
                                          const FeaturePoint& q) {
      if (truncate && !patch_contains(ps, p, q)) return 0.0;
      return kernel_gabor_shifted(g, p, q);
    };
    const auto op = make_stencil_operator(grid, pair, h);
    for (int k = 1; k <= steps; ++k) {
      act = evolve_activation(*op, act, 1);
      write_step(act);
    }
  }
  return r.resolved;
}

// ------------------------------------------------------------------ main --

struct CommandSpec {
  std::string name;
  std::string description;
  std::vector<std::string> keys;
  std::function<RunConfig(const RunConfig&, Outputs&)> run;
};

struct CliState {
  std::string config_path;
  std::string preset;
  std::string out = "out";
  int threads = -1;
  std::vector<std::pair<std::string, std::string>> overrides;
};

int effective_threads(int flag_value) {
  if (flag_value >= 0) return flag_value;
  if (const char* env = std::getenv("CORTEXK_THREADS")) {
    try {
      size_t used = 0;
      const int v = std::stoi(env, &used);
      if (used != std::string(env).size() || v < 0)
        throw std::invalid_argument(env);
      return v;
    } catch (const std::exception&) {
      throw ConfigError(std::string("CORTEXK_THREADS: expected a ") +
                        "non-negative integer, got '" + env + "'");
    }
  }
  return 0;
}

int run_command(const CommandSpec& spec, const CliState& state) {
  RunConfig cfg;
  if (!state.preset.empty()) {
    Preset p = preset_config(state.preset);
    if (p.command != spec.name)
      throw ConfigError("preset '" + state.preset + "' belongs to the '" +
                        p.command + "' command");
    cfg.merge(p.config);
  }
  if (!state.config_path.empty()) cfg.merge(load_config_file(state.config_path));
  for (const auto& [key, value] : state.overrides)
    cfg.set(key, value, 0, "command line");
  cfg.require_known(spec.keys);

  const int threads = effective_threads(state.threads);
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif

  Outputs out;
  out.dir = state.out;
  std::error_code ec;
  fs::create_directories(out.dir, ec);
  if (ec)
    throw IoError("cannot create output directory " + out.dir.string() +
                  ": " + ec.message());
  RunConfig resolved = spec.run(cfg, out);
  finish_run(out, resolved);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"connectivity kernels, metric structures, and association "
               "fields from receptive-profile filter banks"};
  app.require_subcommand(1);

  const std::vector<CommandSpec> specs = {
      {"kernel", "evaluate a generating kernel column on a feature grid",
       kKernelKeys, run_kernel},
      {"propagate", "iterate a kernel column under the transition operator",
       kPropagateKeys, run_propagate},
      {"pinwheel", "propagate over an orientation-preference map",
       kPinwheelKeys, run_pinwheel},
      {"endstop", "association fields of endstopped banks across lengths",
       kEndstopKeys, run_endstop},
      {"spatiotemporal", "factorized space-time kernel and its projections",
       kSpatioTemporalKeys, run_spatiotemporal},
      {"lift-evolve", "lift an image through the bank and evolve it",
       kLiftEvolveKeys, run_lift_evolve}};

  std::vector<std::unique_ptr<CliState>> states;
  const CommandSpec* chosen = nullptr;
  const CliState* chosen_state = nullptr;

  for (const CommandSpec& spec : specs) {
    states.push_back(std::make_unique<CliState>());
    CliState* st = states.back().get();
    CLI::App* sub = app.add_subcommand(spec.name, spec.description);
    sub->add_option("--config", st->config_path,
                    "key = value configuration file");
    sub->add_option("--preset", st->preset,
                    "named preset (fig-diffK, fig-pw, fig-curvature, "
                    "fig-kernel-spt, fig-sparse-laf)");
    sub->add_option("--out", st->out, "output directory (default: out)");
    sub->add_option("--threads", st->threads,
                    "worker thread cap (default: CORTEXK_THREADS or all)");
    sub->add_option_function<std::string>(
        "--seed",
        [st](const std::string& v) { st->overrides.emplace_back("seed", v); },
        "random seed (overrides the config)");
    sub->add_option_function<std::vector<std::string>>(
        "--set",
        [st](const std::vector<std::string>& kvs) {
          for (const std::string& kv : kvs) {
            const size_t eq = kv.find('=');
            if (eq == std::string::npos)
              throw CLI::ValidationError("--set expects key=value, got '" +
                                         kv + "'");
            st->overrides.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
          }
        },
        "config override key=value (repeatable)");
    for (const std::string& key : spec.keys) {
      if (key == "seed") continue;  // dedicated flag above
      sub->add_option_function<std::string>(
          "--" + key,
          [st, key](const std::string& v) {
            st->overrides.emplace_back(key, v);
          },
          "config key " + key);
    }
    const CommandSpec* spec_ptr = &spec;
    sub->callback([&chosen, &chosen_state, spec_ptr, st]() {
      chosen = spec_ptr;
      chosen_state = st;
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (!chosen) return 2;
  try {
    return run_command(*chosen, *chosen_state);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DegenerateOperatorError& e) {
    std::cerr << "degenerate operator: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 4;
  }
}
