// Acceptance gate: each criterion prints one PASS/FAIL line and the binary
// exits nonzero when any of them fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <string>
#include <unistd.h>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cortexk/config.hpp"
#include "cortexk/io.hpp"
#include "cortexk/kernel.hpp"
#include "cortexk/metric.hpp"
#include "cortexk/propagation.hpp"
#include "cortexk/viz.hpp"

using namespace cortexk;
namespace fs = std::filesystem;

namespace {

struct Failure {
  std::string detail;
};

void require(bool ok, const std::string& detail) {
  if (!ok) throw Failure{detail};
}

std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return buf;
}

FeaturePoint random_pose(Rng& rng) {
  return FeaturePoint::spatial(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                               rng.uniform(-kPi / 2, kPi / 2));
}

double orientation_distance(double a, double b) {
  return std::abs(std::remainder(a - b, kPi));
}

// ------------------------------------------------------------------------
// shared fixtures

const GaborParams kGabor{1.0, 0.5};

/// The propagation grid used throughout: x +-1.5 / 0.1, y +-3 / 0.1,
/// theta +-1.5 / 0.15.
FeatureGrid reference_grid() {
  return FeatureGrid({Axis::symmetric("x", 1.5, 0.1),
                      Axis::symmetric("y", 3.0, 0.1),
                      Axis::symmetric("theta", 1.5, 0.15)});
}

PairKernelFn truncated_gabor_pair() {
  const GaborParams g = kGabor;
  const PatchSpec ps{g.lambda};
  return [g, ps](const FeaturePoint& p, const FeaturePoint& q) {
    if (!patch_contains(ps, p, q)) return 0.0;
    return kernel_gabor_shifted(g, p, q);
  };
}

// ------------------------------------------------------------------------
// criteria

std::string criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);
  const GaborBank bank{kGabor};
  const double eta = eta_gabor(kGabor);
  const double delta = kGabor.sigma / 20.0;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const FeaturePoint p = random_pose(rng);
    const FeaturePoint q = random_pose(rng);
    const double kn = kernel_numeric(bank, p, q, delta);
    const double kc = kernel_gabor_shifted(kGabor, p, q);
    worst = std::max(worst, std::abs(kn - kc) / eta);
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  require(worst < 1e-3, fmt("max rel err %.2e", worst));
  require(secs < 30.0, fmt("took %.1f s, limit 30", secs));
  return fmt("max rel err %.2e in %.1f s single-threaded", worst, secs);
}

std::string criterion2() {
  Rng rng(202);
  const GaborBank bank{kGabor};
  const double eta = eta_gabor(kGabor);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double n2 = eta_numeric(bank, random_pose(rng), kGabor.sigma / 20.0);
    worst = std::max(worst, std::abs(n2 - eta) / eta);
  }
  require(worst < 1e-3, fmt("max rel err %.2e", worst));
  return fmt("numeric norm within %.2e of sigma^2 pi", worst);
}

std::string criterion3() {
  Rng rng(303);
  const double eta = eta_gabor(kGabor);
  const double delta = kGabor.sigma / 20.0;
  const double r = 4.0 * kGabor.sigma;
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const FeaturePoint p = random_pose(rng);
    const FeaturePoint q = random_pose(rng);
    const double d =
        kernel_distance(eta, kernel_gabor_shifted(kGabor, p, q));
    // direct quadrature of the squared profile difference
    const double ulo = std::min(p.x, q.x) - r, uhi = std::max(p.x, q.x) + r;
    const double vlo = std::min(p.y, q.y) - r, vhi = std::max(p.y, q.y) + r;
    const int nu = static_cast<int>(std::ceil((uhi - ulo) / delta));
    const int nv = static_cast<int>(std::ceil((vhi - vlo) / delta));
    double acc = 0.0;
    for (int j = 0; j < nv; ++j) {
      const double v = vlo + (j + 0.5) * delta;
      for (int k = 0; k < nu; ++k) {
        const double u = ulo + (k + 0.5) * delta;
        acc += std::norm(gabor_value(kGabor, p, u, v) -
                         gabor_value(kGabor, q, u, v));
      }
    }
    const double quad = delta * delta * acc;
    worst = std::max(worst, std::abs(d * d - quad) / std::max(quad, eta));
  }
  require(worst < 1e-3, fmt("max rel err %.2e", worst));
  return fmt("d^2 matches the profile-difference quadrature to %.2e", worst);
}

std::string criterion4(const TransitionOperator& op, Index origin) {
  const FeatureGrid& grid = op.grid();
  const Eigen::ArrayXd& w = grid.weights();
  double colsdev = 0.0;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 64) reduction(max : colsdev)
#endif
  for (Index q = 0; q < grid.size(); ++q) {
    const double mass = (op.column(q) * w).sum();
    colsdev = std::max(colsdev, std::abs(mass - 1.0));
  }
  require(colsdev < 1e-8, fmt("max column mass deviation %.2e", colsdev));

  double iterdev = 0.0;
  Eigen::ArrayXd u = op.column(origin);
  for (int n = 1; n <= 10; ++n) {
    if (n > 1) u = op.apply(u);
    iterdev = std::max(iterdev, std::abs((u * w).sum() - 1.0));
  }
  require(iterdev < 1e-8, fmt("max iterate mass deviation %.2e", iterdev));
  return fmt("column masses within %.2e, ten iterate masses within %.2e",
             colsdev, iterdev);
}

std::string criterion5() {
  Rng rng(505);
  const double delta = kGabor.sigma / 20.0;
  const double r = 4.0 * kGabor.sigma;
  const double eta = eta_gabor(kGabor);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const FeaturePoint p = random_pose(rng);
    const double kpp = kernel_gabor_shifted(kGabor, p, p);
    // the even and odd parts are integrated separately on purpose
    double even = 0.0, odd = 0.0;
    const int n = static_cast<int>(std::ceil(2.0 * r / delta));
    for (int j = 0; j < n; ++j) {
      const double v = p.y - r + (j + 0.5) * delta;
      for (int k = 0; k < n; ++k) {
        const double u = p.x - r + (k + 0.5) * delta;
        const Complex z = gabor_value(kGabor, p, u, v);
        even += z.real() * z.real();
        odd += z.imag() * z.imag();
      }
    }
    worst = std::max(worst,
                     std::abs(kpp - delta * delta * (even + odd)));
  }
  require(worst < 1e-6 * eta, fmt("max deviation %.2e, limit %.2e", worst,
                                  1e-6 * eta));
  return fmt("even plus odd energy matches K(p,p) within %.2e", worst);
}

std::string criterion6(const TransitionOperator& op, Index origin) {
  const FeatureGrid& grid = op.grid();
  const KernelField field = iterate_kernel(op, origin, 4);

  // the seed filter's stripes run along y, so its preferred axis is the
  // y-axis; the bow tie must put its mass there rather than across it
  double axial = 0.0, ortho = 0.0;
  for (Index i = 0; i < grid.size(); ++i) {
    const FeaturePoint p = grid.point(i);
    if (p.x == 0.0 && p.y == 0.0) continue;
    const double phi = std::atan2(p.y, p.x);
    const double mass = field.values[i] * grid.weights()[i];
    if (orientation_distance(phi, kPi / 2.0) <= kPi / 6.0) axial += mass;
    if (orientation_distance(phi, 0.0) <= kPi / 6.0) ortho += mass;
  }
  require(ortho > 0.0 && axial >= 2.0 * ortho,
          fmt("preferred-axis mass %.3e vs orthogonal %.3e", axial, ortho));

  const Projection2D proj = project_max(field, "theta");
  const double thr = positive_quantile(proj.values.reshaped(), 0.9);
  const ArgmaxField af = argmax_feature(field, "theta", thr);
  const int col0 = (grid.axis(0).count - 1) / 2;  // the x = 0 raster column
  const double step = grid.axis(2).step;
  const double sigma3 = 3.0 * 0.5;
  int supra = 0, aligned = 0;
  for (int iy = 0; iy < grid.axis(1).count; ++iy) {
    if (std::abs(grid.axis(1).coord(iy)) > sigma3 + 1e-12) continue;
    const int row = grid.axis(1).count - 1 - iy;
    if (!af.mask(row, col0)) continue;
    ++supra;
    if (std::abs(af.feature(row, col0)) <= step + 1e-12) ++aligned;
  }
  require(supra > 0, "no suprathreshold pixels on the axis");
  require(aligned * 10 >= supra * 9,
          fmt("%.0f of %.0f axis pixels prefer the seed orientation",
              static_cast<double>(aligned), static_cast<double>(supra)));
  return fmt("axial/orthogonal mass %.2f, axis argmax aligned at %.0f%%",
             axial / ortho,
             100.0 * static_cast<double>(aligned) /
                 static_cast<double>(supra));
}

std::string criterion7() {
  FeatureGrid grid = reference_grid();
  const FeaturePoint p0 = FeaturePoint::spatial(0.0, 0.0, 0.0);
  const Index origin = *grid.find(p0);
  KernelField field;
  field.grid = grid;
  field.origin = origin;
  field.init = InitMode::RawKernel;
  field.values.resize(grid.size());
  for (Index i = 0; i < grid.size(); ++i)
    field.values[i] = kernel_gabor_shifted(kGabor, grid.point(i), p0);

  const PatchSpec ps{kGabor.lambda};
  double side_peak = 0.0;
  for (Index i = 0; i < grid.size(); ++i)
    if (!patch_contains(ps, grid.point(i), p0))
      side_peak = std::max(side_peak, field.values[i]);
  require(side_peak > 0.0, "no positive mass outside the patch");
  const double level = 0.5 * side_peak;

  const int open_comps = suprathreshold_components(field, level);
  const KernelField cut = truncate_kernel(field, ps);
  const int cut_comps = suprathreshold_components(cut, level);
  require(open_comps >= 2,
          fmt("untruncated components %.0f", static_cast<double>(open_comps)));
  require(cut_comps == 1,
          fmt("truncated components %.0f", static_cast<double>(cut_comps)));
  return fmt("components %.0f untruncated vs %.0f truncated",
             static_cast<double>(open_comps),
             static_cast<double>(cut_comps));
}

std::string criterion8() {
  FeatureGrid grid({Axis::symmetric("x", 1.0, 0.5),
                    Axis::symmetric("y", 1.0, 0.5),
                    Axis{"theta", -kPi / 2, kPi / 5, 5, false}});
  const PatchGraph graph =
      gabor_patch_graph(grid, kGabor, PatchSpec{kGabor.lambda});
  const Index n = graph.size();
  const double inf = std::numeric_limits<double>::infinity();

  bool settled = true;
  for (Index s = 0; s < n; ++s) {
    // chains of at most 6 edges, one relaxation sweep per edge count
    std::vector<double> d(static_cast<size_t>(n), inf);
    d[static_cast<size_t>(s)] = 0.0;
    std::vector<double> after6;
    for (int round = 1; round <= 7; ++round) {
      std::vector<double> nd = d;
      for (Index u = 0; u < n; ++u) {
        if (d[static_cast<size_t>(u)] == inf) continue;
        for (const PatchGraph::Edge& e : graph.edges(u))
          nd[static_cast<size_t>(e.to)] =
              std::min(nd[static_cast<size_t>(e.to)],
                       d[static_cast<size_t>(u)] + e.w);
      }
      d.swap(nd);
      if (round == 6) after6 = d;
    }
    if (d != after6) settled = false;

    const Eigen::ArrayXd glued = glued_distance_field(graph, s);
    for (Index t = 0; t < n; ++t)
      require(glued[t] == after6[static_cast<size_t>(t)],
              fmt("pair disagreement, glued %.17g vs chains %.17g", glued[t],
                  after6[static_cast<size_t>(t)]));
  }
  require(settled, "6-edge chains had not converged");
  return "all 15625 pairs match the 6-edge chain enumeration exactly";
}

std::string criterion9() {
  FeatureGrid grid({Axis::symmetric("x", 3.0, 0.15),
                    Axis::symmetric("y", 3.0, 0.15),
                    Axis{"theta", -kPi, kTwoPi / 20.0, 21, false}});
  const FeaturePoint p0 = FeaturePoint::spatial(0.0, 0.0, 0.0);
  const Index origin = *grid.find(p0);
  const double band = grid.axis(1).step;

  const auto radius_of = [&](const PairKernelFn& pair) {
    KernelField field;
    field.grid = grid;
    field.origin = origin;
    field.init = InitMode::RawKernel;
    field.steps = 1;
    field.values.resize(grid.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (Index i = 0; i < grid.size(); ++i)
      field.values[i] = pair(grid.point(i), p0);
    const ArgmaxField af = argmax_feature(field, "theta", 0.0);
    return fitted_arc_radius(glyph_stamps(af, 1), p0.theta, band);
  };

  const double width = 0.5;
  const double shorts[3] = {1.6, 1.1, 0.7}, longs[3] = {2.6, 1.9, 1.3};
  std::vector<double> radii;
  for (int j = 0; j < 3; ++j) {
    EndstopParams e;
    e.cs = 2.0;
    e.cl = 1.0;
    e.short_gp = GaborParams{1.0, width};
    e.long_gp = GaborParams{1.0, width};
    e.aspect_short = shorts[j] / width;
    e.aspect_long = longs[j] / width;
    radii.push_back(radius_of([e](const FeaturePoint& p,
                                  const FeaturePoint& q) {
      return kernel_endstop(e, p, q);
    }));
  }
  const double plain = radius_of([](const FeaturePoint& p,
                                    const FeaturePoint& q) {
    return kernel_gabor_shifted(kGabor, p, q);
  });

  for (size_t j = 0; j + 1 < radii.size(); ++j)
    require(radii[j + 1] <= radii[j],
            fmt("radius grew from %.3f to %.3f as the profile shortened",
                radii[j], radii[j + 1]));
  const double top = *std::max_element(radii.begin(), radii.end());
  require(plain >= 2.0 * top,
          fmt("plain radius %.3f not twice the largest endstopped %.3f", plain,
              top));
  return fmt("radii %.2f / %.2f", radii[0], radii[1]) +
         fmt(" / %.2f with plain %.2f", radii[2], plain);
}

std::string criterion10() {
  const SpatioTemporalParams sp{1.0, 0.5, 1.0};
  const double eta = eta_spatiotemporal(sp);
  const double delta = sp.sigma / 10.0, delta_t = sp.beta / 10.0;
  double worst = 0.0;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) reduction(max : worst)
#endif
  for (int i = 0; i < 20; ++i) {
    Rng rng(707 + static_cast<std::uint64_t>(i));
    const double t0 = rng.uniform(-0.5, 0.5);
    FeaturePoint p = FeaturePoint::spacetime(
        rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
        rng.uniform(-kPi / 2, kPi / 2), t0, rng.uniform(-1.0, 1.0));
    FeaturePoint q = FeaturePoint::spacetime(
        rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
        rng.uniform(-kPi / 2, kPi / 2), t0, rng.uniform(-1.0, 1.0));
    const double kc = kernel_spatiotemporal(sp, p, q);
    const double kn =
        kernel_numeric(SpatioTemporalBank{sp}, p, q, delta, delta_t);
    worst = std::max(worst, std::abs(kc - kn) / std::max(std::abs(kn), eta));
  }
  require(worst < 1e-3, fmt("factorized kernel max rel err %.2e", worst));

  double cworst = 0.0;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) reduction(max : cworst)
#endif
  for (int i = 0; i < 20; ++i) {
    Rng rng(808 + static_cast<std::uint64_t>(i));
    const double t0 = rng.uniform(-0.5, 0.5);
    FeaturePoint p = FeaturePoint::spacetime(
        rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
        rng.uniform(-kPi / 2, kPi / 2), t0, rng.uniform(0.0, 1.0));
    FeaturePoint q = FeaturePoint::spacetime(
        rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
        rng.uniform(-kPi / 2, kPi / 2), t0, rng.uniform(0.0, 1.0));
    p.c = rng.uniform();
    q.c = rng.uniform();
    const double kc = kernel_c_family(sp, p, q);
    const double kn = kernel_numeric(CFamilyBank{sp}, p, q, delta, delta_t);
    cworst = std::max(cworst, std::abs(kc - kn) / std::max(std::abs(kn), eta));
  }
  require(cworst < 1e-3, fmt("mixture kernel max rel err %.2e", cworst));
  return fmt("factorized to %.2e, mixture expansion to %.2e", worst, cworst);
}

std::string criterion11() {
  const std::uint64_t seed = 7;
  const PinwheelMap map =
      generate_pinwheel(65, 65, 0.25, 30, kTwoPi / 5.0, seed);
  const KernelField field = propagate_pinwheel(
      map, kGabor, 0.0, 0.0, 6, Nonlinearity::rectifier(0.0));
  const Projection2D proj = as_projection(field);
  const double thr = positive_quantile(field.values, 0.9);
  const double theta0 = map.at(0.0, 0.0);

  std::vector<int> supra;
  for (int row = 0; row < map.height(); ++row)
    for (int col = 0; col < map.width(); ++col)
      if (proj.values(row, col) > thr)
        supra.push_back(row * map.width() + col);
  require(!supra.empty(), "empty suprathreshold set");
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
      const size_t j = i + static_cast<size_t>(
                               rng.bits() %
                               static_cast<std::uint64_t>(total - i));
      std::swap(idx[i], idx[j]);
      s += orientation_distance(
          map.theta(idx[i] / map.width(), idx[i] % map.width()), theta0);
    }
    baseline.push_back(s / static_cast<double>(supra.size()));
  }
  std::sort(baseline.begin(), baseline.end());
  require(stat < baseline[49],
          fmt("mean orientation distance %.4f vs 5th percentile %.4f", stat,
              baseline[49]));
  return fmt("mean orientation distance %.4f below the null's %.4f", stat,
             baseline[49]);
}

std::string criterion12() {
  const std::uint64_t seed = 11;
  const int count = 128, size = 16;
  DiscreteBank bank(
      ingest_discrete_bank(synthetic_learned_bank(count, size, seed), 5, 11));
  bank = bank.normalized();
  const std::vector<double> orients =
      synthetic_learned_orientations(count, seed);
  const int half = bank.support() - 1;  // 10
  const int side = 2 * half + 1;        // 21

  const auto at = [&](double x, double y, int f) {
    FeaturePoint p;
    p.x = x;
    p.y = y;
    p.f = f;
    return p;
  };

  double min_ratio = std::numeric_limits<double>::infinity();
  double max_misalign = 0.0;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) \
    reduction(min : min_ratio) reduction(max : max_misalign)
#endif
  for (int f = 0; f < count; ++f) {
    Eigen::ArrayXd vals(side * side);
    for (int iy = 0; iy < side; ++iy)
      for (int ix = 0; ix < side; ++ix)
        vals[iy * side + ix] =
            kernel_numeric(bank, at(ix - half, iy - half, f), at(0, 0, f));
    // half maximum isolates the central ridge from the parallel side lobes
    const double thr = 0.5 * vals.maxCoeff();
    double n = 0, sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (int iy = 0; iy < side; ++iy)
      for (int ix = 0; ix < side; ++ix) {
        if (vals[iy * side + ix] <= thr) continue;
        const double x = ix - half, y = iy - half;
        n += 1;
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
      }
    const double cxx = sxx / n - (sx / n) * (sx / n);
    const double cyy = syy / n - (sy / n) * (sy / n);
    const double cxy = sxy / n - (sx / n) * (sy / n);
    const double tr = cxx + cyy;
    const double det = std::sqrt((cxx - cyy) * (cxx - cyy) + 4 * cxy * cxy);
    const double lo = (tr - det) / 2, hi = (tr + det) / 2;
    min_ratio = std::min(min_ratio,
                         lo > 0 ? hi / lo
                                : std::numeric_limits<double>::infinity());
    const double axis = 0.5 * std::atan2(2 * cxy, cxx - cyy);
    max_misalign = std::max(
        max_misalign, orientation_distance(axis, orients[static_cast<size_t>(f)]));
  }
  require(min_ratio >= 1.5,
          fmt("weakest second-moment anisotropy %.2f", min_ratio));
  require(max_misalign <= kPi / 8.0,
          fmt("worst axis misalignment %.3f rad", max_misalign));

  // support of the projected column: every overlap shift, and nothing more
  const FeaturePoint p0 = at(0, 0, 0);
  int nonzero = 0;
  for (int iy = 0; iy < side; ++iy)
    for (int ix = 0; ix < side; ++ix) {
      double best = 0.0;
      for (int f = 0; f < count; ++f)
        best = std::max(best, std::abs(kernel_numeric(
                                  bank, at(ix - half, iy - half, f), p0)));
      if (best > 0.0) ++nonzero;
    }
  require(nonzero == side * side,
          fmt("projected support %.0f of 441 pixels",
              static_cast<double>(nonzero)));
  for (int s : {half + 1, -half - 1}) {
    require(kernel_numeric(bank, at(s, 0, 0), p0) == 0.0,
            "kernel extends past the maximal filter overlap");
    require(kernel_numeric(bank, at(0, s, 0), p0) == 0.0,
            "kernel extends past the maximal filter overlap");
  }
  return fmt("anisotropy >= %.2f, misalignment <= %.3f rad, support 21x21",
             min_ratio, max_misalign);
}

std::string criterion13() {
  const fs::path base = fs::temp_directory_path() /
                        ("cortexk_accept_" + std::to_string(::getpid()));
  fs::create_directories(base);
  for (const std::string& name : preset_names()) {
    const std::string command = preset_config(name).command;
    const fs::path a = base / (name + "_a"), b = base / (name + "_b");
    for (const fs::path& dir : {a, b}) {
      const std::string cmd = std::string("\"") + CORTEXK_BIN + "\" " +
                              command + " --preset " + name + " --out " +
                              dir.string() + " > " + (dir.string() + ".log") +
                              " 2>&1";
      require(std::system(cmd.c_str()) == 0, name + ": preset run failed");
    }
    int compared = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
      const fs::path other = b / entry.path().filename();
      require(fs::exists(other),
              name + ": " + entry.path().filename().string() +
                  " missing from the rerun");
      std::ifstream fa(entry.path(), std::ios::binary);
      std::ifstream fb(other, std::ios::binary);
      const std::string ba(std::istreambuf_iterator<char>(fa), {});
      const std::string bb(std::istreambuf_iterator<char>(fb), {});
      require(ba == bb, name + ": " + entry.path().filename().string() +
                            " differs between identical runs");
      ++compared;
    }
    require(compared > 0, name + ": produced no outputs");
  }
  return "all five presets are bytewise reproducible";
}

}  // namespace

int main() {
  int failures = 0;
  const auto run = [&failures](int id, const std::string& what,
                               const std::function<std::string()>& body) {
    try {
      const std::string detail = body();
      std::printf("PASS criterion %d: %s (%s)\n", id, what.c_str(),
                  detail.c_str());
    } catch (const Failure& f) {
      std::printf("FAIL criterion %d: %s (%s)\n", id, what.c_str(),
                  f.detail.c_str());
      ++failures;
    } catch (const std::exception& e) {
      std::printf("FAIL criterion %d: %s (unexpected error: %s)\n", id,
                  what.c_str(), e.what());
      ++failures;
    }
    std::fflush(stdout);
  };

#ifdef _OPENMP
  omp_set_num_threads(1);
#endif
  run(1, "closed-form kernel matches quadrature on 100 random pairs",
      criterion1);
#ifdef _OPENMP
  omp_set_num_threads(omp_get_num_procs());
#endif
  run(2, "profile norms equal sigma^2 pi", criterion2);
  run(3, "kernel distance squares the profile difference", criterion3);

  {
    FeatureGrid grid = reference_grid();
    const Index origin = *grid.find(FeaturePoint::spatial(0.0, 0.0, 0.0));
    const auto op = make_stencil_operator(grid, truncated_gabor_pair(),
                                          Nonlinearity::rectifier(0.0));
    run(4, "transition columns and iterates carry unit mass",
        [&] { return criterion4(*op, origin); });
    run(5, "diagonal kernel splits into even and odd energies", criterion5);
    run(6, "four propagation steps form an axis-selective bow tie",
        [&] { return criterion6(*op, origin); });
  }

  run(7, "patch truncation removes the side-lobe components", criterion7);
  run(8, "glued distances equal bounded chain enumeration", criterion8);
  run(9, "endstopped association fields bend tighter for shorter profiles",
      criterion9);
  run(10, "space-time kernels match their quadratures", criterion10);
  run(11, "propagation on an orientation map stays orientation-patchy",
      criterion11);
  run(12, "learned-bank kernels elongate along each filter's orientation",
      criterion12);
  run(13, "preset runs are bytewise deterministic", criterion13);

  return failures == 0 ? 0 : 1;
}
