#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cortexk/metric.hpp"
#include "cortexk/pinwheel.hpp"

using namespace cortexk;

TEST_CASE("symmetric axis puts the origin on an exact sample") {
  const Axis a = Axis::symmetric("x", 1.5, 0.1);
  CHECK(a.count == 31);
  CHECK(a.min == doctest::Approx(-1.5));
  CHECK(a.coord(15) == 0.0);  // exact, not approximate
  CHECK(a.max() == doctest::Approx(1.5));
  CHECK_THROWS_AS(Axis::symmetric("x", 1.0, 0.0), ConfigError);
}

TEST_CASE("grid enumeration runs the last axis fastest") {
  FeatureGrid grid({Axis{"x", 0.0, 1.0, 2, false},
                    Axis{"y", 0.0, 1.0, 3, false}});
  CHECK(grid.size() == 6);
  CHECK(grid.unflatten(0) == std::vector<int>{0, 0});
  CHECK(grid.unflatten(1) == std::vector<int>{0, 1});
  CHECK(grid.unflatten(3) == std::vector<int>{1, 0});
  for (Index i = 0; i < grid.size(); ++i)
    CHECK(grid.flatten(grid.unflatten(i)) == i);
  CHECK_THROWS_AS(grid.flatten({2, 0}), ConfigError);
  CHECK_THROWS_AS(grid.flatten({0}), ConfigError);
}

TEST_CASE("grid rejects bad axes") {
  CHECK_THROWS_AS(FeatureGrid(std::vector<Axis>{}), ConfigError);
  CHECK_THROWS_AS(FeatureGrid({Axis{"x", 0.0, 1.0, 0, false}}), ConfigError);
  CHECK_THROWS_AS(FeatureGrid({Axis{"", 0.0, 1.0, 2, false}}), ConfigError);
  CHECK_THROWS_AS(
      FeatureGrid({Axis{"bogus", 0.0, 1.0, 2, false}}).point(0), ConfigError);
}

TEST_CASE("points carry the named coordinates") {
  FeatureGrid grid({Axis::symmetric("x", 1.0, 0.5),
                    Axis::symmetric("y", 1.0, 0.5),
                    Axis{"theta", -kPi, kPi / 2, 4, true},
                    Axis{"f", 0.0, 1.0, 3, false}});
  const Index i = grid.flatten({3, 1, 2, 2});
  const FeaturePoint p = grid.point(i);
  CHECK(p.x == doctest::Approx(0.5));
  CHECK(p.y == doctest::Approx(-0.5));
  CHECK(p.theta == doctest::Approx(0.0));
  REQUIRE(p.f.has_value());
  CHECK(*p.f == 2);
  CHECK_FALSE(p.t.has_value());
  CHECK(grid.find(p) == i);
}

TEST_CASE("find demands the same axes and on-grid coordinates") {
  FeatureGrid grid({Axis::symmetric("x", 1.0, 0.5),
                    Axis::symmetric("y", 1.0, 0.5),
                    Axis{"theta", 0.0, 0.5, 3, false}});
  CHECK(grid.find(FeaturePoint::spatial(0.5, -1.0, 1.0)).has_value());
  CHECK_FALSE(grid.find(FeaturePoint::spatial(0.3, 0.0, 0.0)).has_value());
  CHECK_FALSE(grid.find(FeaturePoint::spatial(1.5, 0.0, 0.0)).has_value());
  // tiny numeric error is tolerated
  CHECK(grid.find(FeaturePoint::spatial(0.5 + 1e-12, 0.0, 0.0)).has_value());
  FeaturePoint with_t = FeaturePoint::spacetime(0, 0, 0, 1.0, 0.0);
  CHECK_FALSE(grid.find(with_t).has_value());
}

TEST_CASE("default weights are the grid cell measure") {
  FeatureGrid grid({Axis::symmetric("x", 1.0, 0.5),
                    Axis{"theta", 0.0, 0.25, 4, false}});
  CHECK(grid.weights()[0] == doctest::Approx(0.125));
  CHECK(grid.total_measure() == doctest::Approx(0.125 * grid.size()));
  CHECK(counting_measure(grid).sum() == doctest::Approx(grid.size()));
  CHECK_THROWS_AS(grid.set_weights(Eigen::ArrayXd::Ones(3)), ConfigError);
  CHECK_THROWS_AS(grid.set_weights(Eigen::ArrayXd::Zero(grid.size())),
                  ConfigError);
  grid.set_weights(counting_measure(grid));
  CHECK(grid.total_measure() == doctest::Approx(grid.size()));
}

TEST_CASE("ball measure adds the weights inside the open ball") {
  FeatureGrid grid({Axis{"x", 0.0, 1.0, 10, false}});
  const auto dist = [&](Index a, Index b) {
    return std::abs(static_cast<double>(a - b));
  };
  grid.set_weights(counting_measure(grid));
  CHECK(ball_measure(grid, 5, 2.0, dist) == doctest::Approx(3.0));
  CHECK(ball_measure(grid, 5, 2.5, dist) == doctest::Approx(5.0));
  CHECK(ball_measure(grid, 0, 0.5, dist) == doctest::Approx(1.0));
  // weighted version: weight i+1 at point i
  Eigen::ArrayXd w(10);
  for (int i = 0; i < 10; ++i) w[i] = i + 1.0;
  grid.set_weights(w);
  CHECK(ball_measure(grid, 5, 2.0, dist) == doctest::Approx(5.0 + 6.0 + 7.0));
  CHECK_THROWS_AS(ball_measure(grid, -1, 1.0, dist), ConfigError);
}

TEST_CASE("same layout compares axes, not values") {
  FeatureGrid a({Axis::symmetric("x", 1.0, 0.5)});
  FeatureGrid b({Axis::symmetric("x", 1.0, 0.5)});
  FeatureGrid c({Axis::symmetric("x", 1.0, 0.25)});
  b.set_weights(counting_measure(b));
  CHECK(a.same_layout(b));
  CHECK_FALSE(a.same_layout(c));
}

// ------------------------------------------------------------ pinwheel --

TEST_CASE("pinwheel map values stay in the orientation range") {
  const PinwheelMap map = generate_pinwheel(17, 13, 0.5, 5, 2.0, 3);
  CHECK(map.width() == 17);
  CHECK(map.height() == 13);
  for (int r = 0; r < map.height(); ++r)
    for (int c = 0; c < map.width(); ++c) {
      CHECK(map.theta(r, c) > -kPi / 2);
      CHECK(map.theta(r, c) <= kPi / 2);
    }
}

TEST_CASE("pinwheel generation is seeded") {
  const PinwheelMap a = generate_pinwheel(9, 9, 1.0, 4, 1.5, 7);
  const PinwheelMap b = generate_pinwheel(9, 9, 1.0, 4, 1.5, 7);
  const PinwheelMap c = generate_pinwheel(9, 9, 1.0, 4, 1.5, 8);
  CHECK((a.theta - b.theta).abs().maxCoeff() == 0.0);
  CHECK((a.theta - c.theta).abs().maxCoeff() > 0.0);
}

TEST_CASE("two-wave map is a plane wave along the shared direction") {
  // with m = 2 the waves point along (0, 1) and (-1, 0); on the line
  // y = -x both phases reduce to -k x + const, so consecutive
  // anti-diagonal samples advance the orientation by exactly -k dx / 2
  const double k = 1.1;
  const PinwheelMap map = generate_pinwheel(9, 9, 1.0, 2, k, 5);
  for (int x = -4; x < 4; ++x) {
    const double t0 = map.at(x, -x);
    const double t1 = map.at(x + 1.0, -(x + 1.0));
    const double d = std::remainder(t1 - t0 + k / 2.0, kPi);
    CHECK(std::abs(d) < 1e-9);
  }
}

TEST_CASE("map lookup requires lattice points") {
  const PinwheelMap map = generate_pinwheel(9, 9, 0.5, 3, 1.0, 1);
  CHECK(map.at(0.5, -1.0) == map.theta(6, 5));
  CHECK_THROWS_AS(map.at(0.3, 0.0), ConfigError);
  CHECK_THROWS_AS(map.at(2.5, 0.0), ConfigError);  // past the border
}

// --------------------------------------------------- patch graph, gluing --

namespace {

// Shortest chains by Bellman relaxation, an independent check on the
// Dijkstra route inside glued_distance. Runs until no relaxation fires, or
// for exactly `rounds` when nonnegative.
Eigen::ArrayXd bellman_field(const PatchGraph& g, Index from, int rounds = -1) {
  const double inf = std::numeric_limits<double>::infinity();
  Eigen::ArrayXd dist = Eigen::ArrayXd::Constant(g.size(), inf);
  dist[from] = 0.0;
  const int max_rounds = rounds >= 0 ? rounds : static_cast<int>(g.size());
  for (int r = 0; r < max_rounds; ++r) {
    bool changed = false;
    Eigen::ArrayXd next = dist;
    for (Index u = 0; u < g.size(); ++u) {
      if (dist[u] == inf) continue;
      for (const PatchGraph::Edge& e : g.edges(u)) {
        const double cand = dist[u] + e.w;
        if (cand < next[e.to]) {
          next[e.to] = cand;
          changed = true;
        }
      }
    }
    dist = next;
    if (!changed && rounds < 0) break;
  }
  return dist;
}

PatchGraph small_gabor_graph() {
  FeatureGrid grid({Axis::symmetric("x", 0.5, 0.5),
                    Axis::symmetric("y", 0.5, 0.5),
                    Axis{"theta", -kPi / 2, kPi / 3, 3, false}});
  return gabor_patch_graph(grid, GaborParams{1.0, 0.5}, PatchSpec{1.0});
}

}  // namespace

TEST_CASE("patch graph edges are symmetric and never self loops") {
  const PatchGraph g = small_gabor_graph();
  Index listed = 0;
  for (Index u = 0; u < g.size(); ++u) {
    for (const PatchGraph::Edge& e : g.edges(u)) {
      CHECK(e.to != u);
      CHECK(e.w >= 0.0);
      bool back = false;
      for (const PatchGraph::Edge& r : g.edges(e.to))
        if (r.to == u && r.w == e.w) back = true;
      CHECK(back);
      ++listed;
    }
  }
  // each undirected edge appears in two adjacency lists but is counted once
  CHECK(2 * g.edge_count() == listed);
  CHECK(g.edge_count() > 0);
}

TEST_CASE("gabor graph uses the kernel distance and symmetrized patches") {
  const GaborParams gp{1.0, 0.5};
  const PatchSpec ps{1.0};
  const PatchGraph g = small_gabor_graph();
  const double eta = eta_gabor(gp);
  for (Index u = 0; u < g.size(); ++u) {
    const FeaturePoint pu = g.grid().point(u);
    for (const PatchGraph::Edge& e : g.edges(u)) {
      const FeaturePoint pv = g.grid().point(e.to);
      const bool linked =
          patch_contains(ps, pu, pv) || patch_contains(ps, pv, pu);
      CHECK(linked);
      const double want =
          kernel_distance(eta, kernel_gabor_shifted(gp, pu, pv));
      CHECK(e.w == doctest::Approx(want).epsilon(1e-12));
    }
  }
}

TEST_CASE("glued distance equals bellman relaxation everywhere") {
  const PatchGraph g = small_gabor_graph();
  for (Index s = 0; s < g.size(); ++s) {
    const Eigen::ArrayXd oracle = bellman_field(g, s);
    const Eigen::ArrayXd field = glued_distance_field(g, s);
    for (Index t = 0; t < g.size(); ++t) {
      CHECK(field[t] == oracle[t]);  // exact: same sums, same minima
      const auto one = glued_distance(g, s, t);
      if (std::isinf(oracle[t]))
        CHECK_FALSE(one.has_value());
      else
        CHECK(*one == oracle[t]);
    }
  }
}

TEST_CASE("glued distance to the source is zero") {
  const PatchGraph g = small_gabor_graph();
  CHECK(glued_distance(g, 3, 3) == 0.0);
  CHECK(glued_distance_field(g, 3)[3] == 0.0);
}

TEST_CASE("disconnected points report no chain") {
  // a relation that never joins anything
  FeatureGrid grid({Axis{"x", 0.0, 1.0, 4, false}});
  const PatchGraph g(grid, [](Index, Index) { return 1.0; },
                     [](Index, Index) { return false; });
  CHECK(g.edge_count() == 0);
  CHECK_FALSE(glued_distance(g, 0, 3).has_value());
  CHECK(glued_distance(g, 0, 0) == 0.0);
  CHECK(std::isinf(glued_distance_field(g, 0)[3]));
}
