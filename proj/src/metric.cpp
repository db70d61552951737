#include "cortexk/metric.hpp"

#include <memory>
#include <queue>

namespace cortexk {

PatchGraph::PatchGraph(FeatureGrid grid, const DistanceFn& dist,
                       const RelationFn& in_patch)
    : grid_(std::move(grid)) {
  const Index n = grid_.size();
  adj_.resize(static_cast<size_t>(n));
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (in_patch(j, i) || in_patch(i, j)) {
        const double w = dist(i, j);
        if (!(w >= 0.0))
          throw ConfigError("PatchGraph: negative edge weight");
        adj_[static_cast<size_t>(i)].push_back({j, w});
        adj_[static_cast<size_t>(j)].push_back({i, w});
      }
    }
  }
}

Index PatchGraph::edge_count() const {
  Index n = 0;
  for (const auto& a : adj_) n += static_cast<Index>(a.size());
  return n / 2;
}

PatchGraph gabor_patch_graph(FeatureGrid grid, const GaborParams& g,
                             const PatchSpec& ps) {
  validate(g);
  const double eta = eta_gabor(g);
  auto shared = std::make_shared<FeatureGrid>(grid);
  DistanceFn dist = [shared, g, eta](Index i, Index j) {
    return kernel_distance(
        eta, kernel_gabor_shifted(g, shared->point(i), shared->point(j)));
  };
  RelationFn rel = [shared, ps](Index i, Index j) {
    return patch_contains(ps, shared->point(i), shared->point(j));
  };
  return PatchGraph(std::move(grid), dist, rel);
}

Eigen::ArrayXd glued_distance_field(const PatchGraph& graph, Index from) {
  const Index n = graph.size();
  if (from < 0 || from >= n)
    throw ConfigError("glued_distance: source index out of range");
  Eigen::ArrayXd dist =
      Eigen::ArrayXd::Constant(n, std::numeric_limits<double>::infinity());
  using Item = std::pair<double, Index>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  dist[from] = 0.0;
  heap.emplace(0.0, from);
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[u]) continue;
    for (const PatchGraph::Edge& e : graph.edges(u)) {
      const double nd = d + e.w;
      if (nd < dist[e.to]) {
        dist[e.to] = nd;
        heap.emplace(nd, e.to);
      }
    }
  }
  return dist;
}

std::optional<double> glued_distance(const PatchGraph& graph, Index from,
                                     Index to) {
  if (to < 0 || to >= graph.size())
    throw ConfigError("glued_distance: target index out of range");
  const Eigen::ArrayXd d = glued_distance_field(graph, from);
  if (!std::isfinite(d[to])) return std::nullopt;
  return d[to];
}

}  // namespace cortexk
