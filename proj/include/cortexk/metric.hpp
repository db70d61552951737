#pragma once

#include "cortexk/grid.hpp"
#include "cortexk/kernel.hpp"

namespace cortexk {

using DistanceFn = std::function<double(Index, Index)>;
using RelationFn = std::function<bool(Index, Index)>;

/// Patch adjacency over a feature grid: q and q' are joined when either lies
/// in the other's patch (the relation is symmetrized), weighted by the kernel
/// distance. Self edges are omitted. Intended for modest grids; edges are
/// found by a full pair scan.
class PatchGraph {
 public:
  PatchGraph(FeatureGrid grid, const DistanceFn& dist,
             const RelationFn& in_patch);

  const FeatureGrid& grid() const { return grid_; }
  Index size() const { return grid_.size(); }

  struct Edge {
    Index to;
    double w;
  };
  const std::vector<Edge>& edges(Index from) const {
    return adj_[static_cast<size_t>(from)];
  }
  /// Number of undirected edges, each counted once.
  Index edge_count() const;

 private:
  FeatureGrid grid_;
  std::vector<std::vector<Edge>> adj_;
};

/// Convenience graph for the Gabor bank: closed-form kernel distance and the
/// patch relation of `ps`.
PatchGraph gabor_patch_graph(FeatureGrid grid, const GaborParams& g,
                             const PatchSpec& ps);

/// Length of the shortest patch chain from `from` to `to`; nullopt when no
/// chain exists.
std::optional<double> glued_distance(const PatchGraph& graph, Index from,
                                     Index to);

/// Distances from one source to every grid point; unreachable points hold
/// +infinity.
Eigen::ArrayXd glued_distance_field(const PatchGraph& graph, Index from);

}  // namespace cortexk
