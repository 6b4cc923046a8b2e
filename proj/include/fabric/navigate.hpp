#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fabric/hypergraph.hpp"
#include "fabric/schema.hpp"

namespace fabric {

// Cost of stepping from tail vertex u to head vertex v through edge e.
using WeightFn =
    std::function<double(VertexIndex u, VertexIndex v, const Hyperedge& e)>;

WeightFn unit_weight();

// 1 - sim(label(u), label(v)) with labels resolved through the table; pairs
// the table does not know fall back on the default similarity.
WeightFn label_sim_weight(std::vector<std::string> vertex_labels, SimilarityTable table);

struct HyperPath {
  std::vector<std::size_t> edges;       // edge positions, in traversal order
  std::vector<VertexIndex> vertices;    // visited vertices, source first
  double cost = 0.0;
};

// Single-source state: per-vertex best label plus parent pointers for path
// reconstruction.
struct SearchResult {
  std::vector<double> dist;             // +inf when unreachable
  std::vector<std::size_t> edge_count;
  std::vector<VertexIndex> parent_vertex;
  std::vector<std::size_t> parent_edge;
  VertexIndex source = 0;

  bool reached(VertexIndex v) const;
};

// Hyperedge Dijkstra: a settled tail vertex u relaxes every head vertex v of
// every edge leaving u at cost dist[u] + w(u, v, e).  Label order is
// (cost, edge count, lexicographic edge-id sequence), so results are
// deterministic under ties.  Weights must be nonnegative.
SearchResult single_source(const Hypergraph& g, VertexIndex vs, const WeightFn& w);

std::optional<HyperPath> extract_path(const Hypergraph& g, const SearchResult& r,
                                      VertexIndex vt);

std::optional<HyperPath> shortest_path(const Hypergraph& g, VertexIndex vs, VertexIndex vt,
                                       const WeightFn& w);

struct QueryHit {
  VertexIndex vertex = 0;
  HyperPath path;
};

// Dataset vertices reachable from the anchor that satisfy the predicate,
// ordered by path cost then vertex index.
std::vector<QueryHit> resolve_reachable(const Hypergraph& g, VertexIndex anchor,
                                        const std::function<bool(VertexIndex)>& satisfies,
                                        const WeightFn& w);

struct DiameterBoundReport {
  bool holds = true;
  double max_cost = 0.0;       // largest finite directed shortest-path cost
  std::size_t diameter = 0;    // unweighted diameter of the clique expansion
  double max_weight = 0.0;     // largest step weight across all edges
};

// Verifies every finite directed shortest-path cost is at most
// diameter * max step weight.  All step weights must lie in [0, 1].
// All-pairs work: suitable for desk-scale graphs only.
DiameterBoundReport diameter_bound_check(const Hypergraph& g, const WeightFn& w);

}  // namespace fabric
