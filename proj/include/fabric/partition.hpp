#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fabric/hypergraph.hpp"

namespace fabric {

// Costs for placing datasets on nodes: per-dataset compute cost plus a
// communication cost charged when a dependent pair is split across nodes.
struct CostModel {
  std::map<VertexIndex, double> compute;                              // nonnegative
  std::map<std::pair<VertexIndex, VertexIndex>, double> comm;         // unordered keys (min,max)

  void set_comm(VertexIndex a, VertexIndex b, double cost);
  double comm_between(VertexIndex a, VertexIndex b) const;
};

struct PartitionInstance {
  std::vector<VertexIndex> datasets;  // the placeable vertices, fixed order
  std::size_t node_count = 1;
  CostModel costs;

  void validate() const;
};

// node index per dataset position.
using Assignment = std::vector<std::size_t>;

double objective(const PartitionInstance& inst, const Assignment& a);

struct PartitionResult {
  Assignment assignment;
  double objective = 0.0;
};

// Exact enumeration; requires node_count^datasets <= 1e6.  Ties resolve to
// the lexicographically smallest assignment vector.
PartitionResult brute_force_partition(const PartitionInstance& inst);

// Spectral pipeline: top-k eigenvectors of the hypergraph Laplacian by
// |eigenvalue| (seeded power iteration with deflation, tol 1e-9, <= 1e4
// rounds) embed the vertices; the dataset rows are clustered by seeded
// k-means (20 restarts); clusters map to nodes round-robin in size-descending
// order (ties by smallest member position).
PartitionResult spectral_partition(const Hypergraph& g, const PartitionInstance& inst,
                                   std::size_t k, std::uint64_t seed);

// Per-node total compute cost.
std::vector<double> load(const PartitionInstance& inst, const Assignment& a);

// Greedy max-to-min dataset moves until every node's load fits under the cap
// or no move lowers the maximum.  Never increases the max load.  The cap must
// be at least the mean load (otherwise no assignment can satisfy it).
Assignment rebalance(const PartitionInstance& inst, Assignment a, double cap);

enum class NumericAggregate { sum, mean };

// Canonical-order combination of per-node partials: inputs sort by node id
// first, so every permutation of the same results folds identically.
double aggregate(std::vector<std::pair<std::size_t, double>> per_node, NumericAggregate op);
std::vector<std::string> aggregate_union(
    std::vector<std::pair<std::size_t, std::vector<std::string>>> per_node);

}  // namespace fabric
