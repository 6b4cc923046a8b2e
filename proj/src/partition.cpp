#include "fabric/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "fabric/linalg.hpp"

namespace fabric {

void CostModel::set_comm(VertexIndex a, VertexIndex b, double cost) {
  if (a == b) throw std::invalid_argument("communication cost needs two distinct datasets");
  if (cost < 0.0) throw std::invalid_argument("communication cost must be nonnegative");
  comm[{std::min(a, b), std::max(a, b)}] = cost;
}

double CostModel::comm_between(VertexIndex a, VertexIndex b) const {
  auto it = comm.find({std::min(a, b), std::max(a, b)});
  return it == comm.end() ? 0.0 : it->second;
}

void PartitionInstance::validate() const {
  if (node_count == 0) throw std::invalid_argument("partition needs at least one node");
  if (datasets.empty()) throw std::invalid_argument("partition needs at least one dataset");
  std::set<VertexIndex> ds(datasets.begin(), datasets.end());
  if (ds.size() != datasets.size())
    throw std::invalid_argument("partition dataset list repeats a vertex");
  for (VertexIndex d : datasets) {
    auto it = costs.compute.find(d);
    if (it == costs.compute.end())
      throw std::invalid_argument("dataset " + std::to_string(d) + " has no compute cost");
    if (it->second < 0.0)
      throw std::invalid_argument("compute cost must be nonnegative");
  }
  for (const auto& [pair, cost] : costs.comm) {
    if (!ds.count(pair.first) || !ds.count(pair.second))
      throw std::invalid_argument("communication pair references a vertex outside the instance");
    if (cost < 0.0) throw std::invalid_argument("communication cost must be nonnegative");
  }
}

double objective(const PartitionInstance& inst, const Assignment& a) {
  inst.validate();
  if (a.size() != inst.datasets.size())
    throw std::invalid_argument("assignment arity does not match the instance");
  for (std::size_t node : a)
    if (node >= inst.node_count) throw std::invalid_argument("assignment uses a missing node");

  std::map<VertexIndex, std::size_t> pos;
  for (std::size_t i = 0; i < inst.datasets.size(); ++i) pos[inst.datasets[i]] = i;

  double total = 0.0;
  for (std::size_t i = 0; i < inst.datasets.size(); ++i)
    total += inst.costs.compute.at(inst.datasets[i]);
  for (const auto& [pair, cost] : inst.costs.comm)
    if (a[pos.at(pair.first)] != a[pos.at(pair.second)]) total += cost;
  return total;
}

PartitionResult brute_force_partition(const PartitionInstance& inst) {
  inst.validate();
  double combos = std::pow(static_cast<double>(inst.node_count),
                           static_cast<double>(inst.datasets.size()));
  if (combos > 1e6)
    throw std::invalid_argument("instance too large for exhaustive search");

  Assignment a(inst.datasets.size(), 0);
  PartitionResult best;
  best.objective = std::numeric_limits<double>::infinity();
  while (true) {
    double obj = objective(inst, a);
    if (obj < best.objective) {
      best.objective = obj;
      best.assignment = a;
    }
    // Odometer increment in lexicographic order (last position fastest).
    std::size_t i = a.size();
    while (i > 0) {
      --i;
      if (++a[i] < inst.node_count) break;
      a[i] = 0;
      if (i == 0) return best;
    }
  }
}

PartitionResult spectral_partition(const Hypergraph& g, const PartitionInstance& inst,
                                   std::size_t k, std::uint64_t seed) {
  inst.validate();
  if (k == 0 || k > inst.datasets.size())
    throw std::invalid_argument("cluster count must lie in [1, dataset count]");
  for (VertexIndex d : inst.datasets)
    if (d >= g.vertex_count())
      throw std::invalid_argument("instance references a vertex outside the graph");

  // Vertex embedding from the top-k eigenpairs of the signed Laplacian.
  auto li = g.laplacian();
  DenseMatrix l(li.size(), std::vector<double>(li.size()));
  for (std::size_t i = 0; i < li.size(); ++i)
    for (std::size_t j = 0; j < li.size(); ++j) l[i][j] = static_cast<double>(li[i][j]);
  auto pairs = top_eigenpairs(l, k, seed, 1e-9, 10000);

  std::vector<std::vector<double>> rows;
  for (VertexIndex d : inst.datasets) {
    std::vector<double> row;
    for (const auto& p : pairs) row.push_back(p.vector[d]);
    rows.push_back(std::move(row));
  }

  KMeansResult km = kmeans(rows, k, seed + 1, 20);

  // Clusters ordered by size descending (ties by smallest member position),
  // then dealt to nodes round-robin.
  std::vector<std::size_t> size(k, 0), first(k, rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ++size[km.labels[i]];
    first[km.labels[i]] = std::min(first[km.labels[i]], i);
  }
  std::vector<std::size_t> cluster_order;
  for (std::size_t c = 0; c < k; ++c)
    if (size[c] > 0) cluster_order.push_back(c);
  std::sort(cluster_order.begin(), cluster_order.end(), [&](std::size_t a, std::size_t b) {
    if (size[a] != size[b]) return size[a] > size[b];
    return first[a] < first[b];
  });
  std::vector<std::size_t> node_of_cluster(k, 0);
  for (std::size_t rankpos = 0; rankpos < cluster_order.size(); ++rankpos)
    node_of_cluster[cluster_order[rankpos]] = rankpos % inst.node_count;

  PartitionResult out;
  out.assignment.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.assignment[i] = node_of_cluster[km.labels[i]];
  out.objective = objective(inst, out.assignment);
  return out;
}

std::vector<double> load(const PartitionInstance& inst, const Assignment& a) {
  inst.validate();
  if (a.size() != inst.datasets.size())
    throw std::invalid_argument("assignment arity does not match the instance");
  std::vector<double> l(inst.node_count, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] >= inst.node_count) throw std::invalid_argument("assignment uses a missing node");
    l[a[i]] += inst.costs.compute.at(inst.datasets[i]);
  }
  return l;
}

Assignment rebalance(const PartitionInstance& inst, Assignment a, double cap) {
  std::vector<double> l = load(inst, a);
  double total = 0.0;
  for (double x : l) total += x;
  if (cap < total / static_cast<double>(inst.node_count) - 1e-12)
    throw std::invalid_argument("load cap below the mean load is infeasible");

  while (true) {
    std::size_t src = 0, dst = 0;
    for (std::size_t nid = 1; nid < l.size(); ++nid) {
      if (l[nid] > l[src]) src = nid;
      if (l[nid] < l[dst]) dst = nid;
    }
    double current_max = l[src];
    if (current_max <= cap) break;

    // Best dataset to move from src to dst: minimise the resulting overall
    // max load; ties toward the lowest dataset position.
    double best_new_max = std::numeric_limits<double>::infinity();
    std::size_t best_i = a.size();
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] != src) continue;
      double c = inst.costs.compute.at(inst.datasets[i]);
      double new_max = std::max(l[src] - c, l[dst] + c);
      for (std::size_t nid = 0; nid < l.size(); ++nid)
        if (nid != src && nid != dst) new_max = std::max(new_max, l[nid]);
      if (new_max < best_new_max) {
        best_new_max = new_max;
        best_i = i;
      }
    }
    if (best_i == a.size() || best_new_max >= current_max) break;  // no improving move
    double c = inst.costs.compute.at(inst.datasets[best_i]);
    l[src] -= c;
    l[dst] += c;
    a[best_i] = dst;
  }
  return a;
}

double aggregate(std::vector<std::pair<std::size_t, double>> per_node, NumericAggregate op) {
  if (per_node.empty()) throw std::invalid_argument("aggregate needs at least one partial");
  std::sort(per_node.begin(), per_node.end());
  double total = 0.0;
  for (const auto& [_, v] : per_node) total += v;
  return op == NumericAggregate::sum ? total : total / static_cast<double>(per_node.size());
}

std::vector<std::string> aggregate_union(
    std::vector<std::pair<std::size_t, std::vector<std::string>>> per_node) {
  if (per_node.empty()) throw std::invalid_argument("aggregate needs at least one partial");
  std::set<std::string> merged;
  for (const auto& [_, items] : per_node) merged.insert(items.begin(), items.end());
  return {merged.begin(), merged.end()};
}

}  // namespace fabric
