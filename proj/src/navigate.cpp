#include "fabric/navigate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace fabric {

WeightFn unit_weight() {
  return [](VertexIndex, VertexIndex, const Hyperedge&) { return 1.0; };
}

WeightFn label_sim_weight(std::vector<std::string> vertex_labels, SimilarityTable table) {
  return [labels = std::move(vertex_labels), table = std::move(table)](
             VertexIndex u, VertexIndex v, const Hyperedge&) {
    if (u >= labels.size() || v >= labels.size())
      throw std::invalid_argument("vertex without a label in similarity weighting");
    return 1.0 - table.sim(labels[u], labels[v]);
  };
}

bool SearchResult::reached(VertexIndex v) const {
  return v < dist.size() && std::isfinite(dist[v]);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Edge-id sequence comparison for exact (cost, edge count) ties, walking the
// parent chains back to the source.
int compare_paths(const Hypergraph& g, const SearchResult& r,
                  VertexIndex tip_a, std::size_t extra_edge_a,
                  VertexIndex tip_b) {
  auto collect = [&](VertexIndex tip, std::optional<std::size_t> extra) {
    std::vector<const std::string*> ids;
    if (extra) ids.push_back(&g.edge(*extra).id);
    VertexIndex v = tip;
    while (v != r.source) {
      ids.push_back(&g.edge(r.parent_edge[v]).id);
      v = r.parent_vertex[v];
    }
    std::reverse(ids.begin(), ids.end());
    return ids;
  };
  auto a = collect(tip_a, extra_edge_a);
  auto b = collect(tip_b, std::nullopt);
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    if (*a[i] < *b[i]) return -1;
    if (*b[i] < *a[i]) return 1;
  }
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  return 0;
}

}  // namespace

SearchResult single_source(const Hypergraph& g, VertexIndex vs, const WeightFn& w) {
  const std::size_t n = g.vertex_count();
  if (vs >= n) throw std::out_of_range("source vertex out of range");

  SearchResult r;
  r.source = vs;
  r.dist.assign(n, kInf);
  r.edge_count.assign(n, 0);
  r.parent_vertex.assign(n, vs);
  r.parent_edge.assign(n, 0);
  r.dist[vs] = 0.0;

  struct Item {
    double cost;
    std::size_t edges;
    VertexIndex vertex;
    bool operator>(const Item& o) const {
      if (cost != o.cost) return cost > o.cost;
      if (edges != o.edges) return edges > o.edges;
      return vertex > o.vertex;
    }
  };
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  heap.push({0.0, 0, vs});

  while (!heap.empty()) {
    Item it = heap.top();
    heap.pop();
    if (it.cost > r.dist[it.vertex] ||
        (it.cost == r.dist[it.vertex] && it.edges > r.edge_count[it.vertex]))
      continue;  // stale entry
    const VertexIndex u = it.vertex;
    for (std::size_t pos : g.adjacency(u).out_edges) {
      const Hyperedge& e = g.edge(pos);
      for (VertexIndex v : e.head) {
        double step = w(u, v, e);
        if (step < 0.0 || !std::isfinite(step))
          throw std::invalid_argument("step weights must be finite and nonnegative");
        double nd = r.dist[u] + step;
        std::size_t ne = r.edge_count[u] + 1;
        bool better = false;
        if (nd < r.dist[v])
          better = true;
        else if (nd == r.dist[v] && ne < r.edge_count[v])
          better = true;
        else if (nd == r.dist[v] && ne == r.edge_count[v] && v != vs &&
                 compare_paths(g, r, u, pos, v) < 0)
          better = true;
        if (!better) continue;
        r.dist[v] = nd;
        r.edge_count[v] = ne;
        r.parent_vertex[v] = u;
        r.parent_edge[v] = pos;
        heap.push({nd, ne, v});
      }
    }
  }
  return r;
}

std::optional<HyperPath> extract_path(const Hypergraph& g, const SearchResult& r,
                                      VertexIndex vt) {
  if (r.dist.size() != g.vertex_count()) {
    throw std::invalid_argument("search result does not match this hypergraph");
  }
  if (vt >= r.dist.size()) throw std::out_of_range("target vertex out of range");
  if (!r.reached(vt)) return std::nullopt;
  HyperPath p;
  p.cost = r.dist[vt];
  VertexIndex v = vt;
  while (v != r.source) {
    p.edges.push_back(r.parent_edge[v]);
    p.vertices.push_back(v);
    v = r.parent_vertex[v];
  }
  p.vertices.push_back(r.source);
  std::reverse(p.edges.begin(), p.edges.end());
  std::reverse(p.vertices.begin(), p.vertices.end());
  return p;
}

std::optional<HyperPath> shortest_path(const Hypergraph& g, VertexIndex vs, VertexIndex vt,
                                       const WeightFn& w) {
  if (vt >= g.vertex_count()) throw std::out_of_range("target vertex out of range");
  if (vs == vt) return HyperPath{{}, {vs}, 0.0};
  SearchResult r = single_source(g, vs, w);
  return extract_path(g, r, vt);
}

std::vector<QueryHit> resolve_reachable(const Hypergraph& g, VertexIndex anchor,
                                        const std::function<bool(VertexIndex)>& satisfies,
                                        const WeightFn& w) {
  SearchResult r = single_source(g, anchor, w);
  std::vector<QueryHit> hits;
  for (VertexIndex v = 0; v < g.vertex_count(); ++v) {
    if (g.vertex(v).kind != VertexKind::dataset) continue;
    if (!r.reached(v)) continue;
    if (!satisfies(v)) continue;
    QueryHit h;
    h.vertex = v;
    h.path = *extract_path(g, r, v);
    hits.push_back(std::move(h));
  }
  std::sort(hits.begin(), hits.end(), [](const QueryHit& a, const QueryHit& b) {
    if (a.path.cost != b.path.cost) return a.path.cost < b.path.cost;
    return a.vertex < b.vertex;
  });
  return hits;
}

DiameterBoundReport diameter_bound_check(const Hypergraph& g, const WeightFn& w) {
  const std::size_t n = g.vertex_count();
  DiameterBoundReport rep;
  if (n == 0) return rep;

  // Max step weight; also validates the [0,1] precondition.
  for (const auto& e : g.edges())
    for (VertexIndex u : e.tail)
      for (VertexIndex v : e.head) {
        double step = w(u, v, e);
        if (step < 0.0 || step > 1.0)
          throw std::invalid_argument("diameter bound requires step weights in [0,1]");
        rep.max_weight = std::max(rep.max_weight, step);
      }

  // Unweighted clique expansion: members of one edge are mutually adjacent.
  std::vector<std::vector<VertexIndex>> und(n);
  for (const auto& e : g.edges()) {
    std::vector<VertexIndex> members = e.tail;
    members.insert(members.end(), e.head.begin(), e.head.end());
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    for (VertexIndex a : members)
      for (VertexIndex b : members)
        if (a != b) und[a].push_back(b);
  }
  for (auto& adj : und) {
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }
  std::vector<std::size_t> hops(n);
  for (VertexIndex s = 0; s < n; ++s) {
    std::fill(hops.begin(), hops.end(), SIZE_MAX);
    hops[s] = 0;
    std::queue<VertexIndex> q;
    q.push(s);
    while (!q.empty()) {
      VertexIndex u = q.front();
      q.pop();
      for (VertexIndex v : und[u])
        if (hops[v] == SIZE_MAX) {
          hops[v] = hops[u] + 1;
          q.push(v);
        }
    }
    for (std::size_t h : hops)
      if (h != SIZE_MAX) rep.diameter = std::max(rep.diameter, h);
  }

  for (VertexIndex s = 0; s < n; ++s) {
    SearchResult r = single_source(g, s, w);
    for (VertexIndex v = 0; v < n; ++v)
      if (r.reached(v)) rep.max_cost = std::max(rep.max_cost, r.dist[v]);
  }
  rep.holds = rep.max_cost <= static_cast<double>(rep.diameter) * rep.max_weight + 1e-12;
  return rep;
}

}  // namespace fabric
