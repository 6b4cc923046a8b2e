#include "fabric/provenance.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>

namespace fabric {

void record(MetadataRecord& m, const std::string& transform_id, double at,
            const std::set<std::string>& registered_transforms) {
  if (!registered_transforms.count(transform_id))
    throw std::invalid_argument("history references unregistered transformation '" +
                                transform_id + "'");
  if (at < 0.0) throw std::invalid_argument("history timestamp must be nonnegative");
  if (!m.history.empty() && at < m.history.back().at)
    throw std::invalid_argument("history timestamp regression on record '" + m.id + "'");
  m.history.push_back({transform_id, at});
}

std::set<std::string> trace(VertexIndex subject, const std::vector<MetadataRecord>& records,
                            const Hypergraph& g) {
  if (subject >= g.vertex_count()) throw std::out_of_range("trace: vertex out of range");

  // Ancestors through provenance edges, cycle-safe.
  std::set<VertexIndex> closed;
  std::queue<VertexIndex> open;
  open.push(subject);
  closed.insert(subject);
  while (!open.empty()) {
    VertexIndex d = open.front();
    open.pop();
    for (std::size_t pos : g.adjacency(d).in_edges) {
      const Hyperedge& e = g.edge(pos);
      // Provenance and integration edges both witness lineage; navigation
      // and federated edges do not.
      if (e.label != EdgeLabel::provenance && e.label != EdgeLabel::integration) continue;
      for (VertexIndex u : e.tail)
        if (closed.insert(u).second) open.push(u);
    }
  }

  std::set<std::string> out;
  for (const auto& m : records) {
    if (!m.subject || !closed.count(*m.subject)) continue;
    for (const auto& h : m.history) out.insert(h.transform_id);
  }
  return out;
}

bool CausalOrder::precedes(VertexIndex u, VertexIndex v) const {
  if (u >= n_ || v >= n_) throw std::out_of_range("causal order: vertex out of range");
  return reach_[u][v];
}

std::vector<VertexIndex> CausalOrder::predecessors(VertexIndex v) const {
  if (v >= n_) throw std::out_of_range("causal order: vertex out of range");
  std::vector<VertexIndex> out;
  for (VertexIndex u = 0; u < n_; ++u)
    if (reach_[u][v]) out.push_back(u);
  return out;
}

CausalOrder causal_order(const Hypergraph& g,
                         const std::vector<std::pair<VertexIndex, VertexIndex>>& transform_pairs) {
  const std::size_t n = g.vertex_count();
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (const auto& e : g.edges())
    for (VertexIndex u : e.tail)
      for (VertexIndex v : e.head) reach[u][v] = true;
  for (const auto& [u, v] : transform_pairs) {
    if (u >= n || v >= n) throw std::out_of_range("causal pair out of range");
    reach[u][v] = true;
  }
  // Warshall transitive closure.
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i) {
      if (!reach[i][k]) continue;
      for (std::size_t j = 0; j < n; ++j)
        if (reach[k][j]) reach[i][j] = true;
    }
  bool cyclic = false;
  for (std::size_t v = 0; v < n; ++v) cyclic |= reach[v][v];
  return CausalOrder(n, std::move(reach), cyclic);
}

std::vector<VertexIndex> check_causal(const Hypergraph& g,
                                      const std::vector<std::pair<VertexIndex, VertexIndex>>& transform_pairs,
                                      VertexIndex v) {
  if (v >= g.vertex_count()) throw std::out_of_range("check_causal: vertex out of range");
  std::set<VertexIndex> preds;
  std::queue<VertexIndex> open;
  auto expand = [&](VertexIndex cur) {
    for (std::size_t pos : g.adjacency(cur).in_edges)
      for (VertexIndex u : g.edge(pos).tail)
        if (preds.insert(u).second) open.push(u);
    for (const auto& [from, to] : transform_pairs)
      if (to == cur && preds.insert(from).second) open.push(from);
  };
  expand(v);
  while (!open.empty()) {
    VertexIndex cur = open.front();
    open.pop();
    expand(cur);
  }
  return {preds.begin(), preds.end()};
}

std::map<VertexIndex, std::vector<std::vector<std::string>>> detect_cycles(
    const Hypergraph& g, std::size_t max_len) {
  if (max_len == 0) throw std::invalid_argument("cycle length cap must be positive");

  // Deterministic edge ordering by id; cycles are enumerated with their
  // smallest-ordered edge first, which fixes the rotation exactly once.
  std::vector<std::size_t> order(g.edge_count());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return g.edge(a).id < g.edge(b).id;
  });
  std::vector<std::size_t> rank(g.edge_count());
  for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = i;

  auto heads_reach_tail = [&](std::size_t from, std::size_t to) {
    for (VertexIndex v : g.edge(from).head)
      if (std::binary_search(g.edge(to).tail.begin(), g.edge(to).tail.end(), v)) return true;
    return false;
  };

  std::map<VertexIndex, std::vector<std::vector<std::string>>> out;
  std::vector<std::size_t> chain;
  std::vector<bool> used(g.edge_count(), false);

  auto register_cycle = [&]() {
    std::vector<std::string> ids;
    for (std::size_t pos : chain) ids.push_back(g.edge(pos).id);
    // Connection vertices: heads of step i meeting tails of step i+1 (cyclic).
    std::set<VertexIndex> through;
    for (std::size_t i = 0; i < chain.size(); ++i) {
      const Hyperedge& a = g.edge(chain[i]);
      const Hyperedge& b = g.edge(chain[(i + 1) % chain.size()]);
      for (VertexIndex v : a.head)
        if (std::binary_search(b.tail.begin(), b.tail.end(), v)) through.insert(v);
    }
    for (VertexIndex v : through) out[v].push_back(ids);
  };

  auto dfs = [&](auto&& self, std::size_t first) -> void {
    std::size_t last = chain.back();
    if (heads_reach_tail(last, first)) register_cycle();
    if (chain.size() == max_len) return;
    for (std::size_t next : order) {
      if (used[next] || rank[next] <= rank[first]) continue;
      if (!heads_reach_tail(last, next)) continue;
      used[next] = true;
      chain.push_back(next);
      self(self, first);
      chain.pop_back();
      used[next] = false;
    }
  };

  for (std::size_t first : order) {
    used[first] = true;
    chain.assign(1, first);
    dfs(dfs, first);
    used[first] = false;
  }
  for (auto& [v, cycles] : out) std::sort(cycles.begin(), cycles.end());
  return out;
}

}  // namespace fabric
