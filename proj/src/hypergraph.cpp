#include "fabric/hypergraph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include <boost/multiprecision/cpp_int.hpp>

namespace fabric {

bool Hyperedge::touches(VertexIndex v) const {
  return std::binary_search(tail.begin(), tail.end(), v) ||
         std::binary_search(head.begin(), head.end(), v);
}

bool CsrMatrix::at(std::size_t row, std::size_t col) const {
  if (row >= rows || col >= cols) throw std::out_of_range("CsrMatrix::at");
  auto first = col_idx.begin() + static_cast<std::ptrdiff_t>(row_ptr[row]);
  auto last = col_idx.begin() + static_cast<std::ptrdiff_t>(row_ptr[row + 1]);
  return std::binary_search(first, last, static_cast<std::uint32_t>(col));
}

std::size_t Hypergraph::default_vertex_cap(std::size_t vertex_count) {
  if (vertex_count <= 1) return 1;
  std::size_t bits = 0;
  std::size_t n = vertex_count - 1;  // ceil(log2 v) = bit width of v-1
  while (n > 0) {
    ++bits;
    n >>= 1;
  }
  return bits + 1;
}

Hypergraph Hypergraph::construct(std::vector<Vertex> vertices, std::vector<Hyperedge> edges,
                                 bool enforce_sparsity,
                                 std::optional<std::size_t> per_vertex_cap) {
  for (std::size_t i = 0; i < vertices.size(); ++i)
    if (vertices[i].index != i)
      throw std::invalid_argument("vertex indices must be contiguous from 0");

  std::set<std::string> ids;
  for (auto& e : edges) {
    if (e.id.empty()) throw std::invalid_argument("hyperedge id must be nonempty");
    if (!ids.insert(e.id).second)
      throw std::invalid_argument("duplicate hyperedge id '" + e.id + "'");
    if (e.tail.empty() || e.head.empty())
      throw std::invalid_argument("hyperedge '" + e.id + "' needs nonempty tail and head");
    if (e.weight < 0.0 || !std::isfinite(e.weight))
      throw std::invalid_argument("hyperedge '" + e.id + "' has invalid weight");
    for (auto side : {&e.tail, &e.head}) {
      for (VertexIndex v : *side)
        if (v >= vertices.size())
          throw std::invalid_argument("hyperedge '" + e.id + "' references missing vertex");
      std::sort(side->begin(), side->end());
      side->erase(std::unique(side->begin(), side->end()), side->end());
    }
  }

  if (enforce_sparsity) {
    std::size_t cap = per_vertex_cap.value_or(default_vertex_cap(vertices.size()));
    if (cap == 0) throw std::invalid_argument("per-vertex edge cap must be positive");
    std::vector<std::size_t> order(edges.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (edges[a].weight != edges[b].weight) return edges[a].weight > edges[b].weight;
      return edges[a].id < edges[b].id;
    });
    std::vector<std::size_t> deg(vertices.size(), 0);
    std::vector<bool> keep(edges.size(), false);
    for (std::size_t pos : order) {
      std::vector<VertexIndex> members = edges[pos].tail;
      members.insert(members.end(), edges[pos].head.begin(), edges[pos].head.end());
      std::sort(members.begin(), members.end());
      members.erase(std::unique(members.begin(), members.end()), members.end());
      bool fits = true;
      for (VertexIndex v : members) fits &= deg[v] < cap;
      if (!fits) continue;
      keep[pos] = true;
      for (VertexIndex v : members) ++deg[v];
    }
    std::vector<Hyperedge> kept;
    for (std::size_t i = 0; i < edges.size(); ++i)
      if (keep[i]) kept.push_back(std::move(edges[i]));
    edges = std::move(kept);
  }

  Hypergraph g;
  g.vertices_ = std::move(vertices);
  g.edges_ = std::move(edges);
  g.adjacency_.assign(g.vertices_.size(), Adjacency{});
  for (std::size_t pos = 0; pos < g.edges_.size(); ++pos) {
    for (VertexIndex v : g.edges_[pos].head) g.adjacency_[v].in_edges.push_back(pos);
    for (VertexIndex v : g.edges_[pos].tail) g.adjacency_[v].out_edges.push_back(pos);
    g.id_index_.emplace_back(g.edges_[pos].id, pos);
  }
  std::sort(g.id_index_.begin(), g.id_index_.end());
  return g;
}

const Vertex& Hypergraph::vertex(VertexIndex v) const {
  if (v >= vertices_.size()) throw std::out_of_range("vertex index out of range");
  return vertices_[v];
}

std::optional<std::size_t> Hypergraph::edge_position(const std::string& id) const {
  auto it = std::lower_bound(id_index_.begin(), id_index_.end(),
                             std::make_pair(id, std::size_t{0}));
  if (it == id_index_.end() || it->first != id) return std::nullopt;
  return it->second;
}

const Adjacency& Hypergraph::adjacency(VertexIndex v) const {
  if (v >= vertices_.size()) throw std::out_of_range("vertex index out of range");
  return adjacency_[v];
}

std::size_t Hypergraph::degree(VertexIndex v) const {
  const Adjacency& adj = adjacency(v);
  std::set<std::size_t> touched(adj.in_edges.begin(), adj.in_edges.end());
  touched.insert(adj.out_edges.begin(), adj.out_edges.end());
  return touched.size();
}

namespace {

CsrMatrix build_csr(std::size_t rows, std::size_t cols,
                    const std::vector<std::vector<std::uint32_t>>& row_cols) {
  CsrMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.row_ptr.assign(rows + 1, 0);
  for (std::size_t r = 0; r < rows; ++r) m.row_ptr[r + 1] = m.row_ptr[r] + row_cols[r].size();
  m.col_idx.reserve(m.row_ptr[rows]);
  for (std::size_t r = 0; r < rows; ++r)
    m.col_idx.insert(m.col_idx.end(), row_cols[r].begin(), row_cols[r].end());
  return m;
}

}  // namespace

IncidencePair Hypergraph::incidence() const {
  std::vector<std::vector<std::uint32_t>> tail_rows(vertices_.size());
  std::vector<std::vector<std::uint32_t>> head_rows(vertices_.size());
  for (std::size_t pos = 0; pos < edges_.size(); ++pos) {
    for (VertexIndex v : edges_[pos].tail) tail_rows[v].push_back(static_cast<std::uint32_t>(pos));
    for (VertexIndex v : edges_[pos].head) head_rows[v].push_back(static_cast<std::uint32_t>(pos));
  }
  IncidencePair p;
  p.tails = build_csr(vertices_.size(), edges_.size(), tail_rows);
  p.heads = build_csr(vertices_.size(), edges_.size(), head_rows);
  return p;
}

std::vector<std::vector<long long>> Hypergraph::laplacian() const {
  const std::size_t n = vertices_.size();
  std::vector<std::vector<long long>> l(n, std::vector<long long>(n, 0));
  for (const auto& e : edges_) {
    for (VertexIndex u : e.tail)
      for (VertexIndex v : e.tail) l[u][v] += 1;
    for (VertexIndex u : e.head)
      for (VertexIndex v : e.head) l[u][v] -= 1;
  }
  return l;
}

bool Hypergraph::weakly_connected() const {
  const std::size_t n = vertices_.size();
  if (n <= 1) return true;
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const auto& e : edges_) {
    std::size_t root = find(e.tail.front());
    for (VertexIndex v : e.tail) parent[find(v)] = root;
    for (VertexIndex v : e.head) parent[find(v)] = root;
    root = find(root);
  }
  std::size_t r0 = find(0);
  for (std::size_t v = 1; v < n; ++v)
    if (find(v) != r0) return false;
  return true;
}

std::size_t Hypergraph::incidence_sum_rank() const {
  using Rational = boost::multiprecision::cpp_rational;
  const std::size_t rows = vertices_.size();
  const std::size_t cols = edges_.size();
  if (rows == 0 || cols == 0) return 0;

  // Dense I_T + I_H; entries are 0, 1 or 2 (2 when a vertex sits in both the
  // tail and the head of the same edge).
  std::vector<std::vector<Rational>> a(rows, std::vector<Rational>(cols, 0));
  for (std::size_t pos = 0; pos < cols; ++pos) {
    for (VertexIndex v : edges_[pos].tail) a[v][pos] += 1;
    for (VertexIndex v : edges_[pos].head) a[v][pos] += 1;
  }

  // Exact Gaussian elimination over the rationals.
  std::size_t rank = 0;
  for (std::size_t col = 0; col < cols && rank < rows; ++col) {
    std::size_t pivot = rank;
    while (pivot < rows && a[pivot][col] == 0) ++pivot;
    if (pivot == rows) continue;
    std::swap(a[rank], a[pivot]);
    Rational inv = a[rank][col];
    for (std::size_t j = col; j < cols; ++j) a[rank][j] /= inv;
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == rank || a[r][col] == 0) continue;
      Rational f = a[r][col];
      for (std::size_t j = col; j < cols; ++j) a[r][j] -= f * a[rank][j];
    }
    ++rank;
  }
  return rank;
}

bool Hypergraph::redundancy_rank(std::size_t k) const {
  std::size_t need = vertices_.size() > k ? vertices_.size() - k : 0;
  return incidence_sum_rank() >= need;
}

}  // namespace fabric
