#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fabric {

using VertexIndex = std::uint32_t;

enum class VertexKind { dataset, metadata };

struct Vertex {
  VertexIndex index = 0;  // position in the hypergraph's vertex array
  VertexKind kind = VertexKind::dataset;
};

enum class EdgeLabel { integration, navigation, provenance, federated };

struct Hyperedge {
  std::string id;
  std::vector<VertexIndex> tail;  // nonempty; stored sorted and deduplicated
  std::vector<VertexIndex> head;  // nonempty; stored sorted and deduplicated
  EdgeLabel label = EdgeLabel::navigation;
  double weight = 1.0;            // nonnegative

  bool touches(VertexIndex v) const;
};

// Sparse 0/1 incidence matrix in compressed-row form; rows are vertices,
// columns are edge positions.
struct CsrMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_ptr;   // rows + 1 offsets into col_idx
  std::vector<std::uint32_t> col_idx; // sorted within each row

  bool at(std::size_t row, std::size_t col) const;
  std::size_t nonzeros() const { return col_idx.size(); }
};

struct IncidencePair {
  CsrMatrix tails;  // I_T: (v, e) = 1 iff v in tail(e)
  CsrMatrix heads;  // I_H: (v, e) = 1 iff v in head(e)
};

struct Adjacency {
  std::vector<std::size_t> in_edges;   // edge positions with v in head
  std::vector<std::size_t> out_edges;  // edge positions with v in tail
};

class Hypergraph {
 public:
  // Validates and indexes the given vertices/edges.  Vertex indices must be
  // exactly 0..n-1 in order.  With enforce_sparsity, edges are admitted in
  // weight-descending order (ties by id ascending) and an edge is dropped if
  // it would push any incident vertex past the per-vertex cap; the default
  // cap is ceil(log2 |V|) + 1.
  static Hypergraph construct(std::vector<Vertex> vertices, std::vector<Hyperedge> edges,
                              bool enforce_sparsity = false,
                              std::optional<std::size_t> per_vertex_cap = std::nullopt);

  static std::size_t default_vertex_cap(std::size_t vertex_count);

  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const Vertex& vertex(VertexIndex v) const;
  const std::vector<Hyperedge>& edges() const { return edges_; }
  const Hyperedge& edge(std::size_t pos) const { return edges_.at(pos); }
  std::optional<std::size_t> edge_position(const std::string& id) const;

  const Adjacency& adjacency(VertexIndex v) const;

  // Number of edges touching v (an edge counts once even if v appears in
  // both tail and head).
  std::size_t degree(VertexIndex v) const;

  IncidencePair incidence() const;

  // L = I_T * I_T^T - I_H * I_H^T as a dense integer matrix.
  std::vector<std::vector<long long>> laplacian() const;

  // True iff the undirected expansion (vertices joined through shared edges)
  // has a single component covering every vertex.  Vacuously true when there
  // are no vertices or a single vertex.
  bool weakly_connected() const;

  // Exact rank of (I_T + I_H) over the rationals.
  std::size_t incidence_sum_rank() const;

  // rank(I_T + I_H) >= |V| - k, the structural redundancy test for
  // tolerating k node failures.
  bool redundancy_rank(std::size_t k) const;

 private:
  std::vector<Vertex> vertices_;
  std::vector<Hyperedge> edges_;
  std::vector<Adjacency> adjacency_;
  std::vector<std::pair<std::string, std::size_t>> id_index_;  // sorted by id
};

}  // namespace fabric
