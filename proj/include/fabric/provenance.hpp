#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fabric/dataset.hpp"
#include "fabric/hypergraph.hpp"

namespace fabric {

struct HistoryEntry {
  std::string transform_id;
  double at = 0.0;  // nonnegative timestamp; nondecreasing within a record
};

struct MetadataRecord {
  std::string id;
  VertexIndex vertex = 0;                 // metadata vertex in the graph
  std::optional<VertexIndex> subject;     // dataset vertex this record describes
  std::map<std::string, Value> attrs;
  std::vector<HistoryEntry> history;
};

// Appends (transform, at) to the record's history.  The transformation must
// be registered and the timestamp must not regress.
void record(MetadataRecord& m, const std::string& transform_id, double at,
            const std::set<std::string>& registered_transforms);

// Transformations that produced the dataset at `subject`: the union of the
// history entries of every record describing it, walked transitively through
// provenance-labelled edges ending at it (tail datasets are ancestors).
std::set<std::string> trace(VertexIndex subject, const std::vector<MetadataRecord>& records,
                            const Hypergraph& g);

class CausalOrder {
 public:
  CausalOrder(std::size_t n, std::vector<std::vector<bool>> reach, bool cyclic)
      : n_(n), reach_(std::move(reach)), cyclic_(cyclic) {}

  bool precedes(VertexIndex u, VertexIndex v) const;
  bool cyclic() const { return cyclic_; }
  std::vector<VertexIndex> predecessors(VertexIndex v) const;

 private:
  std::size_t n_;
  std::vector<std::vector<bool>> reach_;
  bool cyclic_;
};

// Strict causal relation: u precedes v when a hyperedge has u in its tail and
// v in its head, or when an explicit (from, to) pair (a recorded
// transformation application) says so; closed transitively.  On cyclic
// graphs the result is a preorder and the cyclic flag is set.
CausalOrder causal_order(const Hypergraph& g,
                         const std::vector<std::pair<VertexIndex, VertexIndex>>& transform_pairs = {});

// Predecessor set of v computed independently by a backward walk over
// incoming hyperedges and explicit pairs; sorted ascending.
std::vector<VertexIndex> check_causal(const Hypergraph& g,
                                      const std::vector<std::pair<VertexIndex, VertexIndex>>& transform_pairs,
                                      VertexIndex v);

// Directed hyperedge cycles (edge-id sequences) through each vertex, with
// rotation-deduplicated enumeration and a length cap.
std::map<VertexIndex, std::vector<std::vector<std::string>>> detect_cycles(
    const Hypergraph& g, std::size_t max_len = 8);

}  // namespace fabric
