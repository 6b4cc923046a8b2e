#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fabric/dataset.hpp"
#include "fabric/governance.hpp"
#include "fabric/hypergraph.hpp"
#include "fabric/provenance.hpp"
#include "fabric/schema.hpp"
#include "fabric/simulator.hpp"
#include "fabric/transform.hpp"

namespace fabric {

struct StoreNode {
  std::string name;
  std::set<std::string> hosted;  // dataset names replicated on this node
};

struct IntegrationOutcome {
  IntegrationResult result;
  VertexIndex dataset_vertex = 0;
  VertexIndex metadata_vertex = 0;
  std::string edge_id;
  std::string metadata_id;
};

struct CompositionReport {
  bool ok = true;
  std::vector<std::string> failing_records;  // record ids, insertion order
};

// Top-level assembly: datasets, metadata records, the hypergraph over both,
// registered transformations, access policies, attribute similarity, and the
// node/link topology.
//
// The add_* setters check referential integrity (unique names, known
// vertices, well-formed values) but deliberately allow fabrics that violate
// the four structural conditions, so broken inputs can be loaded and
// diagnosed; validate() reports those violations.  The high-level mutators
// (integrate_datasets, record_history) keep a clean fabric clean.
class FabricStore {
 public:
  // ---- assembly -----------------------------------------------------
  VertexIndex add_dataset(DiscreteDataset d);
  VertexIndex add_metadata(MetadataRecord m);  // m.vertex is assigned here
  void add_hyperedge(const std::string& id, const std::vector<std::string>& tail_names,
                     const std::vector<std::string>& head_names, EdgeLabel label, double weight);
  void register_transformation(Transformation t);
  void add_policy(Policy p);
  void set_similarity(SimilarityTable table);
  void add_node(StoreNode node);
  void set_links(LinkMatrix links);
  void set_strict_connectivity(bool strict) { strict_connectivity_ = strict; }

  // ---- views ----------------------------------------------------------
  const std::vector<DiscreteDataset>& datasets() const { return datasets_; }
  const std::vector<MetadataRecord>& metadata() const { return metadata_; }
  const std::vector<Transformation>& transformations() const { return transforms_; }
  const std::vector<Policy>& policies() const { return policies_; }
  const SimilarityTable& similarity() const { return similarity_; }
  const std::vector<StoreNode>& nodes() const { return nodes_; }
  const std::optional<LinkMatrix>& links() const { return links_; }

  const Hypergraph& graph() const;  // rebuilt after mutations
  std::optional<VertexIndex> vertex_by_name(const std::string& name) const;
  const std::string& vertex_name(VertexIndex v) const;
  const DiscreteDataset& dataset(const std::string& name) const;
  const MetadataRecord& metadata_record(const std::string& id) const;
  const Transformation& transformation(const std::string& id) const;
  std::set<std::string> transformation_ids() const;

  // ---- the four structural conditions ----------------------------------
  // Empty iff (i) every history entry names a registered transformation with
  // nondecreasing timestamps, (ii) every dataset vertex is reachable from
  // some metadata vertex (undirected expansion by default, directed paths
  // under strict connectivity), (iii) every policy parses, and (iv) node
  // hosted sets cover all datasets.
  std::vector<std::string> validate() const;

  // Every record with a multi-step history needs a two-edge witness in the
  // graph: edges e1 != e2 with the record's subject in head(e2) and
  // head(e1) meeting tail(e2), so recorded compositions correspond to
  // composable hyperpaths.
  CompositionReport composition_consistency() const;

  // ---- high-level mutators ----------------------------------------------
  // Integrates `right` into `left` using the registered transformations as
  // candidates, then materialises the outcome: new dataset vertex, an
  // integration edge {left, right} -> unified, a describing metadata record
  // with the applied transformation in its history, a navigation edge from
  // that record to the unified dataset, and hosting on every node holding
  // either parent.
  IntegrationOutcome integrate_datasets(const std::string& left, const std::string& right,
                                        double lambda, double theta);

  // Appends to a record's history; the transformation must be registered.
  void record_history(const std::string& record_id, const std::string& transform_id, double at);

  // ---- queries ---------------------------------------------------------
  // Dataset names (ascending) holding at least one record satisfying the
  // predicate for this user; records that fail to evaluate do not satisfy.
  std::vector<std::string> resolve_query(const std::string& predicate_text,
                                         const UserContext& user) const;

  AccessDecision evaluate_access(const AttrValues& data, const UserContext& user) const;

  std::set<std::string> trace_dataset(const std::string& name) const;

  // ---- topology bridges --------------------------------------------------
  FabricSimulator make_simulator() const;
  std::vector<std::set<VertexIndex>> hosted_vertex_sets() const;

 private:
  VertexIndex add_vertex(const std::string& name, VertexKind kind);
  double next_history_time() const;

  std::vector<DiscreteDataset> datasets_;
  std::vector<MetadataRecord> metadata_;
  std::vector<Vertex> vertices_;
  std::vector<std::string> vertex_names_;
  std::map<std::string, VertexIndex> vertex_index_;
  std::vector<VertexIndex> dataset_vertices_;  // parallel to datasets_
  std::vector<Hyperedge> edges_;
  std::vector<Transformation> transforms_;
  std::vector<Policy> policies_;
  SimilarityTable similarity_;
  std::vector<StoreNode> nodes_;
  std::optional<LinkMatrix> links_;
  bool strict_connectivity_ = false;

  mutable std::unique_ptr<Hypergraph> graph_;
  mutable bool dirty_ = true;
};

}  // namespace fabric
