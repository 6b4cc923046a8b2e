#include "fabric/store.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace fabric {
namespace {

// Union-find over vertex indices for the undirected expansion.
struct Dsu {
  std::vector<std::size_t> parent;
  explicit Dsu(std::size_t n) : parent(n) {
    for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void join(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

bool sorted_intersects(const std::vector<VertexIndex>& a, const std::vector<VertexIndex>& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) return true;
    if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return false;
}

}  // namespace

VertexIndex FabricStore::add_vertex(const std::string& name, VertexKind kind) {
  if (name.empty()) throw std::invalid_argument("vertex names must be nonempty");
  if (vertex_index_.count(name)) throw std::invalid_argument("duplicate vertex name: " + name);
  const VertexIndex v = static_cast<VertexIndex>(vertices_.size());
  vertices_.push_back(Vertex{v, kind});
  vertex_names_.push_back(name);
  vertex_index_[name] = v;
  dirty_ = true;
  return v;
}

VertexIndex FabricStore::add_dataset(DiscreteDataset d) {
  d.validate();
  const VertexIndex v = add_vertex(d.name, VertexKind::dataset);
  datasets_.push_back(std::move(d));
  dataset_vertices_.push_back(v);
  return v;
}

VertexIndex FabricStore::add_metadata(MetadataRecord m) {
  if (m.subject) {
    if (*m.subject >= vertices_.size() || vertices_[*m.subject].kind != VertexKind::dataset) {
      throw std::invalid_argument("metadata subject must be an existing dataset vertex");
    }
  }
  double prev = 0.0;
  for (const auto& h : m.history) {
    if (h.at < 0.0) throw std::invalid_argument("history timestamps must be nonnegative");
    if (h.at < prev) throw std::invalid_argument("history timestamps must not regress");
    prev = h.at;
  }
  const VertexIndex v = add_vertex(m.id, VertexKind::metadata);
  m.vertex = v;
  metadata_.push_back(std::move(m));
  return v;
}

void FabricStore::add_hyperedge(const std::string& id, const std::vector<std::string>& tail_names,
                                const std::vector<std::string>& head_names, EdgeLabel label,
                                double weight) {
  Hyperedge e;
  e.id = id;
  e.label = label;
  e.weight = weight;
  for (const auto& n : tail_names) {
    const auto v = vertex_by_name(n);
    if (!v) throw std::invalid_argument("edge " + id + " references unknown vertex: " + n);
    e.tail.push_back(*v);
  }
  for (const auto& n : head_names) {
    const auto v = vertex_by_name(n);
    if (!v) throw std::invalid_argument("edge " + id + " references unknown vertex: " + n);
    e.head.push_back(*v);
  }
  auto trial = edges_;
  trial.push_back(e);
  Hypergraph::construct(vertices_, trial);  // throws on malformed or duplicate edges
  edges_ = std::move(trial);
  dirty_ = true;
}

void FabricStore::register_transformation(Transformation t) {
  if (t.id.empty()) throw std::invalid_argument("transformation ids must be nonempty");
  for (const auto& existing : transforms_) {
    if (existing.id == t.id) throw std::invalid_argument("duplicate transformation id: " + t.id);
  }
  t.validate_params();
  transforms_.push_back(std::move(t));
}

void FabricStore::add_policy(Policy p) {
  if (p.id.empty()) throw std::invalid_argument("policy ids must be nonempty");
  for (const auto& existing : policies_) {
    if (existing.id == p.id) throw std::invalid_argument("duplicate policy id: " + p.id);
  }
  policies_.push_back(std::move(p));
}

void FabricStore::set_similarity(SimilarityTable table) { similarity_ = std::move(table); }

void FabricStore::add_node(StoreNode node) {
  if (links_) throw std::invalid_argument("declare all nodes before the link matrix");
  if (node.name.empty()) throw std::invalid_argument("node names must be nonempty");
  for (const auto& existing : nodes_) {
    if (existing.name == node.name) throw std::invalid_argument("duplicate node name: " + node.name);
  }
  for (const auto& hosted : node.hosted) {
    const auto v = vertex_by_name(hosted);
    if (!v || vertices_[*v].kind != VertexKind::dataset) {
      throw std::invalid_argument("node " + node.name + " hosts unknown dataset: " + hosted);
    }
  }
  nodes_.push_back(std::move(node));
}

void FabricStore::set_links(LinkMatrix links) {
  links.validate();
  if (links.size() != nodes_.size()) {
    throw std::invalid_argument("link matrix size must match the node count");
  }
  links_ = std::move(links);
}

const Hypergraph& FabricStore::graph() const {
  if (dirty_ || !graph_) {
    graph_ = std::make_unique<Hypergraph>(Hypergraph::construct(vertices_, edges_));
    dirty_ = false;
  }
  return *graph_;
}

std::optional<VertexIndex> FabricStore::vertex_by_name(const std::string& name) const {
  const auto it = vertex_index_.find(name);
  if (it == vertex_index_.end()) return std::nullopt;
  return it->second;
}

const std::string& FabricStore::vertex_name(VertexIndex v) const {
  if (v >= vertex_names_.size()) throw std::out_of_range("vertex out of range");
  return vertex_names_[v];
}

const DiscreteDataset& FabricStore::dataset(const std::string& name) const {
  for (const auto& d : datasets_) {
    if (d.name == name) return d;
  }
  throw std::invalid_argument("unknown dataset: " + name);
}

const MetadataRecord& FabricStore::metadata_record(const std::string& id) const {
  for (const auto& m : metadata_) {
    if (m.id == id) return m;
  }
  throw std::invalid_argument("unknown metadata record: " + id);
}

const Transformation& FabricStore::transformation(const std::string& id) const {
  for (const auto& t : transforms_) {
    if (t.id == id) return t;
  }
  throw std::invalid_argument("unknown transformation: " + id);
}

std::set<std::string> FabricStore::transformation_ids() const {
  std::set<std::string> out;
  for (const auto& t : transforms_) out.insert(t.id);
  return out;
}

std::vector<std::string> FabricStore::validate() const {
  std::vector<std::string> problems;
  const auto registered = transformation_ids();

  // (i) histories reference registered transformations, timestamps ordered.
  for (const auto& m : metadata_) {
    double prev = 0.0;
    for (const auto& h : m.history) {
      if (!registered.count(h.transform_id)) {
        problems.push_back("consistency: record " + m.id +
                           " references unregistered transformation " + h.transform_id);
      }
      if (h.at < 0.0 || h.at < prev) {
        problems.push_back("consistency: record " + m.id + " has out-of-order history timestamps");
        break;
      }
      prev = h.at;
    }
  }

  // (ii) every dataset vertex reachable from some metadata vertex.
  const Hypergraph& g = graph();
  std::vector<bool> reached(g.vertex_count(), false);
  if (strict_connectivity_) {
    std::deque<VertexIndex> queue;
    for (const auto& m : metadata_) {
      if (!reached[m.vertex]) {
        reached[m.vertex] = true;
        queue.push_back(m.vertex);
      }
    }
    while (!queue.empty()) {
      const VertexIndex u = queue.front();
      queue.pop_front();
      for (std::size_t pos : g.adjacency(u).out_edges) {
        for (VertexIndex v : g.edge(pos).head) {
          if (!reached[v]) {
            reached[v] = true;
            queue.push_back(v);
          }
        }
      }
    }
  } else {
    Dsu dsu(g.vertex_count());
    for (const auto& e : g.edges()) {
      const VertexIndex anchor = e.tail.front();
      for (VertexIndex v : e.tail) dsu.join(anchor, v);
      for (VertexIndex v : e.head) dsu.join(anchor, v);
    }
    for (VertexIndex d = 0; d < g.vertex_count(); ++d) {
      for (const auto& m : metadata_) {
        if (dsu.find(m.vertex) == dsu.find(d)) {
          reached[d] = true;
          break;
        }
      }
    }
  }
  for (std::size_t i = 0; i < datasets_.size(); ++i) {
    if (!reached[dataset_vertices_[i]]) {
      problems.push_back("connectivity: dataset " + datasets_[i].name +
                         " is unreachable from every metadata record");
    }
  }

  // (iii) policies parse.
  for (const auto& p : policies_) {
    try {
      parse_predicate(p.text);
    } catch (const PredicateParseError& e) {
      problems.push_back("compliance: policy " + p.id + " does not parse: " + e.what());
    }
  }

  // (iv) hosted sets cover the datasets.
  std::set<std::string> hosted_union;
  for (const auto& n : nodes_) hosted_union.insert(n.hosted.begin(), n.hosted.end());
  for (const auto& d : datasets_) {
    if (!hosted_union.count(d.name)) {
      problems.push_back("distributivity: dataset " + d.name + " is hosted on no node");
    }
  }
  return problems;
}

CompositionReport FabricStore::composition_consistency() const {
  const Hypergraph& g = graph();
  CompositionReport report;
  for (const auto& m : metadata_) {
    if (!m.subject || m.history.size() < 2) continue;
    bool witnessed = false;
    for (std::size_t e2 = 0; e2 < g.edge_count() && !witnessed; ++e2) {
      const auto& second = g.edge(e2);
      if (!std::binary_search(second.head.begin(), second.head.end(), *m.subject)) continue;
      for (std::size_t e1 = 0; e1 < g.edge_count(); ++e1) {
        if (e1 == e2) continue;
        if (sorted_intersects(g.edge(e1).head, second.tail)) {
          witnessed = true;
          break;
        }
      }
    }
    if (!witnessed) {
      report.ok = false;
      report.failing_records.push_back(m.id);
    }
  }
  return report;
}

double FabricStore::next_history_time() const {
  double t = 0.0;
  for (const auto& m : metadata_) {
    for (const auto& h : m.history) t = std::max(t, h.at);
  }
  return t + 1.0;
}

IntegrationOutcome FabricStore::integrate_datasets(const std::string& left,
                                                   const std::string& right, double lambda,
                                                   double theta) {
  const DiscreteDataset& di = dataset(left);
  const DiscreteDataset& dj = dataset(right);
  const auto lv = *vertex_by_name(left);
  const auto rv = *vertex_by_name(right);

  IntegrationResult result = integrate(di, dj, transforms_, similarity_, lambda, theta);
  if (vertex_index_.count(result.unified.name)) {
    throw std::invalid_argument("integration output name already exists: " + result.unified.name);
  }
  const std::string unified_name = result.unified.name;
  const std::string edge_id = "int:" + unified_name;
  const std::string meta_id = "meta:" + unified_name;
  if (vertex_index_.count(meta_id)) {
    throw std::invalid_argument("integration metadata name already exists: " + meta_id);
  }

  IntegrationOutcome out;
  out.result = result;
  out.edge_id = edge_id;
  out.metadata_id = meta_id;
  out.dataset_vertex = add_dataset(std::move(result.unified));

  MetadataRecord m;
  m.id = meta_id;
  m.subject = out.dataset_vertex;
  record(m, transforms_[result.candidate_index].id, next_history_time(), transformation_ids());
  out.metadata_vertex = add_metadata(std::move(m));

  add_hyperedge(edge_id, {vertex_name(lv), vertex_name(rv)}, {unified_name},
                EdgeLabel::integration, 1.0);
  add_hyperedge("nav:" + meta_id, {meta_id}, {unified_name}, EdgeLabel::navigation, 1.0);

  // The unified dataset lives wherever a parent lives, keeping the hosted
  // sets covering.
  for (auto& n : nodes_) {
    if (n.hosted.count(left) || n.hosted.count(right)) n.hosted.insert(unified_name);
  }
  return out;
}

void FabricStore::record_history(const std::string& record_id, const std::string& transform_id,
                                 double at) {
  for (auto& m : metadata_) {
    if (m.id == record_id) {
      record(m, transform_id, at, transformation_ids());
      return;
    }
  }
  throw std::invalid_argument("unknown metadata record: " + record_id);
}

std::vector<std::string> FabricStore::resolve_query(const std::string& predicate_text,
                                                    const UserContext& user) const {
  const PredicatePtr expr = parse_predicate(predicate_text);
  std::vector<std::string> hits;
  for (const auto& d : datasets_) {
    bool satisfied = false;
    for (const auto& r : d.records) {
      AttrValues attrs;
      for (std::size_t i = 0; i < d.schema.attributes.size(); ++i) {
        attrs[d.schema.attributes[i].name] = r[i];
      }
      try {
        if (evaluate_predicate(*expr, attrs, user)) {
          satisfied = true;
          break;
        }
      } catch (const PredicateEvalError&) {
        // A record the predicate cannot evaluate against does not satisfy it.
      }
    }
    if (satisfied) hits.push_back(d.name);
  }
  std::sort(hits.begin(), hits.end());
  return hits;
}

AccessDecision FabricStore::evaluate_access(const AttrValues& data, const UserContext& user) const {
  return evaluate_request(data, user, policies_);
}

std::set<std::string> FabricStore::trace_dataset(const std::string& name) const {
  const auto v = vertex_by_name(name);
  if (!v || vertices_[*v].kind != VertexKind::dataset) {
    throw std::invalid_argument("unknown dataset: " + name);
  }
  return trace(*v, metadata_, graph());
}

FabricSimulator FabricStore::make_simulator() const {
  if (nodes_.empty()) throw std::invalid_argument("the fabric declares no nodes");
  if (!links_) throw std::invalid_argument("the fabric declares no link matrix");
  std::vector<SimNode> sim_nodes;
  sim_nodes.reserve(nodes_.size());
  for (const auto& n : nodes_) sim_nodes.push_back(SimNode{n.name, n.hosted});
  return FabricSimulator(std::move(sim_nodes), *links_);
}

std::vector<std::set<VertexIndex>> FabricStore::hosted_vertex_sets() const {
  std::vector<std::set<VertexIndex>> out(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    for (const auto& name : nodes_[i].hosted) out[i].insert(*vertex_by_name(name));
  }
  return out;
}

}  // namespace fabric
