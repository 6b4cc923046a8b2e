#include "fabric/description.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fabric {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw DescriptionError(where + ": " + what);
}

const json& member(const json& obj, const std::string& where, const std::string& key) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(where, "missing field '" + key + "'");
  return *it;
}

std::string as_string(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected a string");
  return j.get<std::string>();
}

double as_number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) fail(where, "unknown field '" + key + "'");
  }
}

AttributeKind parse_kind(const std::string& word, const std::string& where) {
  if (word == "numeric") return AttributeKind::numeric;
  if (word == "categorical") return AttributeKind::categorical;
  if (word == "temporal") return AttributeKind::temporal;
  if (word == "text") return AttributeKind::text;
  fail(where, "unknown attribute kind '" + word + "'");
}

EdgeLabel parse_label(const std::string& word, const std::string& where) {
  if (word == "integration") return EdgeLabel::integration;
  if (word == "navigation") return EdgeLabel::navigation;
  if (word == "provenance") return EdgeLabel::provenance;
  if (word == "federated") return EdgeLabel::federated;
  fail(where, "unknown edge label '" + word + "'");
}

TransformKind parse_transform_kind(const std::string& word, const std::string& where) {
  if (word == "identity") return TransformKind::identity;
  if (word == "affineScale") return TransformKind::affineScale;
  if (word == "project") return TransformKind::project;
  if (word == "aggregateSum") return TransformKind::aggregateSum;
  if (word == "binMerge") return TransformKind::binMerge;
  if (word == "constant") return TransformKind::constant;
  fail(where, "unknown transformation kind '" + word + "'");
}

Value parse_value(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  fail(where, "cell values must be numbers or strings");
}

void load_datasets(FabricStore& store, const json& section) {
  if (!section.is_array()) fail("datasets", "expected an array");
  for (std::size_t i = 0; i < section.size(); ++i) {
    const std::string where = "datasets[" + std::to_string(i) + "]";
    const json& jd = section[i];
    if (!jd.is_object()) fail(where, "expected an object");
    check_keys(jd, where, {"name", "domain", "attributes", "records", "binning"});
    DiscreteDataset d;
    d.name = as_string(member(jd, where, "name"), where + ".name");
    d.domain = as_string(member(jd, where, "domain"), where + ".domain");
    d.schema.name = d.name;
    const json& attrs = member(jd, where, "attributes");
    if (!attrs.is_array()) fail(where + ".attributes", "expected an array");
    for (std::size_t a = 0; a < attrs.size(); ++a) {
      const std::string awhere = where + ".attributes[" + std::to_string(a) + "]";
      if (!attrs[a].is_object()) fail(awhere, "expected an object");
      check_keys(attrs[a], awhere, {"name", "kind"});
      Attribute attr;
      attr.name = as_string(member(attrs[a], awhere, "name"), awhere + ".name");
      attr.kind = parse_kind(as_string(member(attrs[a], awhere, "kind"), awhere + ".kind"),
                             awhere + ".kind");
      d.schema.attributes.push_back(std::move(attr));
    }
    if (jd.contains("records")) {
      const json& recs = jd["records"];
      if (!recs.is_array()) fail(where + ".records", "expected an array");
      for (std::size_t r = 0; r < recs.size(); ++r) {
        const std::string rwhere = where + ".records[" + std::to_string(r) + "]";
        if (!recs[r].is_array()) fail(rwhere, "expected an array");
        Record rec;
        for (std::size_t c = 0; c < recs[r].size(); ++c) {
          rec.push_back(parse_value(recs[r][c], rwhere + "[" + std::to_string(c) + "]"));
        }
        d.records.push_back(std::move(rec));
      }
    }
    if (jd.contains("binning")) {
      const json& bins = jd["binning"];
      if (!bins.is_object()) fail(where + ".binning", "expected an object");
      for (const auto& [attr, edges] : bins.items()) {
        const std::string bwhere = where + ".binning." + attr;
        if (!edges.is_array()) fail(bwhere, "expected an array of bin edges");
        Binning b;
        for (std::size_t k = 0; k < edges.size(); ++k) {
          b.edges.push_back(as_number(edges[k], bwhere + "[" + std::to_string(k) + "]"));
        }
        d.binning[attr] = std::move(b);
      }
    }
    try {
      store.add_dataset(std::move(d));
    } catch (const std::exception& e) {
      fail(where, e.what());
    }
  }
}

void load_transformations(FabricStore& store, const json& section) {
  if (!section.is_array()) fail("transformations", "expected an array");
  for (std::size_t i = 0; i < section.size(); ++i) {
    const std::string where = "transformations[" + std::to_string(i) + "]";
    const json& jt = section[i];
    if (!jt.is_object()) fail(where, "expected an object");
    check_keys(jt, where, {"id", "source", "target", "kind", "attr", "scale", "offset", "rename",
                           "keep", "factor", "fill"});
    Transformation t;
    t.id = as_string(member(jt, where, "id"), where + ".id");
    t.source_domain = as_string(member(jt, where, "source"), where + ".source");
    t.target_domain = as_string(member(jt, where, "target"), where + ".target");
    TransformStep step;
    step.kind = parse_transform_kind(as_string(member(jt, where, "kind"), where + ".kind"),
                                     where + ".kind");
    if (jt.contains("attr")) step.attr = as_string(jt["attr"], where + ".attr");
    if (jt.contains("scale")) step.scale = as_number(jt["scale"], where + ".scale");
    if (jt.contains("offset")) step.offset = as_number(jt["offset"], where + ".offset");
    if (jt.contains("rename")) step.rename_to = as_string(jt["rename"], where + ".rename");
    if (jt.contains("keep")) {
      const json& keep = jt["keep"];
      if (!keep.is_array()) fail(where + ".keep", "expected an array");
      for (std::size_t k = 0; k < keep.size(); ++k) {
        step.keep.push_back(as_string(keep[k], where + ".keep[" + std::to_string(k) + "]"));
      }
    }
    if (jt.contains("factor")) {
      const double f = as_number(jt["factor"], where + ".factor");
      if (f < 1.0 || f != static_cast<double>(static_cast<std::size_t>(f))) {
        fail(where + ".factor", "expected a positive integer");
      }
      step.merge_factor = static_cast<std::size_t>(f);
    }
    if (jt.contains("fill")) step.fill_value = as_number(jt["fill"], where + ".fill");
    t.cost_class = step.kind == TransformKind::aggregateSum || step.kind == TransformKind::binMerge
                       ? CostClass::quadratic
                       : CostClass::linear;
    t.steps.push_back(std::move(step));
    try {
      store.register_transformation(std::move(t));
    } catch (const std::exception& e) {
      fail(where, e.what());
    }
  }
}

void load_metadata(FabricStore& store, const json& section) {
  if (!section.is_array()) fail("metadata", "expected an array");
  for (std::size_t i = 0; i < section.size(); ++i) {
    const std::string where = "metadata[" + std::to_string(i) + "]";
    const json& jm = section[i];
    if (!jm.is_object()) fail(where, "expected an object");
    check_keys(jm, where, {"id", "subject", "attrs", "history"});
    MetadataRecord m;
    m.id = as_string(member(jm, where, "id"), where + ".id");
    if (jm.contains("subject")) {
      const std::string subject = as_string(jm["subject"], where + ".subject");
      const auto v = store.vertex_by_name(subject);
      if (!v) fail(where + ".subject", "unknown dataset '" + subject + "'");
      m.subject = *v;
    }
    if (jm.contains("attrs")) {
      const json& attrs = jm["attrs"];
      if (!attrs.is_object()) fail(where + ".attrs", "expected an object");
      for (const auto& [key, value] : attrs.items()) {
        m.attrs[key] = parse_value(value, where + ".attrs." + key);
      }
    }
    if (jm.contains("history")) {
      const json& hist = jm["history"];
      if (!hist.is_array()) fail(where + ".history", "expected an array");
      for (std::size_t h = 0; h < hist.size(); ++h) {
        const std::string hwhere = where + ".history[" + std::to_string(h) + "]";
        if (!hist[h].is_array() || hist[h].size() != 2) {
          fail(hwhere, "expected a [transformation, time] pair");
        }
        HistoryEntry entry;
        entry.transform_id = as_string(hist[h][0], hwhere + "[0]");
        entry.at = as_number(hist[h][1], hwhere + "[1]");
        m.history.push_back(std::move(entry));
      }
    }
    try {
      store.add_metadata(std::move(m));
    } catch (const std::exception& e) {
      fail(where, e.what());
    }
  }
}

void load_hyperedges(FabricStore& store, const json& section) {
  if (!section.is_array()) fail("hyperedges", "expected an array");
  for (std::size_t i = 0; i < section.size(); ++i) {
    const std::string where = "hyperedges[" + std::to_string(i) + "]";
    const json& je = section[i];
    if (!je.is_object()) fail(where, "expected an object");
    check_keys(je, where, {"id", "tail", "head", "label", "weight"});
    const std::string id = as_string(member(je, where, "id"), where + ".id");
    auto names = [&](const char* key) {
      const json& arr = member(je, where, key);
      if (!arr.is_array()) fail(where + "." + key, "expected an array");
      std::vector<std::string> out;
      for (std::size_t k = 0; k < arr.size(); ++k) {
        out.push_back(as_string(arr[k], where + "." + key + "[" + std::to_string(k) + "]"));
      }
      return out;
    };
    const EdgeLabel label =
        parse_label(as_string(member(je, where, "label"), where + ".label"), where + ".label");
    const double weight = je.contains("weight") ? as_number(je["weight"], where + ".weight") : 1.0;
    try {
      store.add_hyperedge(id, names("tail"), names("head"), label, weight);
    } catch (const std::exception& e) {
      fail(where, e.what());
    }
  }
}

void load_policies(FabricStore& store, const json& section) {
  if (!section.is_array()) fail("policies", "expected an array");
  for (std::size_t i = 0; i < section.size(); ++i) {
    const std::string where = "policies[" + std::to_string(i) + "]";
    const json& jp = section[i];
    if (!jp.is_object()) fail(where, "expected an object");
    check_keys(jp, where, {"id", "predicate"});
    const std::string id = as_string(member(jp, where, "id"), where + ".id");
    const std::string text = as_string(member(jp, where, "predicate"), where + ".predicate");
    Policy p;
    try {
      p = Policy::parse(id, text);
    } catch (const PredicateParseError&) {
      // Loadable but invalid; validate() reports it under compliance.
      p.id = id;
      p.text = text;
    }
    try {
      store.add_policy(std::move(p));
    } catch (const std::exception& e) {
      fail(where, e.what());
    }
  }
}

void load_similarity(FabricStore& store, const json& section) {
  const std::string where = "similarity";
  if (!section.is_object()) fail(where, "expected an object");
  check_keys(section, where, {"default_sim", "default_weight", "pairs"});
  const double ds =
      section.contains("default_sim") ? as_number(section["default_sim"], where + ".default_sim") : 0.0;
  const double dw = section.contains("default_weight")
                        ? as_number(section["default_weight"], where + ".default_weight")
                        : 1.0;
  SimilarityTable table(ds, dw);
  if (section.contains("pairs")) {
    const json& pairs = section["pairs"];
    if (!pairs.is_array()) fail(where + ".pairs", "expected an array");
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const std::string pwhere = where + ".pairs[" + std::to_string(i) + "]";
      if (!pairs[i].is_object()) fail(pwhere, "expected an object");
      check_keys(pairs[i], pwhere, {"a", "b", "sim", "weight"});
      const std::string a = as_string(member(pairs[i], pwhere, "a"), pwhere + ".a");
      const std::string b = as_string(member(pairs[i], pwhere, "b"), pwhere + ".b");
      const double sim = as_number(member(pairs[i], pwhere, "sim"), pwhere + ".sim");
      std::optional<double> weight;
      if (pairs[i].contains("weight")) weight = as_number(pairs[i]["weight"], pwhere + ".weight");
      try {
        table.set(a, b, sim, weight);
      } catch (const std::exception& e) {
        fail(pwhere, e.what());
      }
    }
  }
  store.set_similarity(std::move(table));
}

void load_nodes(FabricStore& store, const json& section) {
  if (!section.is_array()) fail("nodes", "expected an array");
  for (std::size_t i = 0; i < section.size(); ++i) {
    const std::string where = "nodes[" + std::to_string(i) + "]";
    const json& jn = section[i];
    if (!jn.is_object()) fail(where, "expected an object");
    check_keys(jn, where, {"name", "hosted"});
    StoreNode node;
    node.name = as_string(member(jn, where, "name"), where + ".name");
    if (jn.contains("hosted")) {
      const json& hosted = jn["hosted"];
      if (!hosted.is_array()) fail(where + ".hosted", "expected an array");
      for (std::size_t k = 0; k < hosted.size(); ++k) {
        node.hosted.insert(as_string(hosted[k], where + ".hosted[" + std::to_string(k) + "]"));
      }
    }
    try {
      store.add_node(std::move(node));
    } catch (const std::exception& e) {
      fail(where, e.what());
    }
  }
}

void load_links(FabricStore& store, const json& section) {
  if (!section.is_array()) fail("links", "expected an array");
  LinkMatrix links = LinkMatrix::disconnected(store.nodes().size());
  auto node_index = [&](const std::string& name, const std::string& where) -> std::size_t {
    for (std::size_t i = 0; i < store.nodes().size(); ++i) {
      if (store.nodes()[i].name == name) return i;
    }
    fail(where, "unknown node '" + name + "'");
  };
  for (std::size_t i = 0; i < section.size(); ++i) {
    const std::string where = "links[" + std::to_string(i) + "]";
    const json& jl = section[i];
    if (!jl.is_object()) fail(where, "expected an object");
    check_keys(jl, where, {"a", "b", "weight"});
    const std::size_t a = node_index(as_string(member(jl, where, "a"), where + ".a"), where + ".a");
    const std::size_t b = node_index(as_string(member(jl, where, "b"), where + ".b"), where + ".b");
    const double w = as_number(member(jl, where, "weight"), where + ".weight");
    try {
      links.connect(a, b, w);
    } catch (const std::exception& e) {
      fail(where, e.what());
    }
  }
  try {
    store.set_links(std::move(links));
  } catch (const std::exception& e) {
    fail("links", e.what());
  }
}

}  // namespace

FabricStore parse_fabric(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DescriptionError(std::string("fabric file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw DescriptionError("fabric file must be a JSON object");
  check_keys(doc, "fabric", {"datasets", "transformations", "metadata", "hyperedges", "policies",
                             "similarity", "nodes", "links", "options"});

  FabricStore store;
  if (doc.contains("datasets")) load_datasets(store, doc["datasets"]);
  if (doc.contains("transformations")) load_transformations(store, doc["transformations"]);
  if (doc.contains("metadata")) load_metadata(store, doc["metadata"]);
  if (doc.contains("hyperedges")) load_hyperedges(store, doc["hyperedges"]);
  if (doc.contains("policies")) load_policies(store, doc["policies"]);
  if (doc.contains("similarity")) load_similarity(store, doc["similarity"]);
  if (doc.contains("nodes")) load_nodes(store, doc["nodes"]);
  if (doc.contains("links")) load_links(store, doc["links"]);
  if (doc.contains("options")) {
    const json& opts = doc["options"];
    if (!opts.is_object()) throw DescriptionError("options: expected an object");
    check_keys(opts, "options", {"strict_connectivity"});
    if (opts.contains("strict_connectivity")) {
      if (!opts["strict_connectivity"].is_boolean()) {
        throw DescriptionError("options.strict_connectivity: expected a boolean");
      }
      store.set_strict_connectivity(opts["strict_connectivity"].get<bool>());
    }
  }
  return store;
}

FabricStore load_fabric(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DescriptionError("cannot open fabric file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_fabric(buf.str());
}

}  // namespace fabric
