#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fabric/description.hpp"
#include "fabric/fedsim.hpp"
#include "fabric/governance.hpp"
#include "fabric/navigate.hpp"
#include "fabric/partition.hpp"
#include "fabric/schema.hpp"
#include "fabric/simulator.hpp"
#include "fabric/store.hpp"
#include "fabric/transform.hpp"

namespace {

using fabric::FabricStore;
using nlohmann::json;

constexpr int kOk = 0;
constexpr int kDomainError = 1;
constexpr int kInputError = 2;

// Canonical number text shared by both output modes (shortest round-trip
// representation, so structured and text output agree exactly).
std::string num_text(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return json(x).dump();
}

json num_json(double x) {
  if (std::isinf(x)) return json(x > 0 ? "inf" : "-inf");
  return json(x);
}

struct Output {
  bool structured = false;
  json doc = json::object();

  void emit_text(const std::string& line) const {
    if (!structured) std::cout << line << "\n";
  }
  void finish() const {
    if (structured) std::cout << doc.dump(2) << "\n";
  }
};

FabricStore load_store(const std::string& path) {
  if (path.empty()) throw fabric::DescriptionError("--fabric PATH is required");
  return fabric::load_fabric(path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw fabric::DescriptionError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fabric::Value parse_cell(const std::string& text) {
  try {
    std::size_t used = 0;
    const double num = std::stod(text, &used);
    if (used == text.size()) return num;
  } catch (const std::exception&) {
  }
  return text;
}

fabric::AttrValues parse_data_args(const std::vector<std::string>& pairs) {
  fabric::AttrValues out;
  for (const auto& p : pairs) {
    const auto eq = p.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw fabric::DescriptionError("--data expects key=value, got: " + p);
    }
    out[p.substr(0, eq)] = parse_cell(p.substr(eq + 1));
  }
  return out;
}

int run_validate(const FabricStore& store, Output& out) {
  const auto problems = store.validate();
  out.doc["violations"] = problems;
  if (problems.empty()) {
    out.emit_text("ok");
    return kOk;
  }
  for (const auto& p : problems) out.emit_text(p);
  return kDomainError;
}

int run_distance(const FabricStore& store, const std::string& left, const std::string& right,
                 Output& out) {
  const double d =
      schema_distance(store.dataset(left).schema, store.dataset(right).schema, store.similarity());
  out.doc["distance"] = d;
  out.emit_text(num_text(d));
  return kOk;
}

int run_match(const FabricStore& store, const std::string& left, const std::string& right,
              std::string method, Output& out) {
  const fabric::Schema& si = store.dataset(left).schema;
  const fabric::Schema& sj = store.dataset(right).schema;
  if (method == "auto") {
    method = si.attributes.size() <= sj.attributes.size() && si.attributes.size() <= 10
                 ? "exact"
                 : "greedy";
  }
  const fabric::AttributeMapping mapping =
      method == "exact" ? fabric::match_schemas_exact(si, sj, store.similarity())
                        : fabric::match_schemas_greedy(si, sj, store.similarity());
  out.doc["method"] = method;
  out.doc["score"] = mapping.score;
  json pairs = json::array();
  for (const auto& [a, b] : mapping.pairs) {
    pairs.push_back(json::array({a, b}));
    out.emit_text(a + " -> " + b);
  }
  out.doc["pairs"] = pairs;
  out.emit_text("score " + num_text(mapping.score));
  return kOk;
}

int run_integrate(FabricStore& store, const std::string& left, const std::string& right,
                  double lambda, double theta, Output& out) {
  const auto outcome = store.integrate_datasets(left, right, lambda, theta);
  const fabric::DiscreteDataset& unified = store.dataset(store.vertex_name(outcome.dataset_vertex));
  out.doc["name"] = unified.name;
  out.doc["transformation"] = store.transformations()[outcome.result.candidate_index].id;
  out.doc["distance"] = outcome.result.schema_distance;
  out.doc["objective"] = outcome.result.objective;
  out.doc["records"] = unified.records.size();
  json attrs = json::array();
  std::string attr_line = "attributes";
  for (const auto& a : unified.schema.attributes) {
    attrs.push_back(a.name);
    attr_line += " " + a.name;
  }
  out.doc["attributes"] = attrs;
  json pairs = json::array();
  for (const auto& [a, b] : outcome.result.mapping.pairs) pairs.push_back(json::array({a, b}));
  out.doc["mapping"] = pairs;
  out.emit_text("unified " + unified.name);
  out.emit_text("transformation " + store.transformations()[outcome.result.candidate_index].id);
  out.emit_text(attr_line);
  out.emit_text("records " + std::to_string(unified.records.size()));
  out.emit_text("distance " + num_text(outcome.result.schema_distance));
  out.emit_text("objective " + num_text(outcome.result.objective));
  return kOk;
}

int run_navigate(const FabricStore& store, const std::string& from, const std::string& to,
                 const std::string& weight, Output& out) {
  const auto vs = store.vertex_by_name(from);
  const auto vt = store.vertex_by_name(to);
  if (!vs) throw fabric::DescriptionError("unknown vertex: " + from);
  if (!vt) throw fabric::DescriptionError("unknown vertex: " + to);
  fabric::WeightFn w;
  if (weight == "unit") {
    w = fabric::unit_weight();
  } else {
    std::vector<std::string> labels;
    for (fabric::VertexIndex v = 0; v < store.graph().vertex_count(); ++v) {
      labels.push_back(store.vertex_name(v));
    }
    w = fabric::label_sim_weight(std::move(labels), store.similarity());
  }
  const auto path = fabric::shortest_path(store.graph(), *vs, *vt, w);
  if (!path) {
    out.doc["error"] = "no path";
    out.emit_text("no path");
    return kDomainError;
  }
  json vertices = json::array();
  std::string vline = "path";
  for (std::size_t i = 0; i < path->vertices.size(); ++i) {
    const std::string& name = store.vertex_name(path->vertices[i]);
    vertices.push_back(name);
    vline += (i == 0 ? " " : " -> ") + name;
  }
  json edges = json::array();
  std::string eline = "edges";
  for (std::size_t pos : path->edges) {
    edges.push_back(store.graph().edge(pos).id);
    eline += " " + store.graph().edge(pos).id;
  }
  out.doc["vertices"] = vertices;
  out.doc["edges"] = edges;
  out.doc["cost"] = path->cost;
  out.emit_text(vline);
  out.emit_text(eline);
  out.emit_text("cost " + num_text(path->cost));
  return kOk;
}

int run_trace(const FabricStore& store, const std::string& dataset, Output& out) {
  const auto ids = store.trace_dataset(dataset);
  json arr = json::array();
  std::string line = "trace";
  for (const auto& id : ids) {
    arr.push_back(id);
    line += " " + id;
  }
  out.doc["trace"] = arr;
  out.emit_text(line);
  return kOk;
}

fabric::PartitionInstance instance_from_store(const FabricStore& store, std::size_t parts) {
  fabric::PartitionInstance inst;
  inst.node_count = parts;
  const auto& g = store.graph();
  for (fabric::VertexIndex v = 0; v < g.vertex_count(); ++v) {
    if (g.vertex(v).kind == fabric::VertexKind::dataset) {
      inst.datasets.push_back(v);
      inst.costs.compute[v] =
          1.0 + static_cast<double>(store.dataset(store.vertex_name(v)).records.size());
    }
  }
  for (const auto& e : g.edges()) {
    std::vector<fabric::VertexIndex> touched;
    for (fabric::VertexIndex v : e.tail) {
      if (g.vertex(v).kind == fabric::VertexKind::dataset) touched.push_back(v);
    }
    for (fabric::VertexIndex v : e.head) {
      if (g.vertex(v).kind == fabric::VertexKind::dataset) touched.push_back(v);
    }
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    for (std::size_t i = 0; i < touched.size(); ++i) {
      for (std::size_t j = i + 1; j < touched.size(); ++j) {
        const double prev = inst.costs.comm_between(touched[i], touched[j]);
        inst.costs.set_comm(touched[i], touched[j], prev + e.weight);
      }
    }
  }
  return inst;
}

int run_partition(const FabricStore& store, std::size_t parts, const std::string& method,
                  std::optional<double> cap, std::uint64_t seed, Output& out) {
  if (parts == 0) {
    parts = store.nodes().size();
    if (parts == 0) throw fabric::DescriptionError("--parts is required when no nodes declared");
  }
  const auto inst = instance_from_store(store, parts);
  fabric::PartitionResult result = method == "brute"
                                       ? fabric::brute_force_partition(inst)
                                       : fabric::spectral_partition(store.graph(), inst, parts, seed);
  if (cap) {
    result.assignment = fabric::rebalance(inst, result.assignment, *cap);
    result.objective = fabric::objective(inst, result.assignment);
  }
  json assign = json::object();
  std::string line = "assignment";
  for (std::size_t i = 0; i < inst.datasets.size(); ++i) {
    const std::string& name = store.vertex_name(inst.datasets[i]);
    assign[name] = result.assignment[i];
    line += " " + name + "=" + std::to_string(result.assignment[i]);
  }
  out.doc["assignment"] = assign;
  out.doc["objective"] = result.objective;
  out.doc["method"] = method;
  out.emit_text(line);
  out.emit_text("objective " + num_text(result.objective));
  return kOk;
}

int run_policy_eval(const FabricStore& store, const fabric::UserContext& user,
                    const std::vector<std::string>& data_args, Output& out) {
  const auto data = parse_data_args(data_args);
  const auto decision = store.evaluate_access(data, user);
  out.doc["granted"] = decision.granted;
  out.doc["failing"] = decision.failing;
  if (decision.granted) {
    out.emit_text("granted");
    return kOk;
  }
  std::string line = "denied";
  for (const auto& id : decision.failing) line += " " + id;
  out.emit_text(line);
  return kDomainError;
}

int run_dp_aggregate(const FabricStore& store, const std::string& dataset, const std::string& attr,
                     double epsilon, double sensitivity, const std::string& kind,
                     std::uint64_t seed, Output& out) {
  const fabric::DiscreteDataset& d = store.dataset(dataset);
  const std::size_t pos = d.attribute_position(attr);
  std::vector<double> values;
  for (const auto& r : d.records) {
    if (const double* num = std::get_if<double>(&r[pos])) values.push_back(*num);
  }
  const auto kind_tag =
      kind == "mean" ? fabric::AggregateKind::mean : fabric::AggregateKind::sum;
  const auto result = fabric::dp_aggregate(values, epsilon, sensitivity, seed, kind_tag);
  out.doc["true"] = result.true_value;
  out.doc["noisy"] = result.noisy_value;
  out.doc["scale"] = result.scale;
  out.emit_text("true " + num_text(result.true_value));
  out.emit_text("noisy " + num_text(result.noisy_value));
  out.emit_text("scale " + num_text(result.scale));
  return kOk;
}

int run_fedsim(const std::string& shards_path, std::size_t rounds, double eta,
               std::size_t local_steps, Output& out) {
  json doc;
  try {
    doc = json::parse(read_file(shards_path));
  } catch (const json::parse_error& e) {
    throw fabric::DescriptionError(std::string("shard file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("shards") || !doc["shards"].is_array()) {
    throw fabric::DescriptionError("shard file needs a 'shards' array");
  }
  std::vector<fabric::Shard> shards;
  std::size_t width = 0;
  for (const auto& js : doc["shards"]) {
    fabric::Shard s;
    if (!js.is_object() || !js.contains("x") || !js.contains("y")) {
      throw fabric::DescriptionError("each shard needs 'x' and 'y'");
    }
    for (const auto& row : js["x"]) {
      std::vector<double> r;
      for (const auto& cell : row) {
        if (!cell.is_number()) throw fabric::DescriptionError("shard features must be numbers");
        r.push_back(cell.get<double>());
      }
      width = std::max(width, r.size());
      s.x.push_back(std::move(r));
    }
    for (const auto& cell : js["y"]) {
      if (!cell.is_number()) throw fabric::DescriptionError("shard targets must be numbers");
      s.y.push_back(cell.get<double>());
    }
    shards.push_back(std::move(s));
  }
  fabric::LinearModel init;
  if (doc.contains("init")) {
    for (const auto& cell : doc["init"]) {
      if (!cell.is_number()) throw fabric::DescriptionError("init weights must be numbers");
      init.theta.push_back(cell.get<double>());
    }
  } else {
    init.theta.assign(width + 1, 0.0);
  }
  const auto result = fabric::train(shards, init, rounds, local_steps, eta);
  json trace = json::array();
  for (std::size_t i = 0; i < result.loss_trace.size(); ++i) {
    trace.push_back(result.loss_trace[i]);
    out.emit_text("round " + std::to_string(i) + " loss " + num_text(result.loss_trace[i]));
  }
  json weights = json::array();
  std::string wline = "weights";
  for (double w : result.model.theta) {
    weights.push_back(w);
    wline += " " + num_text(w);
  }
  out.doc["trace"] = trace;
  out.doc["weights"] = weights;
  out.doc["diverged"] = result.diverged;
  out.emit_text(wline);
  out.emit_text(std::string("diverged ") + (result.diverged ? "1" : "0"));
  return result.diverged ? kDomainError : kOk;
}

int run_simulate(const FabricStore& store, const std::string& workload_path, Output& out) {
  auto sim = store.make_simulator();
  const auto ops = fabric::parse_workload(read_file(workload_path));
  const auto cal = fabric::run_workload(sim, ops);
  json log = json::array();
  for (const auto& line : sim.event_log()) {
    log.push_back(line);
    out.emit_text(line);
  }
  out.doc["log"] = log;
  out.doc["consistency"] = num_json(cal.consistency);
  out.doc["availability"] = num_json(cal.availability);
  out.doc["bound"] = num_json(cal.latency_bound);
  out.doc["pass"] = cal.pass();
  out.emit_text("consistency " + num_text(cal.consistency));
  out.emit_text("availability " + num_text(cal.availability));
  out.emit_text("bound " + num_text(cal.latency_bound));
  out.emit_text(std::string("cal ") + (cal.pass() ? "pass" : "fail"));
  return cal.pass() ? kOk : kDomainError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"data fabric toolkit"};
  app.fallthrough();
  app.require_subcommand(1);

  std::string fabric_path;
  std::uint64_t seed = 0;
  std::string output = "text";
  app.add_option("--fabric", fabric_path, "fabric description file");
  app.add_option("--seed", seed, "seed for randomized subcommands (default 0)");
  app.add_option("--output", output, "output mode")
      ->check(CLI::IsMember({"text", "structured"}));

  auto* cmd_validate = app.add_subcommand("validate", "check the fabric conditions");

  std::string left, right;
  auto* cmd_distance = app.add_subcommand("distance", "schema pseudo-metric between datasets");
  cmd_distance->add_option("--left", left)->required();
  cmd_distance->add_option("--right", right)->required();

  std::string match_method = "auto";
  auto* cmd_match = app.add_subcommand("match", "attribute alignment between datasets");
  cmd_match->add_option("--left", left)->required();
  cmd_match->add_option("--right", right)->required();
  cmd_match->add_option("--method", match_method)->check(CLI::IsMember({"auto", "exact", "greedy"}));

  double lambda = 0.1, theta = 0.5;
  auto* cmd_integrate = app.add_subcommand("integrate", "merge two datasets");
  cmd_integrate->add_option("--left", left)->required();
  cmd_integrate->add_option("--right", right)->required();
  cmd_integrate->add_option("--lambda", lambda, "cost weight");
  cmd_integrate->add_option("--theta", theta, "compatibility threshold");

  std::string nav_from, nav_to, nav_weight = "unit";
  auto* cmd_navigate = app.add_subcommand("navigate", "shortest hyperpath");
  cmd_navigate->add_option("--from", nav_from)->required();
  cmd_navigate->add_option("--to", nav_to)->required();
  cmd_navigate->add_option("--weight", nav_weight)->check(CLI::IsMember({"unit", "sim"}));

  std::string trace_dataset;
  auto* cmd_trace = app.add_subcommand("trace", "transformations behind a dataset");
  cmd_trace->add_option("--dataset", trace_dataset)->required();

  std::size_t parts = 0;
  std::string part_method = "spectral";
  double cap_value = 0.0;
  auto* cmd_partition = app.add_subcommand("partition", "place datasets on nodes");
  cmd_partition->add_option("--parts", parts, "node count (defaults to declared nodes)");
  cmd_partition->add_option("--method", part_method)->check(CLI::IsMember({"spectral", "brute"}));
  auto* cap_opt = cmd_partition->add_option("--cap", cap_value, "rebalance load cap");

  auto* cmd_policy = app.add_subcommand("policy", "governance operations");
  cmd_policy->require_subcommand(1);
  fabric::UserContext user;
  std::vector<std::string> data_args;
  auto* cmd_policy_eval = cmd_policy->add_subcommand("eval", "evaluate the policy conjunction");
  cmd_policy_eval->add_option("--user", user.id);
  cmd_policy_eval->add_option("--role", user.role);
  cmd_policy_eval->add_option("--clearance", user.clearance);
  cmd_policy_eval->add_option("--at", user.at);
  cmd_policy_eval->add_option("--data", data_args, "dataset attributes as key=value");

  std::string shards_path;
  std::size_t rounds = 50, local_steps = 1;
  double eta = 0.01;
  auto* cmd_fedsim = app.add_subcommand("fedsim", "federated averaging run");
  cmd_fedsim->add_option("--shards", shards_path, "shard spec file")->required();
  cmd_fedsim->add_option("--rounds", rounds);
  cmd_fedsim->add_option("--eta", eta);
  cmd_fedsim->add_option("--local-steps", local_steps);

  std::string workload_path;
  auto* cmd_simulate = app.add_subcommand("simulate", "replication simulator workload");
  cmd_simulate->add_option("--workload", workload_path, "workload script")->required();

  std::string dp_dataset, dp_attr, dp_kind = "sum";
  double epsilon = 1.0, sensitivity = 1.0;
  auto* cmd_dp = app.add_subcommand("dp-aggregate", "private aggregate of one attribute");
  cmd_dp->add_option("--dataset", dp_dataset)->required();
  cmd_dp->add_option("--attr", dp_attr)->required();
  cmd_dp->add_option("--epsilon", epsilon);
  cmd_dp->add_option("--sensitivity", sensitivity);
  cmd_dp->add_option("--kind", dp_kind)->check(CLI::IsMember({"sum", "mean"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  Output out;
  out.structured = output == "structured";
  int code = kOk;
  try {
    if (app.got_subcommand(cmd_fedsim)) {
      code = run_fedsim(shards_path, rounds, eta, local_steps, out);
    } else {
      FabricStore store = load_store(fabric_path);
      if (app.got_subcommand(cmd_validate)) {
        code = run_validate(store, out);
      } else if (app.got_subcommand(cmd_distance)) {
        code = run_distance(store, left, right, out);
      } else if (app.got_subcommand(cmd_match)) {
        code = run_match(store, left, right, match_method, out);
      } else if (app.got_subcommand(cmd_integrate)) {
        code = run_integrate(store, left, right, lambda, theta, out);
      } else if (app.got_subcommand(cmd_navigate)) {
        code = run_navigate(store, nav_from, nav_to, nav_weight, out);
      } else if (app.got_subcommand(cmd_trace)) {
        code = run_trace(store, trace_dataset, out);
      } else if (app.got_subcommand(cmd_partition)) {
        std::optional<double> cap;
        if (cap_opt->count() > 0) cap = cap_value;
        code = run_partition(store, parts, part_method, cap, seed, out);
      } else if (app.got_subcommand(cmd_policy)) {
        code = run_policy_eval(store, user, data_args, out);
      } else if (app.got_subcommand(cmd_simulate)) {
        code = run_simulate(store, workload_path, out);
      } else if (app.got_subcommand(cmd_dp)) {
        code = run_dp_aggregate(store, dp_dataset, dp_attr, epsilon, sensitivity, dp_kind, seed,
                                out);
      }
    }
  } catch (const fabric::DescriptionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const fabric::WorkloadParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const fabric::PredicateParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDomainError;
  }
  out.finish();
  return code;
}
