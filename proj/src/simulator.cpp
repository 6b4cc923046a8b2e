#include "fabric/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <sstream>
#include <stdexcept>

namespace fabric {
namespace {

std::string fmt_num(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  double r = std::llround(x);
  if (std::fabs(x) < 4e18 && std::fabs(x - r) < 1e-12) {
    return std::to_string(std::llround(x));
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

std::string mode_name(ReplicationMode m) {
  return m == ReplicationMode::sync_all ? "sync" : "async";
}

}  // namespace

LinkMatrix LinkMatrix::disconnected(std::size_t n) {
  LinkMatrix m;
  m.weight.assign(n, std::vector<double>(n, kNoLink));
  for (std::size_t i = 0; i < n; ++i) m.weight[i][i] = 0.0;
  return m;
}

void LinkMatrix::connect(std::size_t a, std::size_t b, double w) {
  if (a >= size() || b >= size()) throw std::invalid_argument("link endpoint out of range");
  if (a == b) throw std::invalid_argument("self links are fixed at zero");
  if (!(w >= 0.0)) throw std::invalid_argument("link weight must be nonnegative");
  weight[a][b] = w;
  weight[b][a] = w;
}

void LinkMatrix::validate() const {
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    if (weight[i].size() != n) throw std::invalid_argument("link matrix is not square");
    if (weight[i][i] != 0.0) throw std::invalid_argument("link matrix diagonal must be zero");
    for (std::size_t j = 0; j < n; ++j) {
      const double w = weight[i][j];
      if (std::isnan(w) || w < 0.0) throw std::invalid_argument("link weights must be nonnegative");
      if (w != weight[j][i]) throw std::invalid_argument("link matrix must be symmetric");
    }
  }
}

std::vector<std::vector<double>> all_pairs_shortest(const LinkMatrix& links) {
  links.validate();
  auto d = links.weight;
  const std::size_t n = d.size();
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (std::isinf(d[i][k])) continue;
      for (std::size_t j = 0; j < n; ++j) {
        const double via = d[i][k] + d[k][j];
        if (via < d[i][j]) d[i][j] = via;
      }
    }
  }
  return d;
}

FabricSimulator::FabricSimulator(std::vector<SimNode> nodes, LinkMatrix links)
    : nodes_(std::move(nodes)), links_(std::move(links)) {
  links_.validate();
  if (links_.size() != nodes_.size()) {
    throw std::invalid_argument("link matrix size must match node count");
  }
  std::set<std::string> seen;
  for (const auto& n : nodes_) {
    if (n.name.empty()) throw std::invalid_argument("node names must be nonempty");
    if (!seen.insert(n.name).second) throw std::invalid_argument("duplicate node name: " + n.name);
  }
  replicas_.resize(nodes_.size());
  group_of_.assign(nodes_.size(), 0);
}

std::optional<std::size_t> FabricSimulator::node_by_name(const std::string& name) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].name == name) return i;
  }
  return std::nullopt;
}

void FabricSimulator::set_latency_bound(double bound) {
  if (std::isnan(bound) || bound < 0.0) {
    throw std::invalid_argument("latency bound must be nonnegative");
  }
  cal_.latency_bound = bound;
}

bool FabricSimulator::same_group(std::size_t a, std::size_t b) const {
  return group_of_[a] == group_of_[b];
}

std::vector<std::vector<double>> FabricSimulator::effective_distances() const {
  LinkMatrix cut = links_;
  const std::size_t n = cut.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && !same_group(i, j)) cut.weight[i][j] = kNoLink;
    }
  }
  return all_pairs_shortest(cut);
}

std::vector<std::size_t> FabricSimulator::hosts_of(const std::string& key) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].hosted.count(key)) out.push_back(i);
  }
  return out;
}

void FabricSimulator::apply_delivery(const Delivery& d) {
  auto& slot = replicas_[d.node][d.key];
  if (slot.at < 0.0 || d.payload.newer_than(slot)) slot = d.payload;
}

void FabricSimulator::write(const std::string& node, const std::string& key,
                            const std::string& value, std::optional<ReplicationMode> mode) {
  const auto origin = node_by_name(node);
  if (!origin) throw std::invalid_argument("unknown node: " + node);
  const auto hosts = hosts_of(key);
  if (hosts.empty()) throw std::invalid_argument("no node hosts key: " + key);
  const ReplicationMode m = mode.value_or(default_mode_);

  Versioned stamp{value, static_cast<double>(now_), *origin};
  auto it = latest_.find(key);
  if (it == latest_.end() || stamp.newer_than(it->second.first)) {
    latest_[key] = {stamp, static_cast<double>(now_)};
  }

  const bool local = nodes_[*origin].hosted.count(key) > 0;
  if (local) {
    apply_delivery(Delivery{static_cast<double>(now_), 0, *origin, key, stamp});
  }

  const auto dist = effective_distances();
  std::size_t replicated = local ? 1 : 0;
  std::size_t skipped = 0;
  double delay = 0.0;

  if (m == ReplicationMode::sync_all) {
    for (std::size_t h : hosts) {
      if (h == *origin) continue;
      const double d = dist[*origin][h];
      if (std::isinf(d)) {
        ++skipped;
        continue;
      }
      pending_.push_back(Delivery{now_ + d, seq_++, h, key, stamp});
      delay = std::max(delay, d);
      ++replicated;
    }
    cal_.availability = std::max(cal_.availability, delay);
  } else {
    // Fire-and-forget: the write is acknowledged locally and spreads through
    // gossip.  A writer that does not host the key seeds the nearest replica.
    if (!local) {
      std::size_t best = nodes_.size();
      double bd = kNoLink;
      for (std::size_t h : hosts) {
        if (dist[*origin][h] < bd) {
          bd = dist[*origin][h];
          best = h;
        }
      }
      if (best < nodes_.size()) {
        pending_.push_back(Delivery{now_ + bd, seq_++, best, key, stamp});
        ++replicated;
      } else {
        ++skipped;
      }
    }
  }
  std::sort(pending_.begin(), pending_.end());

  char buf[256];
  std::snprintf(buf, sizeof(buf), "t=%lld write node=%s key=%s value=%s mode=%s delay=%s replicas=%zu skipped=%zu",
                now_, node.c_str(), key.c_str(), value.c_str(), mode_name(m).c_str(),
                fmt_num(delay).c_str(), replicated, skipped);
  log_line(buf);
}

void FabricSimulator::read(const std::string& node, const std::string& key) {
  const auto origin = node_by_name(node);
  if (!origin) throw std::invalid_argument("unknown node: " + node);
  const auto hosts = hosts_of(key);
  if (hosts.empty()) throw std::invalid_argument("no node hosts key: " + key);

  const auto dist = effective_distances();
  std::size_t source = nodes_.size();
  double delay = kNoLink;
  if (nodes_[*origin].hosted.count(key)) {
    source = *origin;
    delay = 0.0;
  } else {
    for (std::size_t h : hosts) {
      if (dist[*origin][h] < delay) {
        delay = dist[*origin][h];
        source = h;
      }
    }
  }

  char buf[256];
  if (source == nodes_.size()) {
    cal_.availability = std::numeric_limits<double>::infinity();
    std::snprintf(buf, sizeof(buf), "t=%lld read node=%s key=%s unavailable", now_, node.c_str(),
                  key.c_str());
    log_line(buf);
    return;
  }

  cal_.availability = std::max(cal_.availability, delay);
  const auto& store = replicas_[source];
  const auto rit = store.find(key);
  const auto lit = latest_.find(key);
  bool stale = false;
  if (lit != latest_.end()) {
    if (rit == store.end() || lit->second.first.newer_than(rit->second)) {
      stale = true;
      cal_.consistency = std::max(cal_.consistency, now_ - lit->second.second);
    }
  }
  const std::string value = rit == store.end() ? "-" : rit->second.value;
  std::snprintf(buf, sizeof(buf), "t=%lld read node=%s key=%s value=%s stale=%d delay=%s",
                now_, node.c_str(), key.c_str(), value.c_str(), stale ? 1 : 0,
                fmt_num(delay).c_str());
  log_line(buf);
}

void FabricSimulator::gossip_round(long long tick) {
  const std::size_t n = nodes_.size();
  if (n < 2) return;
  const auto dist = effective_distances();
  const std::size_t off = 1 + static_cast<std::size_t>((tick - 1) % static_cast<long long>(n - 1));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t peer = (i + off) % n;
    if (peer == i || !same_group(i, peer)) continue;
    if (std::isinf(dist[i][peer])) continue;
    std::size_t updates = 0;
    for (const auto& key : nodes_[i].hosted) {
      if (!nodes_[peer].hosted.count(key)) continue;
      auto a = replicas_[i].find(key);
      auto b = replicas_[peer].find(key);
      const bool ha = a != replicas_[i].end();
      const bool hb = b != replicas_[peer].end();
      if (ha && (!hb || a->second.newer_than(b->second))) {
        replicas_[peer][key] = a->second;
        ++updates;
      } else if (hb && (!ha || b->second.newer_than(a->second))) {
        replicas_[i][key] = b->second;
        ++updates;
      }
    }
    if (updates > 0) {
      char buf[192];
      std::snprintf(buf, sizeof(buf), "t=%lld gossip %s<->%s updates=%zu", now_,
                    nodes_[i].name.c_str(), nodes_[peer].name.c_str(), updates);
      log_line(buf);
    }
  }
}

void FabricSimulator::advance(long long ticks) {
  if (ticks < 0) throw std::invalid_argument("cannot advance by a negative tick count");
  for (long long t = 0; t < ticks; ++t) {
    ++now_;
    std::size_t done = 0;
    for (; done < pending_.size() && pending_[done].at <= static_cast<double>(now_); ++done) {
      apply_delivery(pending_[done]);
    }
    pending_.erase(pending_.begin(), pending_.begin() + static_cast<std::ptrdiff_t>(done));
    if (default_mode_ == ReplicationMode::async_gossip) gossip_round(now_);
  }
}

void FabricSimulator::partition(const std::vector<std::vector<std::string>>& groups) {
  if (groups.empty()) throw std::invalid_argument("partition needs at least one group");
  std::vector<std::size_t> assign(nodes_.size(), nodes_.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].empty()) throw std::invalid_argument("partition groups must be nonempty");
    for (const auto& name : groups[g]) {
      const auto idx = node_by_name(name);
      if (!idx) throw std::invalid_argument("unknown node in partition: " + name);
      if (assign[*idx] != nodes_.size()) {
        throw std::invalid_argument("node appears in two partition groups: " + name);
      }
      assign[*idx] = g;
    }
  }
  for (std::size_t i = 0; i < assign.size(); ++i) {
    if (assign[i] == nodes_.size()) {
      throw std::invalid_argument("partition must cover every node; missing " + nodes_[i].name);
    }
  }
  // Any deliveries still in flight across the new cut are lost.
  std::vector<Delivery> kept;
  for (const auto& d : pending_) {
    if (assign[d.payload.origin] == assign[d.node]) kept.push_back(d);
  }
  pending_ = std::move(kept);
  group_of_ = std::move(assign);
  partitioned_ = groups.size() > 1;

  std::string desc;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (g) desc += "|";
    for (std::size_t i = 0; i < groups[g].size(); ++i) {
      if (i) desc += ",";
      desc += groups[g][i];
    }
  }
  log_line("t=" + std::to_string(now_) + " partition groups=" + desc);
}

void FabricSimulator::heal() {
  std::fill(group_of_.begin(), group_of_.end(), 0);
  partitioned_ = false;
  log_line("t=" + std::to_string(now_) + " heal");
}

bool FabricSimulator::converged() const {
  if (!pending_.empty()) return false;
  std::set<std::string> keys;
  for (const auto& n : nodes_) keys.insert(n.hosted.begin(), n.hosted.end());
  for (const auto& key : keys) {
    const Versioned* first = nullptr;
    bool any = false;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (!nodes_[i].hosted.count(key)) continue;
      const auto it = replicas_[i].find(key);
      if (it != replicas_[i].end()) any = true;
    }
    if (!any) continue;  // never written
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (!nodes_[i].hosted.count(key)) continue;
      const auto it = replicas_[i].find(key);
      if (it == replicas_[i].end()) return false;
      if (!first) {
        first = &it->second;
      } else if (first->at != it->second.at || first->origin != it->second.origin) {
        return false;
      }
    }
  }
  return true;
}

std::size_t FabricSimulator::converge_eventual() {
  if (partitioned_) {
    throw std::runtime_error("cannot converge while a partition is active");
  }
  const std::size_t cap = 16 * std::max<std::size_t>(nodes_.size(), 1) + 64;
  std::size_t rounds = 0;
  while (!converged()) {
    if (rounds >= cap) throw std::runtime_error("replicas failed to converge");
    ++now_;
    std::size_t done = 0;
    for (; done < pending_.size() && pending_[done].at <= static_cast<double>(now_); ++done) {
      apply_delivery(pending_[done]);
    }
    pending_.erase(pending_.begin(), pending_.begin() + static_cast<std::ptrdiff_t>(done));
    gossip_round(now_);
    ++rounds;
  }
  log_line("t=" + std::to_string(now_) + " converged rounds=" + std::to_string(rounds));
  return rounds;
}

std::optional<Versioned> FabricSimulator::replica(std::size_t node, const std::string& key) const {
  const auto it = replicas_.at(node).find(key);
  if (it == replicas_.at(node).end()) return std::nullopt;
  return it->second;
}

std::size_t FabricSimulator::hop_diameter() const {
  const std::size_t n = nodes_.size();
  std::size_t best = 0;
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<std::size_t> hops(n, static_cast<std::size_t>(-1));
    std::deque<std::size_t> queue{s};
    hops[s] = 0;
    while (!queue.empty()) {
      const std::size_t u = queue.front();
      queue.pop_front();
      for (std::size_t v = 0; v < n; ++v) {
        if (v == u || std::isinf(links_.weight[u][v])) continue;
        if (hops[v] == static_cast<std::size_t>(-1)) {
          hops[v] = hops[u] + 1;
          queue.push_back(v);
        }
      }
    }
    for (std::size_t v = 0; v < n; ++v) {
      if (hops[v] != static_cast<std::size_t>(-1)) best = std::max(best, hops[v]);
    }
  }
  return best;
}

// ---- workload scripts ---------------------------------------------------

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

ReplicationMode parse_mode(const std::string& word, std::size_t line) {
  if (word == "sync") return ReplicationMode::sync_all;
  if (word == "async") return ReplicationMode::async_gossip;
  throw WorkloadParseError("unknown replication mode: " + word, line);
}

}  // namespace

std::vector<WorkloadOp> parse_workload(const std::string& text) {
  std::vector<WorkloadOp> ops;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto words = split_ws(line);
    if (words.empty()) continue;
    WorkloadOp op;
    const std::string& cmd = words[0];
    if (cmd == "write") {
      if (words.size() != 4 && words.size() != 5) {
        throw WorkloadParseError("write expects: write <node> <key> <value> [sync|async]", lineno);
      }
      op.kind = WorkloadOp::Kind::write;
      op.node = words[1];
      op.key = words[2];
      op.value = words[3];
      if (words.size() == 5) op.mode = parse_mode(words[4], lineno);
    } else if (cmd == "read") {
      if (words.size() != 3) throw WorkloadParseError("read expects: read <node> <key>", lineno);
      op.kind = WorkloadOp::Kind::read;
      op.node = words[1];
      op.key = words[2];
    } else if (cmd == "advance") {
      if (words.size() != 2) throw WorkloadParseError("advance expects: advance <ticks>", lineno);
      op.kind = WorkloadOp::Kind::advance;
      try {
        op.ticks = std::stoll(words[1]);
      } catch (const std::exception&) {
        throw WorkloadParseError("advance needs an integer tick count", lineno);
      }
      if (op.ticks < 0) throw WorkloadParseError("advance needs a nonnegative tick count", lineno);
    } else if (cmd == "partition") {
      if (words.size() != 2) {
        throw WorkloadParseError("partition expects: partition a,b|c,d", lineno);
      }
      op.kind = WorkloadOp::Kind::partition;
      std::string group;
      std::istringstream gs(words[1]);
      while (std::getline(gs, group, '|')) {
        std::vector<std::string> names;
        std::string name;
        std::istringstream ns(group);
        while (std::getline(ns, name, ',')) {
          if (!name.empty()) names.push_back(name);
        }
        if (names.empty()) throw WorkloadParseError("empty partition group", lineno);
        op.groups.push_back(std::move(names));
      }
      if (op.groups.empty()) throw WorkloadParseError("empty partition spec", lineno);
    } else if (cmd == "heal") {
      if (words.size() != 1) throw WorkloadParseError("heal takes no arguments", lineno);
      op.kind = WorkloadOp::Kind::heal;
    } else if (cmd == "converge") {
      if (words.size() != 1) throw WorkloadParseError("converge takes no arguments", lineno);
      op.kind = WorkloadOp::Kind::converge;
    } else if (cmd == "bound") {
      if (words.size() != 2) throw WorkloadParseError("bound expects: bound <latency>", lineno);
      op.kind = WorkloadOp::Kind::bound;
      try {
        op.bound = std::stod(words[1]);
      } catch (const std::exception&) {
        throw WorkloadParseError("bound needs a number", lineno);
      }
    } else if (cmd == "mode") {
      if (words.size() != 2) throw WorkloadParseError("mode expects: mode sync|async", lineno);
      op.kind = WorkloadOp::Kind::mode;
      op.mode = parse_mode(words[1], lineno);
    } else {
      throw WorkloadParseError("unknown command: " + cmd, lineno);
    }
    ops.push_back(std::move(op));
  }
  return ops;
}

CalMeasurement run_workload(FabricSimulator& sim, const std::vector<WorkloadOp>& ops) {
  for (const auto& op : ops) {
    switch (op.kind) {
      case WorkloadOp::Kind::write:
        sim.write(op.node, op.key, op.value, op.mode);
        break;
      case WorkloadOp::Kind::read:
        sim.read(op.node, op.key);
        break;
      case WorkloadOp::Kind::advance:
        sim.advance(op.ticks);
        break;
      case WorkloadOp::Kind::partition:
        sim.partition(op.groups);
        break;
      case WorkloadOp::Kind::heal:
        sim.heal();
        break;
      case WorkloadOp::Kind::converge:
        sim.converge_eventual();
        break;
      case WorkloadOp::Kind::bound:
        sim.set_latency_bound(op.bound);
        break;
      case WorkloadOp::Kind::mode:
        sim.set_default_mode(*op.mode);
        break;
    }
  }
  return sim.measurement();
}

// ---- structural fault tolerance ------------------------------------------

namespace {

bool resolvable(const Hypergraph& g, VertexIndex from, VertexIndex to,
                const std::vector<bool>& alive) {
  if (!alive[from] || !alive[to]) return false;
  std::vector<bool> seen(g.vertex_count(), false);
  std::deque<VertexIndex> queue{from};
  seen[from] = true;
  while (!queue.empty()) {
    const VertexIndex u = queue.front();
    queue.pop_front();
    if (u == to) return true;
    for (std::size_t e : g.adjacency(u).out_edges) {
      const auto& edge = g.edge(e);
      bool ok = true;
      for (VertexIndex v : edge.tail) ok = ok && alive[v];
      for (VertexIndex v : edge.head) ok = ok && alive[v];
      if (!ok) continue;
      for (VertexIndex v : edge.head) {
        if (!seen[v]) {
          seen[v] = true;
          queue.push_back(v);
        }
      }
    }
  }
  return false;
}

}  // namespace

FaultCheckReport fault_check(const Hypergraph& g,
                             const std::vector<std::set<VertexIndex>>& hosted_per_node,
                             const std::set<std::size_t>& failed_nodes) {
  for (std::size_t n : failed_nodes) {
    if (n >= hosted_per_node.size()) throw std::invalid_argument("failed node index out of range");
  }
  const std::size_t vn = g.vertex_count();
  std::vector<bool> hosted_pre(vn, false), hosted_post(vn, false);
  for (std::size_t n = 0; n < hosted_per_node.size(); ++n) {
    for (VertexIndex v : hosted_per_node[n]) {
      if (v >= vn) throw std::invalid_argument("hosted vertex out of range");
      hosted_pre[v] = true;
      if (!failed_nodes.count(n)) hosted_post[v] = true;
    }
  }

  // A dataset vertex is alive while at least one surviving node carries a
  // replica; metadata and other unhosted vertices are not replica-bound.
  std::vector<bool> alive_pre(vn, true), alive_post(vn, true);
  for (VertexIndex v = 0; v < vn; ++v) {
    if (g.vertex(v).kind == VertexKind::dataset) {
      alive_pre[v] = hosted_pre[v];
      alive_post[v] = hosted_post[v];
    }
  }

  FaultCheckReport report;
  for (VertexIndex m = 0; m < vn; ++m) {
    if (g.vertex(m).kind != VertexKind::metadata) continue;
    for (VertexIndex d = 0; d < vn; ++d) {
      if (g.vertex(d).kind != VertexKind::dataset) continue;
      if (!resolvable(g, m, d, alive_pre)) continue;
      if (!resolvable(g, m, d, alive_post)) {
        report.ok = false;
        report.broken.emplace_back(m, d);
      }
    }
  }
  return report;
}

}  // namespace fabric
