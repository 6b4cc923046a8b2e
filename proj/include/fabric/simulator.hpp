#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "fabric/hypergraph.hpp"

namespace fabric {

inline constexpr double kNoLink = std::numeric_limits<double>::infinity();

struct SimNode {
  std::string name;
  std::set<std::string> hosted;  // replica keys stored on this node
};

// Symmetric nonnegative link weights with an infinity sentinel for absent
// links and zeros on the diagonal.
struct LinkMatrix {
  std::vector<std::vector<double>> weight;

  static LinkMatrix disconnected(std::size_t n);
  void connect(std::size_t a, std::size_t b, double w);
  void validate() const;
  std::size_t size() const { return weight.size(); }
};

// Floyd-Warshall closure of a link matrix; infinity marks unreachable pairs.
std::vector<std::vector<double>> all_pairs_shortest(const LinkMatrix& links);

enum class ReplicationMode { sync_all, async_gossip };

struct Versioned {
  std::string value;
  double at = -1.0;        // write timestamp (tick of issue)
  std::size_t origin = 0;  // writer node, tie breaker

  bool newer_than(const Versioned& o) const {
    return at > o.at || (at == o.at && origin > o.origin);
  }
};

struct CalMeasurement {
  double consistency = 0.0;   // max staleness observed on reads
  double availability = 0.0;  // max response delay; +inf on unavailability
  double latency_bound = std::numeric_limits<double>::infinity();
  bool pass() const { return std::max(consistency, availability) <= latency_bound; }
};

// Deterministic discrete-event replication simulator over an integer tick
// clock.  Writes propagate either synchronously (deliveries scheduled at the
// link distance) or by anti-entropy gossip rounds (one deterministic peer per
// node per tick, last-writer-wins merge of commonly hosted keys).  Messages
// never cross partition groups.
class FabricSimulator {
 public:
  FabricSimulator(std::vector<SimNode> nodes, LinkMatrix links);

  std::size_t node_count() const { return nodes_.size(); }
  std::optional<std::size_t> node_by_name(const std::string& name) const;
  const SimNode& node(std::size_t i) const { return nodes_.at(i); }
  long long now() const { return now_; }

  void set_latency_bound(double bound);
  void set_default_mode(ReplicationMode mode) { default_mode_ = mode; }

  void write(const std::string& node, const std::string& key, const std::string& value,
             std::optional<ReplicationMode> mode = std::nullopt);
  void read(const std::string& node, const std::string& key);
  void advance(long long ticks);
  void partition(const std::vector<std::vector<std::string>>& groups);
  void heal();
  bool partitioned() const { return partitioned_; }

  // Runs gossip ticks until every key's up-host replicas carry one version
  // and no deliveries are pending; returns the number of ticks needed.
  // Errors while a partition is active or when the safety cap trips.
  std::size_t converge_eventual();
  bool converged() const;

  const std::vector<std::string>& event_log() const { return log_; }
  CalMeasurement measurement() const { return cal_; }

  // Replica inspection for tests.
  std::optional<Versioned> replica(std::size_t node, const std::string& key) const;

  // Unweighted hop diameter of the link topology (largest finite hop count).
  std::size_t hop_diameter() const;

 private:
  struct Delivery {
    double at;
    std::uint64_t seq;
    std::size_t node;
    std::string key;
    Versioned payload;
    bool operator<(const Delivery& o) const {
      if (at != o.at) return at < o.at;
      return seq < o.seq;
    }
  };

  bool same_group(std::size_t a, std::size_t b) const;
  std::vector<std::vector<double>> effective_distances() const;
  void apply_delivery(const Delivery& d);
  void gossip_round(long long tick);
  std::vector<std::size_t> hosts_of(const std::string& key) const;
  void log_line(std::string line) { log_.push_back(std::move(line)); }

  std::vector<SimNode> nodes_;
  LinkMatrix links_;
  long long now_ = 0;
  std::uint64_t seq_ = 0;
  std::vector<std::map<std::string, Versioned>> replicas_;
  std::map<std::string, std::pair<Versioned, double>> latest_;  // key -> (stamp, issue time)
  std::vector<Delivery> pending_;                               // kept sorted
  std::vector<std::size_t> group_of_;
  bool partitioned_ = false;
  ReplicationMode default_mode_ = ReplicationMode::sync_all;
  CalMeasurement cal_;
  std::vector<std::string> log_;
};

// ---- workload scripts -------------------------------------------------

class WorkloadParseError : public std::runtime_error {
 public:
  WorkloadParseError(const std::string& what, std::size_t line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct WorkloadOp {
  enum class Kind { write, read, advance, partition, heal, converge, bound, mode };
  Kind kind = Kind::advance;
  std::string node, key, value;
  std::optional<ReplicationMode> mode;
  long long ticks = 0;
  double bound = 0.0;
  std::vector<std::vector<std::string>> groups;
};

// Line-oriented commands: write/read/advance/partition/heal/converge plus the
// bound and mode directives; '#' starts a comment.
std::vector<WorkloadOp> parse_workload(const std::string& text);

CalMeasurement run_workload(FabricSimulator& sim, const std::vector<WorkloadOp>& ops);

// ---- structural fault tolerance ----------------------------------------

struct FaultCheckReport {
  bool ok = true;
  // (metadata vertex, dataset vertex) pairs resolvable before the failure
  // but not after.
  std::vector<std::pair<VertexIndex, VertexIndex>> broken;
};

// Marks the given nodes failed, drops the dataset replicas they host, and
// verifies every metadata-to-dataset query that resolved before still does:
// the dataset must keep a surviving replica and stay reachable through edges
// whose participants are all alive.
FaultCheckReport fault_check(const Hypergraph& g,
                             const std::vector<std::set<VertexIndex>>& hosted_per_node,
                             const std::set<std::size_t>& failed_nodes);

}  // namespace fabric
