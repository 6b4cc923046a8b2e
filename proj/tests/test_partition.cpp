#include <doctest.h>

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "fabric/partition.hpp"
#include "fabric/rng.hpp"

using namespace fabric;

namespace {

PartitionInstance triple() {
  PartitionInstance inst;
  inst.datasets = {0, 1, 2};
  inst.node_count = 3;
  inst.costs.compute = {{0, 1.0}, {1, 2.0}, {2, 3.0}};
  inst.costs.set_comm(0, 1, 5.0);
  inst.costs.set_comm(1, 2, 7.0);
  return inst;
}

}  // namespace

TEST_CASE("communication costs are symmetric and validated") {
  CostModel m;
  m.set_comm(3, 1, 2.5);
  CHECK(m.comm_between(1, 3) == 2.5);
  CHECK(m.comm_between(3, 1) == 2.5);
  CHECK(m.comm_between(0, 9) == 0.0);
  CHECK_THROWS_AS(m.set_comm(1, 1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(m.set_comm(0, 1, -1.0), std::invalid_argument);
}

TEST_CASE("instance validation") {
  PartitionInstance inst = triple();
  CHECK_NOTHROW(inst.validate());
  inst.node_count = 0;
  CHECK_THROWS_AS(inst.validate(), std::invalid_argument);

  PartitionInstance empty;
  empty.node_count = 1;
  CHECK_THROWS_AS(empty.validate(), std::invalid_argument);

  PartitionInstance dup = triple();
  dup.datasets = {0, 0, 2};
  CHECK_THROWS_AS(dup.validate(), std::invalid_argument);

  PartitionInstance missing = triple();
  missing.costs.compute.erase(1);
  CHECK_THROWS_AS(missing.validate(), std::invalid_argument);

  PartitionInstance stray = triple();
  stray.costs.set_comm(0, 9, 1.0);
  CHECK_THROWS_AS(stray.validate(), std::invalid_argument);
}

TEST_CASE("objective charges compute plus cut communication") {
  const auto inst = triple();
  CHECK(objective(inst, {0, 0, 0}) == 6.0);
  CHECK(objective(inst, {0, 0, 1}) == 13.0);  // the (1,2) pair splits
  CHECK(objective(inst, {0, 1, 2}) == 18.0);
  CHECK(objective(inst, {1, 1, 0}) == 13.0);
  CHECK_THROWS_AS(objective(inst, {0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(objective(inst, {0, 0, 9}), std::invalid_argument);
}

TEST_CASE("brute force finds the optimum with the smallest assignment") {
  const auto inst = triple();
  const auto r = brute_force_partition(inst);
  CHECK(r.objective == 6.0);
  CHECK(r.assignment == Assignment{0, 0, 0});  // ties resolve lexicographically

  PartitionInstance free_for_all;
  free_for_all.datasets = {0, 1};
  free_for_all.node_count = 2;
  free_for_all.costs.compute = {{0, 1.0}, {1, 1.0}};
  CHECK(brute_force_partition(free_for_all).assignment == Assignment{0, 0});
}

TEST_CASE("brute force rejects oversized instances") {
  PartitionInstance big;
  big.node_count = 2;
  for (VertexIndex d = 0; d < 21; ++d) {
    big.datasets.push_back(d);
    big.costs.compute[d] = 1.0;
  }
  CHECK_THROWS_AS(brute_force_partition(big), std::invalid_argument);
}

TEST_CASE("brute force matches exhaustive re-evaluation on random instances") {
  Rng rng(5150);
  for (int trial = 0; trial < 20; ++trial) {
    PartitionInstance inst;
    const std::size_t n = 2 + rng.next_below(5);
    inst.node_count = 2 + rng.next_below(2);
    for (VertexIndex d = 0; d < n; ++d) {
      inst.datasets.push_back(d);
      inst.costs.compute[d] = rng.uniform(0.0, 3.0);
    }
    for (VertexIndex a = 0; a < n; ++a)
      for (VertexIndex b = a + 1; b < n; ++b)
        if (rng.next_below(2) == 0) inst.costs.set_comm(a, b, rng.uniform(0.0, 4.0));

    const auto best = brute_force_partition(inst);
    // Sample a handful of assignments; none may beat the reported optimum.
    for (int probe = 0; probe < 50; ++probe) {
      Assignment a(n);
      for (auto& x : a) x = rng.next_below(inst.node_count);
      CHECK(objective(inst, a) >= best.objective - 1e-12);
    }
    CHECK(objective(inst, best.assignment) == best.objective);
  }
}

TEST_CASE("spectral partition separates two disconnected cliques") {
  // Two grouping hyperedges: vertices 0-2 and 3-6, both draining into 7.
  std::vector<Vertex> vs(8);
  for (std::size_t i = 0; i < vs.size(); ++i)
    vs[i] = Vertex{static_cast<VertexIndex>(i), VertexKind::dataset};
  Hyperedge e1, e2;
  e1.id = "groupA";
  e1.tail = {0, 1, 2};
  e1.head = {7};
  e2.id = "groupB";
  e2.tail = {3, 4, 5, 6};
  e2.head = {7};
  auto g = Hypergraph::construct(vs, {e1, e2});

  PartitionInstance inst;
  inst.datasets = {0, 1, 2, 3, 4, 5, 6};
  inst.node_count = 2;
  for (VertexIndex d : inst.datasets) inst.costs.compute[d] = 1.0;
  for (VertexIndex a : {0, 1, 2})
    for (VertexIndex b : {0, 1, 2})
      if (a < b) inst.costs.set_comm(a, b, 10.0);
  for (VertexIndex a : {3, 4, 5, 6})
    for (VertexIndex b : {3, 4, 5, 6})
      if (a < b) inst.costs.set_comm(a, b, 10.0);

  const auto spec = spectral_partition(g, inst, 2, 99);
  const auto brute = brute_force_partition(inst);
  CHECK(spec.objective == brute.objective);  // no pair is ever cut
  // Groups stay whole and land on distinct nodes (larger group first).
  CHECK(spec.assignment[0] == spec.assignment[1]);
  CHECK(spec.assignment[1] == spec.assignment[2]);
  CHECK(spec.assignment[3] == spec.assignment[4]);
  CHECK(spec.assignment[4] == spec.assignment[5]);
  CHECK(spec.assignment[5] == spec.assignment[6]);
  CHECK(spec.assignment[0] != spec.assignment[3]);
  CHECK(spec.assignment[3] == 0);  // the size-4 cluster takes the first node

  // Same seed, same answer.
  const auto again = spectral_partition(g, inst, 2, 99);
  CHECK(again.assignment == spec.assignment);
}

TEST_CASE("spectral partition validates its arguments") {
  std::vector<Vertex> vs(2);
  vs[0] = Vertex{0, VertexKind::dataset};
  vs[1] = Vertex{1, VertexKind::dataset};
  auto g = Hypergraph::construct(vs, {});
  PartitionInstance inst;
  inst.datasets = {0, 1};
  inst.node_count = 2;
  inst.costs.compute = {{0, 1.0}, {1, 1.0}};
  CHECK_THROWS_AS(spectral_partition(g, inst, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(spectral_partition(g, inst, 3, 1), std::invalid_argument);
  PartitionInstance outside = inst;
  outside.datasets = {0, 9};
  outside.costs.compute[9] = 1.0;
  CHECK_THROWS_AS(spectral_partition(g, outside, 2, 1), std::invalid_argument);
}

TEST_CASE("load sums compute per node") {
  const auto inst = triple();
  CHECK(load(inst, {0, 1, 0}) == std::vector<double>{4.0, 2.0, 0.0});
  CHECK(load(inst, {2, 2, 2}) == std::vector<double>{0.0, 0.0, 6.0});
}

TEST_CASE("rebalance moves the heaviest node under the cap") {
  PartitionInstance inst;
  inst.datasets = {0, 1, 2, 3};
  inst.node_count = 2;
  inst.costs.compute = {{0, 4.0}, {1, 3.0}, {2, 2.0}, {3, 1.0}};
  const auto a = rebalance(inst, {0, 0, 0, 0}, 6.0);
  const auto l = load(inst, a);
  CHECK(*std::max_element(l.begin(), l.end()) <= 6.0);
  CHECK(a == Assignment{1, 0, 0, 0});  // the single best move suffices
}

TEST_CASE("rebalance rejects caps below the mean") {
  PartitionInstance inst;
  inst.datasets = {0, 1};
  inst.node_count = 2;
  inst.costs.compute = {{0, 6.0}, {1, 4.0}};
  CHECK_THROWS_AS(rebalance(inst, {0, 1}, 4.0), std::invalid_argument);
}

TEST_CASE("rebalance stops when no move helps") {
  PartitionInstance inst;
  inst.datasets = {0, 1};
  inst.node_count = 2;
  inst.costs.compute = {{0, 10.0}, {1, 1.0}};
  // Feasible cap on paper, but the only movable chunk is indivisible.
  const auto a = rebalance(inst, {0, 1}, 5.6);
  CHECK(a == Assignment{0, 1});
  const auto l = load(inst, a);
  CHECK(*std::max_element(l.begin(), l.end()) == 10.0);
}

TEST_CASE("rebalance never raises the maximum load") {
  Rng rng(616);
  for (int trial = 0; trial < 40; ++trial) {
    PartitionInstance inst;
    const std::size_t n = 2 + rng.next_below(8);
    inst.node_count = 2 + rng.next_below(3);
    double total = 0.0;
    for (VertexIndex d = 0; d < n; ++d) {
      inst.datasets.push_back(d);
      const double c = rng.uniform(0.5, 4.0);
      inst.costs.compute[d] = c;
      total += c;
    }
    Assignment a(n);
    for (auto& x : a) x = rng.next_below(inst.node_count);
    const auto before = load(inst, a);
    const double cap = 1.1 * total / static_cast<double>(inst.node_count);
    const auto b = rebalance(inst, a, cap);
    const auto after = load(inst, b);
    CHECK(*std::max_element(after.begin(), after.end()) <=
          *std::max_element(before.begin(), before.end()) + 1e-12);
  }
}

TEST_CASE("numeric aggregation is order-insensitive down to the bit") {
  const std::vector<std::pair<std::size_t, double>> base = {
      {0, 0.1}, {1, 0.2}, {2, 0.7}, {3, 1e15}, {4, -1e15}};
  std::vector<std::pair<std::size_t, double>> shuffled = {
      base[3], base[0], base[4], base[2], base[1]};
  CHECK(aggregate(base, NumericAggregate::sum) ==
        aggregate(shuffled, NumericAggregate::sum));
  CHECK(aggregate(base, NumericAggregate::mean) ==
        aggregate(shuffled, NumericAggregate::mean));
  CHECK(aggregate({{0, 2.0}, {1, 4.0}}, NumericAggregate::mean) == 3.0);
  CHECK_THROWS_AS(aggregate({}, NumericAggregate::sum), std::invalid_argument);
}

TEST_CASE("set union aggregation merges and sorts") {
  const auto merged = aggregate_union({{1, {"b", "a"}}, {0, {"c", "a"}}});
  CHECK(merged == std::vector<std::string>{"a", "b", "c"});
  CHECK_THROWS_AS(aggregate_union({}), std::invalid_argument);
}
