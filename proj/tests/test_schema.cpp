#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "fabric/rng.hpp"
#include "fabric/schema.hpp"

using namespace fabric;

namespace {

Schema make_schema(const std::string& name, const std::vector<std::string>& attrs) {
  Schema s;
  s.name = name;
  for (const auto& a : attrs) s.attributes.push_back({a, AttributeKind::numeric});
  return s;
}

SimilarityTable seller_table() {
  SimilarityTable t;
  t.set("price", "cost", 0.9);
  t.set("quantity", "stock", 0.8);
  t.set("price", "stock", 0.1);
  t.set("quantity", "cost", 0.2);
  return t;
}

// Every injective map from si into sj, scored directly.
double best_score_brute(const Schema& si, const Schema& sj, const SimilarityTable& t) {
  std::vector<std::size_t> idx(sj.attributes.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  double best = -1.0;
  // Permute all of sj and score the length-|si| prefix: covers every
  // injective assignment (many times over, which is fine for an oracle).
  std::sort(idx.begin(), idx.end());
  do {
    double score = 0.0;
    for (std::size_t i = 0; i < si.attributes.size(); ++i) {
      score += t.sim(si.attributes[i].name, sj.attributes[idx[i]].name);
    }
    best = std::max(best, score);
  } while (std::next_permutation(idx.begin(), idx.end()));
  return best;
}

}  // namespace

TEST_CASE("seller 2x2 distance is exactly 2.0") {
  const Schema s1 = make_schema("sales", {"price", "quantity"});
  const Schema s2 = make_schema("inventory", {"cost", "stock"});
  const SimilarityTable t = seller_table();
  const double d = schema_distance(s1, s2, t);
  CHECK(d == 2.0);
  CHECK(schema_distance(s2, s1, t) == 2.0);
}

TEST_CASE("matrix form agrees with the pairwise sum") {
  const Schema s1 = make_schema("sales", {"price", "quantity"});
  const Schema s2 = make_schema("inventory", {"cost", "stock"});
  const SimilarityTable t = seller_table();
  std::vector<std::vector<double>> w(2, std::vector<double>(2));
  std::vector<std::vector<double>> s(2, std::vector<double>(2));
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      w[i][j] = t.weight(s1.attributes[i].name, s2.attributes[j].name);
      s[i][j] = t.sim(s1.attributes[i].name, s2.attributes[j].name);
    }
  }
  CHECK(schema_distance_matrix(w, s) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(schema_distance_matrix({{1, 1}, {1, 1}}, {{1, 1}, {1, 1}}) == 0.0);
  CHECK_THROWS_AS(schema_distance_matrix({{1, 1}}, {{1}}), std::invalid_argument);
}

TEST_CASE("empty schema distance is zero") {
  const Schema empty = make_schema("none", {});
  const Schema s2 = make_schema("inventory", {"cost", "stock"});
  CHECK(schema_distance(empty, s2, SimilarityTable()) == 0.0);
}

TEST_CASE("duplicate attribute names are rejected") {
  Schema s;
  s.name = "bad";
  s.attributes = {{"x", AttributeKind::numeric}, {"x", AttributeKind::text}};
  CHECK_THROWS_AS(schema_distance(s, s, SimilarityTable()), std::invalid_argument);
}

TEST_CASE("similarity table validates ranges and is symmetric") {
  SimilarityTable t;
  CHECK_THROWS_AS(t.set("a", "b", 1.5), std::invalid_argument);
  CHECK_THROWS_AS(t.set("a", "b", 0.5, -1.0), std::invalid_argument);
  t.set("a", "b", 0.25, 2.0);
  CHECK(t.sim("b", "a") == 0.25);
  CHECK(t.weight("b", "a") == 2.0);
  CHECK(t.sim("a", "zz") == 0.0);
  CHECK(t.weight("a", "zz") == 1.0);
}

TEST_CASE("pseudo-metric properties on random instances") {
  Rng rng(20240817);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.next_below(4);
    const std::size_t m = 1 + rng.next_below(4);
    std::vector<std::string> an, bn;
    for (std::size_t i = 0; i < n; ++i) an.push_back("a" + std::to_string(i));
    for (std::size_t j = 0; j < m; ++j) bn.push_back("b" + std::to_string(j));
    SimilarityTable t;
    double max_w = 0.0;
    for (const auto& a : an) {
      for (const auto& b : bn) {
        const double w = rng.uniform(0.0, 2.0);
        t.set(a, b, rng.uniform(0.0, 1.0), w);
        max_w = std::max(max_w, w);
      }
    }
    const Schema si = make_schema("si", an);
    const Schema sj = make_schema("sj", bn);
    const double d = schema_distance(si, sj, t);
    CHECK(d >= 0.0);
    CHECK(d == doctest::Approx(schema_distance(sj, si, t)).epsilon(1e-12));
    CHECK(d <= static_cast<double>(n * m) * max_w + 1e-12);
  }
}

TEST_CASE("upper bound is reached when all sims are zero") {
  const Schema si = make_schema("si", {"a", "b"});
  const Schema sj = make_schema("sj", {"x", "y", "z"});
  SimilarityTable t(0.0, 1.5);
  CHECK(schema_distance(si, sj, t) == doctest::Approx(2 * 3 * 1.5).epsilon(1e-12));
}

TEST_CASE("triangle instance: score 3 with lexicographic tie-break") {
  const Schema si = make_schema("si", {"a1", "a2", "a3"});
  const Schema sj = make_schema("sj", {"b4", "b2", "b1", "b3"});  // scrambled order
  SimilarityTable t;
  for (const char* a : {"a1", "a2", "a3"}) {
    for (const char* b : {"b1", "b2", "b3"}) t.set(a, b, 1.0);
  }
  const auto m = match_schemas_exact(si, sj, t);
  CHECK(m.score == 3.0);
  REQUIRE(m.pairs.size() == 3);
  CHECK(m.pairs[0] == std::pair<std::string, std::string>{"a1", "b1"});
  CHECK(m.pairs[1] == std::pair<std::string, std::string>{"a2", "b2"});
  CHECK(m.pairs[2] == std::pair<std::string, std::string>{"a3", "b3"});
}

TEST_CASE("exact matcher preconditions") {
  const Schema big = make_schema("big", {"a", "b", "c"});
  const Schema small = make_schema("small", {"x"});
  CHECK_THROWS_AS(match_schemas_exact(big, small, SimilarityTable()), std::invalid_argument);
  std::vector<std::string> many;
  for (int i = 0; i < 11; ++i) many.push_back("a" + std::to_string(i));
  std::vector<std::string> targets;
  for (int i = 0; i < 12; ++i) targets.push_back("b" + std::to_string(i));
  CHECK_THROWS_AS(
      match_schemas_exact(make_schema("m", many), make_schema("t", targets), SimilarityTable()),
      std::invalid_argument);
}

TEST_CASE("empty source gives empty mapping") {
  const auto m = match_schemas_exact(make_schema("e", {}), make_schema("t", {"x"}),
                                     SimilarityTable());
  CHECK(m.pairs.empty());
  CHECK(m.score == 0.0);
}

TEST_CASE("exact matcher equals full enumeration on random tables") {
  Rng rng(555);
  for (int trial = 0; trial < 120; ++trial) {
    const std::size_t n = 1 + rng.next_below(3);
    const std::size_t m = n + rng.next_below(3);
    std::vector<std::string> an, bn;
    for (std::size_t i = 0; i < n; ++i) an.push_back("a" + std::to_string(i));
    for (std::size_t j = 0; j < m; ++j) bn.push_back("b" + std::to_string(j));
    SimilarityTable t;
    for (const auto& a : an) {
      for (const auto& b : bn) t.set(a, b, rng.uniform(0.0, 1.0));
    }
    const Schema si = make_schema("si", an);
    const Schema sj = make_schema("sj", bn);
    const auto exact = match_schemas_exact(si, sj, t);
    CHECK(exact.score == doctest::Approx(best_score_brute(si, sj, t)).epsilon(1e-12));
    // The mapping's recomputed score matches the reported one.
    double recomputed = 0.0;
    for (const auto& [a, b] : exact.pairs) recomputed += t.sim(a, b);
    CHECK(exact.score == doctest::Approx(recomputed).epsilon(1e-12));
  }
}

TEST_CASE("exact matcher score is invariant under attribute reorder") {
  Rng rng(99);
  std::vector<std::string> an = {"a0", "a1", "a2"};
  std::vector<std::string> bn = {"b0", "b1", "b2", "b3"};
  SimilarityTable t;
  for (const auto& a : an) {
    for (const auto& b : bn) t.set(a, b, rng.uniform(0.0, 1.0));
  }
  const double base = match_schemas_exact(make_schema("si", an), make_schema("sj", bn), t).score;
  std::reverse(an.begin(), an.end());
  std::reverse(bn.begin(), bn.end());
  CHECK(match_schemas_exact(make_schema("si", an), make_schema("sj", bn), t).score ==
        doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("greedy reproduces the seller mapping") {
  const Schema s1 = make_schema("sales", {"price", "quantity"});
  const Schema s2 = make_schema("inventory", {"cost", "stock"});
  const auto m = match_schemas_greedy(s1, s2, seller_table());
  REQUIRE(m.pairs.size() == 2);
  CHECK(m.pairs[0] == std::pair<std::string, std::string>{"price", "cost"});
  CHECK(m.pairs[1] == std::pair<std::string, std::string>{"quantity", "stock"});
  CHECK(m.score == doctest::Approx(1.7).epsilon(1e-12));
}

TEST_CASE("uniform sims: greedy is deterministic and scores 0.5 per source") {
  const Schema si = make_schema("si", {"a", "b"});
  const Schema sj = make_schema("sj", {"y", "x", "z"});
  SimilarityTable t(0.5, 1.0);
  const auto m = match_schemas_greedy(si, sj, t);
  CHECK(m.score == doctest::Approx(1.0).epsilon(1e-12));
  // Lexicographic tie-break: source 'a' pairs with target 'x'.
  CHECK(m.pairs[0] == std::pair<std::string, std::string>{"a", "x"});
  CHECK(m.pairs[1] == std::pair<std::string, std::string>{"b", "y"});
}

TEST_CASE("greedy is suboptimal on the adversarial instance but never beats exact") {
  SimilarityTable t;
  t.set("a", "x", 0.6);
  t.set("a", "y", 0.5);
  t.set("b", "x", 0.55);
  t.set("b", "y", 0.0);
  const Schema si = make_schema("si", {"a", "b"});
  const Schema sj = make_schema("sj", {"x", "y"});
  const auto greedy = match_schemas_greedy(si, sj, t);
  const auto exact = match_schemas_exact(si, sj, t);
  CHECK(greedy.score == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(exact.score == doctest::Approx(1.05).epsilon(1e-12));
  CHECK(greedy.score < exact.score);
}

TEST_CASE("greedy never beats exact on random instances") {
  Rng rng(31337);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.next_below(4);
    const std::size_t m = n + rng.next_below(3);
    std::vector<std::string> an, bn;
    for (std::size_t i = 0; i < n; ++i) an.push_back("a" + std::to_string(i));
    for (std::size_t j = 0; j < m; ++j) bn.push_back("b" + std::to_string(j));
    SimilarityTable t;
    for (const auto& a : an) {
      for (const auto& b : bn) t.set(a, b, rng.uniform(0.0, 1.0));
    }
    const Schema si = make_schema("si", an);
    const Schema sj = make_schema("sj", bn);
    CHECK(match_schemas_greedy(si, sj, t).score <=
          match_schemas_exact(si, sj, t).score + 1e-12);
  }
}

TEST_CASE("compat counts mapped sources with sim at least one half") {
  const Schema s1 = make_schema("sales", {"price", "quantity"});
  const Schema s2 = make_schema("inventory", {"cost", "stock"});
  const SimilarityTable t = seller_table();
  const auto m = match_schemas_greedy(s1, s2, t);
  const auto c = compat(s1, s2, m, t, 0.5);
  CHECK(c.fraction == 1.0);
  CHECK(c.pass);

  SimilarityTable weak;
  weak.set("price", "cost", 0.9);
  weak.set("quantity", "stock", 0.3);
  const auto m2 = match_schemas_greedy(s1, s2, weak);
  const auto c2 = compat(s1, s2, m2, weak, 0.5);
  CHECK(c2.fraction == 0.5);
  CHECK(c2.pass);  // boundary: fraction == theta
  CHECK_FALSE(compat(s1, s2, m2, weak, 0.6).pass);
}

TEST_CASE("compat of an empty source schema is zero") {
  const Schema empty = make_schema("none", {});
  const Schema sj = make_schema("sj", {"x"});
  AttributeMapping m;
  const auto c = compat(empty, sj, m, SimilarityTable(), 0.5);
  CHECK(c.fraction == 0.0);
  CHECK_FALSE(c.pass);
}

TEST_CASE("compat validates the mapping against the schemas") {
  const Schema si = make_schema("si", {"a"});
  const Schema sj = make_schema("sj", {"x"});
  AttributeMapping bad;
  bad.pairs = {{"a", "nope"}};
  CHECK_THROWS_AS(compat(si, sj, bad, SimilarityTable(), 0.5), std::invalid_argument);
}
