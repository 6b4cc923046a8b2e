#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fabric/rng.hpp"
#include "fabric/transform.hpp"

using namespace fabric;

namespace {

Transformation primitive(std::string id, TransformStep step, std::string src = "dom",
                         std::string dst = "dom", CostClass cc = CostClass::linear) {
  Transformation t;
  t.id = std::move(id);
  t.source_domain = std::move(src);
  t.target_domain = std::move(dst);
  t.cost_class = cc;
  t.steps = {std::move(step)};
  return t;
}

TransformStep affine(std::string attr, double scale, double offset, std::string rename = "") {
  TransformStep s;
  s.kind = TransformKind::affineScale;
  s.attr = std::move(attr);
  s.scale = scale;
  s.offset = offset;
  s.rename_to = std::move(rename);
  return s;
}

TransformStep project_step(std::vector<std::string> keep) {
  TransformStep s;
  s.kind = TransformKind::project;
  s.keep = std::move(keep);
  return s;
}

TransformStep merge_step(std::string attr, std::size_t factor) {
  TransformStep s;
  s.kind = TransformKind::binMerge;
  s.attr = std::move(attr);
  s.merge_factor = factor;
  return s;
}

TransformStep constant_step(double fill) {
  TransformStep s;
  s.kind = TransformKind::constant;
  s.fill_value = fill;
  return s;
}

// One numeric attribute split into four unit bins, one record per bin.
DiscreteDataset four_bins() {
  DiscreteDataset d;
  d.name = "grid";
  d.domain = "dom";
  d.schema.name = "grid";
  d.schema.attributes = {{"x", AttributeKind::numeric}};
  d.records = {{0.5}, {1.5}, {2.5}, {3.5}};
  d.binning["x"] = Binning{{1.0, 2.0, 3.0}};
  return d;
}

DiscreteDataset shop() {
  DiscreteDataset d;
  d.name = "shop";
  d.domain = "dom";
  d.schema.name = "shop";
  d.schema.attributes = {{"item", AttributeKind::categorical},
                         {"price", AttributeKind::numeric},
                         {"qty", AttributeKind::numeric}};
  d.records = {{std::string("a"), 10.0, 3.0},
               {std::string("b"), 12.5, 1.0},
               {std::string("c"), 20.0, 4.0}};
  d.binning["price"] = Binning{{11.0, 15.0}};
  d.binning["qty"] = Binning{{2.0}};
  return d;
}

double cell(const DiscreteDataset& d, std::size_t row, const std::string& attr) {
  return std::get<double>(d.records[row][d.attribute_position(attr)]);
}

// Exact optimal transport for small instances: the optimum sits at a basic
// feasible solution, so enumerate every candidate basis (cell subsets of size
// n+m-1), solve the marginal equations restricted to it, and keep the best
// nonnegative solution.
double exact_transport(const std::vector<double>& p, const std::vector<double>& q,
                       const std::vector<std::vector<double>>& cost) {
  const std::size_t n = p.size(), m = q.size();
  const std::size_t cells = n * m, k = n + m - 1;
  double best = std::numeric_limits<double>::infinity();

  std::vector<std::size_t> comb(k);
  for (std::size_t i = 0; i < k; ++i) comb[i] = i;
  while (true) {
    // Solve the (n+m) x k system for the chosen cells.
    std::vector<std::vector<double>> a(n + m, std::vector<double>(k + 1, 0.0));
    for (std::size_t c = 0; c < k; ++c) {
      a[comb[c] / m][c] = 1.0;
      a[n + comb[c] % m][c] = 1.0;
    }
    for (std::size_t i = 0; i < n; ++i) a[i][k] = p[i];
    for (std::size_t j = 0; j < m; ++j) a[n + j][k] = q[j];

    std::size_t rank = 0;
    std::vector<std::ptrdiff_t> where(k, -1);
    for (std::size_t col = 0; col < k && rank < n + m; ++col) {
      std::size_t piv = rank;
      for (std::size_t r = rank; r < n + m; ++r)
        if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
      if (std::abs(a[piv][col]) < 1e-12) continue;
      std::swap(a[piv], a[rank]);
      for (std::size_t r = 0; r < n + m; ++r) {
        if (r == rank) continue;
        const double f = a[r][col] / a[rank][col];
        for (std::size_t c = col; c <= k; ++c) a[r][c] -= f * a[rank][c];
      }
      where[col] = static_cast<std::ptrdiff_t>(rank);
      ++rank;
    }
    bool ok = rank == k;
    for (std::size_t r = rank; ok && r < n + m; ++r)
      if (std::abs(a[r][k]) > 1e-9) ok = false;  // inconsistent basis
    if (ok) {
      std::vector<double> x(k, 0.0);
      for (std::size_t c = 0; c < k; ++c)
        x[c] = a[static_cast<std::size_t>(where[c])][k] /
               a[static_cast<std::size_t>(where[c])][c];
      for (double v : x) ok &= v >= -1e-9;
      if (ok) {
        double value = 0.0;
        for (std::size_t c = 0; c < k; ++c)
          value += x[c] * cost[comb[c] / m][comb[c] % m];
        best = std::min(best, value);
      }
    }

    // Next combination.
    std::size_t i = k;
    while (i > 0 && comb[i - 1] == cells - k + i - 1) --i;
    if (i == 0) break;
    ++comb[i - 1];
    for (std::size_t j = i; j < k; ++j) comb[j] = comb[j - 1] + 1;
  }
  return std::sqrt(std::max(0.0, best));
}

}  // namespace

TEST_CASE("parameter validation per step kind") {
  CHECK_THROWS_AS(Transformation{}.validate_params(), std::invalid_argument);
  CHECK_THROWS_AS(primitive("t", affine("x", 0.0, 1.0)).validate_params(),
                  std::invalid_argument);
  CHECK_THROWS_AS(primitive("t", affine("", 2.0, 1.0)).validate_params(),
                  std::invalid_argument);
  CHECK_THROWS_AS(primitive("t", project_step({})).validate_params(), std::invalid_argument);
  CHECK_THROWS_AS(primitive("t", merge_step("x", 0)).validate_params(), std::invalid_argument);
  CHECK_THROWS_AS(primitive("t", constant_step(std::nan(""))).validate_params(),
                  std::invalid_argument);
  CHECK_NOTHROW(primitive("t", TransformStep{}).validate_params());
}

TEST_CASE("kind() only answers for primitives") {
  auto t = primitive("t", affine("x", 2.0, 0.0));
  CHECK(t.kind() == TransformKind::affineScale);
  auto c = compose(primitive("a", affine("x", 2.0, 0.0)),
                   primitive("b", project_step({"x"})));
  CHECK_FALSE(c.is_primitive());
  CHECK_THROWS_AS(c.kind(), std::logic_error);
}

TEST_CASE("identity leaves everything but the domain") {
  auto d = shop();
  Transformation t = primitive("id", TransformStep{}, "dom", "other");
  const auto out = apply(t, d);
  CHECK(out.records == d.records);
  CHECK(out.schema.attributes == d.schema.attributes);
  CHECK(out.domain == "other");
}

TEST_CASE("apply enforces the source domain") {
  auto d = shop();
  CHECK_THROWS_AS(apply(primitive("t", TransformStep{}, "elsewhere"), d),
                  std::invalid_argument);
}

TEST_CASE("affineScale rewrites cells, bins and optionally the name") {
  auto d = shop();
  const auto out = apply(primitive("t", affine("price", 2.0, 1.0)), d);
  CHECK(cell(out, 0, "price") == 21.0);
  CHECK(cell(out, 1, "price") == 26.0);
  CHECK(out.binning.at("price").edges == std::vector<double>{23.0, 31.0});

  const auto renamed = apply(primitive("t", affine("price", 1.25, 0.0, "cost")), d);
  CHECK(renamed.schema.attributes[1].name == "cost");
  CHECK(renamed.binning.count("cost") == 1);
  CHECK(renamed.binning.count("price") == 0);
  CHECK(cell(renamed, 0, "cost") == 12.5);
}

TEST_CASE("negative scale keeps bin edges sorted") {
  auto d = four_bins();
  const auto out = apply(primitive("t", affine("x", -1.0, 0.0)), d);
  CHECK(out.binning.at("x").edges == std::vector<double>{-3.0, -2.0, -1.0});
  CHECK_NOTHROW(out.validate());
  // Bin populations survive mirroring: each record still has its own bin.
  std::map<std::size_t, int> seen;
  for (const auto& r : out.records) ++seen[out.binning.at("x").bin_of(std::get<double>(r[0]))];
  CHECK(seen.size() == 4);
}

TEST_CASE("affine rename collisions and bad targets throw") {
  auto d = shop();
  CHECK_THROWS_AS(apply(primitive("t", affine("price", 2.0, 0.0, "qty")), d),
                  std::invalid_argument);
  CHECK_THROWS_AS(apply(primitive("t", affine("item", 2.0, 0.0)), d), std::invalid_argument);
  CHECK_THROWS_AS(apply(primitive("t", affine("absent", 2.0, 0.0)), d), std::invalid_argument);
}

TEST_CASE("project keeps declaration order and trims binning") {
  auto d = shop();
  const auto out = apply(primitive("t", project_step({"qty", "item"})), d);
  REQUIRE(out.schema.attributes.size() == 2);
  CHECK(out.schema.attributes[0].name == "item");  // original order, not keep order
  CHECK(out.schema.attributes[1].name == "qty");
  CHECK(out.records[0] == Record{std::string("a"), 3.0});
  CHECK(out.binning.count("qty") == 1);
  CHECK(out.binning.count("price") == 0);
  CHECK_THROWS_AS(apply(primitive("t", project_step({"ghost"})), d), std::invalid_argument);
}

TEST_CASE("aggregateSum folds numeric columns into one record") {
  auto d = shop();
  const auto out = apply(primitive("t", TransformStep{.kind = TransformKind::aggregateSum}), d);
  REQUIRE(out.records.size() == 1);
  REQUIRE(out.schema.attributes.size() == 2);
  CHECK(out.schema.attributes[0].name == "price");
  CHECK(cell(out, 0, "price") == 42.5);
  CHECK(cell(out, 0, "qty") == 8.0);
  CHECK(out.binning.empty());

  DiscreteDataset text_only;
  text_only.name = "t";
  text_only.domain = "dom";
  text_only.schema.attributes = {{"s", AttributeKind::text}};
  text_only.records = {{std::string("x")}};
  CHECK_THROWS_AS(apply(primitive("t", TransformStep{.kind = TransformKind::aggregateSum}),
                        text_only),
                  std::invalid_argument);
}

TEST_CASE("binMerge halves the bin count and reindexes records") {
  auto d = four_bins();
  const auto out = apply(primitive("t", merge_step("x", 2)), d);
  CHECK(out.binning.at("x").bin_count() == 2);
  CHECK(out.binning.at("x").edges == std::vector<double>{0.5});
  CHECK(cell(out, 0, "x") == 0.0);
  CHECK(cell(out, 1, "x") == 0.0);
  CHECK(cell(out, 2, "x") == 1.0);
  CHECK(cell(out, 3, "x") == 1.0);

  auto no_bins = four_bins();
  no_bins.binning.clear();
  CHECK_THROWS_AS(apply(primitive("t", merge_step("x", 2)), no_bins), std::invalid_argument);
}

TEST_CASE("binMerge with factor one renumbers bins but keeps granularity") {
  auto d = four_bins();
  const auto out = apply(primitive("t", merge_step("x", 1)), d);
  CHECK(out.binning.at("x").bin_count() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(cell(out, i, "x") == static_cast<double>(i));
}

TEST_CASE("constant blanks every cell") {
  auto d = shop();
  const auto out = apply(primitive("t", constant_step(7.0)), d);
  for (const auto& r : out.records) {
    CHECK(std::get<double>(r[1]) == 7.0);
    CHECK(std::get<double>(r[2]) == 7.0);
    CHECK(std::get<std::string>(r[0]).empty());
  }
}

TEST_CASE("compose checks the domain chain and merges cost classes") {
  auto a = primitive("a", TransformStep{}, "d1", "d2");
  auto b = primitive("b", TransformStep{}, "d2", "d3", CostClass::quadratic);
  CHECK_THROWS_AS(compose(b, a), std::invalid_argument);
  const auto c = compose(a, b);
  CHECK(c.source_domain == "d1");
  CHECK(c.target_domain == "d3");
  CHECK(c.cost_class == CostClass::quadratic);
}

TEST_CASE("identities vanish and affine chains fold") {
  auto t1 = primitive("t1", affine("x", 2.0, 1.0));
  auto t2 = primitive("t2", affine("x", 4.0, 3.0));
  const auto c = compose(t1, t2);
  REQUIRE(c.steps.size() == 1);
  CHECK(c.steps[0].scale == 8.0);
  CHECK(c.steps[0].offset == 7.0);  // 4*1 + 3

  const auto with_id = compose(primitive("i", TransformStep{}), t1);
  REQUIRE(with_id.steps.size() == 1);
  CHECK(with_id.steps[0].kind == TransformKind::affineScale);

  const auto pure = compose(primitive("i1", TransformStep{}), primitive("i2", TransformStep{}));
  REQUIRE(pure.steps.size() == 1);
  CHECK(pure.steps[0].kind == TransformKind::identity);
}

TEST_CASE("affine folding follows a rename") {
  auto t1 = primitive("t1", affine("price", 2.0, 0.0, "cost"));
  auto t2 = primitive("t2", affine("cost", 4.0, 0.0));
  const auto c = compose(t1, t2);
  REQUIRE(c.steps.size() == 1);
  CHECK(c.steps[0].attr == "price");
  CHECK(c.steps[0].rename_to == "cost");
  CHECK(c.steps[0].scale == 8.0);

  // Different attributes do not fold.
  auto t3 = primitive("t3", affine("qty", 2.0, 0.0));
  CHECK(compose(t1, t3).steps.size() == 2);
}

TEST_CASE("composition behaves like sequential application") {
  auto d = shop();
  auto t1 = primitive("t1", affine("price", 2.0, 1.0));
  auto t2 = primitive("t2", affine("price", 4.0, 3.0));
  const auto once = apply(compose(t1, t2), d);
  const auto twice = apply(t2, apply(t1, d));
  // Small integral coefficients keep the algebra exact in floating point.
  CHECK(once.records == twice.records);
  CHECK(once.binning.at("price").edges == twice.binning.at("price").edges);
}

TEST_CASE("composition is associative in behaviour") {
  auto d = shop();
  auto t1 = primitive("t1", affine("price", 2.0, 1.0));
  auto t2 = primitive("t2", project_step({"price", "qty"}));
  auto t3 = primitive("t3", merge_step("qty", 2));
  const auto left = apply(compose(compose(t1, t2), t3), d);
  const auto right = apply(compose(t1, compose(t2, t3)), d);
  CHECK(left.records == right.records);
  CHECK(left.schema.attributes == right.schema.attributes);
}

TEST_CASE("identity loses nothing") {
  const auto rep = estimate_loss(primitive("id", TransformStep{}), four_bins());
  CHECK(rep.loss == 0.0);
  CHECK_FALSE(rep.clamped);
  CHECK(rep.mi_after == rep.entropy_before);
}

TEST_CASE("constant loses the full entropy") {
  auto d = four_bins();
  const auto rep = estimate_loss(primitive("c", constant_step(0.0)), d);
  CHECK(rep.entropy_before == 2.0);  // four equiprobable symbols
  CHECK(rep.mi_after == 0.0);
  CHECK(rep.loss == 2.0);
}

TEST_CASE("merging four uniform bins into two loses exactly one bit") {
  const auto rep = estimate_loss(primitive("m", merge_step("x", 2)), four_bins());
  CHECK(rep.loss == 1.0);
  CHECK(rep.entropy_before == 2.0);
  CHECK(rep.mi_after == 1.0);
}

TEST_CASE("loss estimation preconditions") {
  DiscreteDataset empty = four_bins();
  empty.records.clear();
  CHECK_THROWS_AS(estimate_loss(primitive("id", TransformStep{}), empty),
                  std::invalid_argument);
  DiscreteDataset unbinned = four_bins();
  unbinned.binning.clear();
  CHECK_THROWS_AS(estimate_loss(primitive("id", TransformStep{}), unbinned),
                  std::invalid_argument);
}

TEST_CASE("mutual information stays within information bounds") {
  auto d = shop();
  const std::vector<Transformation> ts = {
      primitive("id", TransformStep{}),
      primitive("c", constant_step(1.0)),
      primitive("m", merge_step("price", 2)),
      primitive("p", project_step({"item"})),
      primitive("s", TransformStep{.kind = TransformKind::aggregateSum}),
  };
  for (const auto& t : ts) {
    const auto rep = estimate_loss(t, d);
    CHECK(rep.mi_after >= -1e-12);
    CHECK(rep.mi_after <= rep.entropy_before + 1e-12);
    CHECK(rep.loss >= 0.0);
    CHECK(rep.loss == doctest::Approx(rep.entropy_before - rep.mi_after).epsilon(1e-12));
  }
}

TEST_CASE("losses along a chain are subadditive") {
  auto d = shop();
  const auto m = primitive("m", merge_step("price", 2));
  const auto p = primitive("p", project_step({"item", "price"}));
  const auto c = primitive("c", constant_step(0.0));
  CHECK(check_subadditivity(m, p, d));
  CHECK(check_subadditivity(p, m, d));
  CHECK(check_subadditivity(m, c, d));
  CHECK(check_subadditivity(c, m, d));
  CHECK(check_subadditivity(p, c, d));
}

TEST_CASE("numeric cost scales with the class") {
  CHECK(numeric_cost(primitive("t", TransformStep{}), 7) == 7.0);
  CHECK(numeric_cost(primitive("t", TransformStep{}, "dom", "dom", CostClass::quadratic), 7) ==
        49.0);
}

TEST_CASE("selection weighs loss against cost") {
  auto d = four_bins();
  const std::vector<Transformation> ts = {
      primitive("c", constant_step(0.0)),     // loss 2, cost 4
      primitive("id", TransformStep{}),       // loss 0, cost 4
  };
  const auto sel = select_transformation(ts, d, 1.0);
  CHECK(sel.index == 1);
  CHECK(sel.score == 4.0);
  CHECK(sel.loss.loss == 0.0);
  // With lambda zero both score 4; the tie goes to the earlier candidate.
  CHECK(select_transformation(ts, d, 0.0).index == 0);
}

TEST_CASE("selection skips foreign domains and errors when nothing applies") {
  auto d = four_bins();
  const std::vector<Transformation> ts = {
      primitive("alien", TransformStep{}, "other", "other"),
      primitive("id", TransformStep{}),
  };
  CHECK(select_transformation(ts, d, 1.0).index == 1);
  CHECK_THROWS_AS(
      select_transformation({primitive("alien", TransformStep{}, "other", "other")}, d, 1.0),
      std::invalid_argument);
  CHECK_THROWS_AS(select_transformation({}, d, 1.0), std::invalid_argument);
}

namespace {

SimilarityTable seller_table() {
  SimilarityTable t;
  t.set("price", "cost", 0.9);
  t.set("quantity", "stock", 0.8);
  t.set("price", "stock", 0.1);
  t.set("quantity", "cost", 0.2);
  t.set("price", "price", 1.0);
  t.set("quantity", "quantity", 1.0);
  t.set("stock", "stock", 1.0);
  t.set("product", "product", 1.0, 0.0);
  for (const char* other : {"price", "cost", "stock", "quantity"})
    t.set("product", other, 0.0, 0.0);
  return t;
}

DiscreteDataset sales() {
  DiscreteDataset d;
  d.name = "sales";
  d.domain = "sales";
  d.schema.name = "sales";
  d.schema.attributes = {{"product", AttributeKind::categorical},
                         {"price", AttributeKind::numeric},
                         {"quantity", AttributeKind::numeric}};
  d.records = {{std::string("p1"), 10.0, 3.0},
               {std::string("p2"), 12.5, 1.0},
               {std::string("p3"), 20.0, 4.0}};
  return d;
}

DiscreteDataset inventory() {
  DiscreteDataset d;
  d.name = "inventory";
  d.domain = "inventory";
  d.schema.name = "inventory";
  d.schema.attributes = {{"product", AttributeKind::categorical},
                         {"cost", AttributeKind::numeric},
                         {"stock", AttributeKind::numeric}};
  d.records = {{std::string("p1"), 8.0, 50.0},
               {std::string("p2"), 10.0, 20.0},
               {std::string("p3"), 16.0, 7.0}};
  return d;
}

}  // namespace

TEST_CASE("integration unifies the two seller catalogues") {
  const auto di = sales();
  const auto dj = inventory();
  const std::vector<Transformation> ts = {
      primitive("t1", affine("cost", 1.25, 0.0, "price"), "inventory", "sales"),
  };
  const auto r = integrate(di, dj, ts, seller_table(), 0.1, 0.5);
  CHECK(r.candidate_index == 0);

  std::vector<std::string> attrs;
  for (const auto& a : r.unified.schema.attributes) attrs.push_back(a.name);
  CHECK(attrs == std::vector<std::string>{"product", "price", "quantity", "stock"});

  REQUIRE(r.unified.records.size() == 3);  // the scaled costs line up with prices
  CHECK(r.unified.records[0] == Record{std::string("p1"), 10.0, 3.0, 50.0});
  CHECK(r.unified.records[1] == Record{std::string("p2"), 12.5, 1.0, 20.0});
  CHECK(r.unified.records[2] == Record{std::string("p3"), 20.0, 4.0, 7.0});

  // product/price/quantity all map with similarity >= 0.5.
  CHECK(r.mapping.pairs.size() == 3);
  CHECK(r.objective == doctest::Approx(r.schema_distance + 0.1 * 3.0).epsilon(1e-12));
}

TEST_CASE("integration respects the compatibility gate") {
  const auto di = sales();
  const auto dj = inventory();
  // Identity candidate: cost/stock similarities to price/quantity are 0.9/0.8,
  // but an unmapped attribute two-thirds rule fails at high theta anyway once
  // similarities drop below a half.
  SimilarityTable weak;  // all cross sims default to zero
  const std::vector<Transformation> ts = {
      primitive("t1", affine("cost", 1.25, 0.0, "price"), "inventory", "sales"),
  };
  CHECK_THROWS_AS(integrate(di, dj, ts, weak, 0.1, 0.5), std::invalid_argument);
}

TEST_CASE("integration skips candidates with the wrong domains") {
  const auto di = sales();
  const auto dj = inventory();
  const std::vector<Transformation> ts = {
      primitive("wrong-src", TransformStep{}, "sales", "sales"),
      primitive("wrong-dst", TransformStep{}, "inventory", "inventory"),
      primitive("t1", affine("cost", 1.25, 0.0, "price"), "inventory", "sales"),
  };
  CHECK(integrate(di, dj, ts, seller_table(), 0.1, 0.5).candidate_index == 2);
  CHECK_THROWS_AS(integrate(di, dj, {}, seller_table(), 0.1, 0.5), std::invalid_argument);
}

TEST_CASE("integration picks the cheaper of two passing candidates") {
  const auto di = sales();
  const auto dj = inventory();
  auto cheap = primitive("cheap", affine("cost", 1.25, 0.0, "price"), "inventory", "sales");
  auto pricey = primitive("pricey", affine("cost", 1.25, 0.0, "price"), "inventory", "sales",
                          CostClass::quadratic);
  CHECK(integrate(di, dj, {pricey, cheap}, seller_table(), 0.1, 0.5).candidate_index == 1);
  // With lambda zero the objectives tie; the earlier candidate wins.
  CHECK(integrate(di, dj, {pricey, cheap}, seller_table(), 0.0, 0.5).candidate_index == 0);
}

TEST_CASE("natural join filters mismatches and deduplicates") {
  DiscreteDataset di;
  di.name = "left";
  di.domain = "L";
  di.schema.attributes = {{"k", AttributeKind::categorical}, {"v", AttributeKind::numeric}};
  di.records = {{std::string("a"), 1.0}, {std::string("a"), 1.0}, {std::string("b"), 2.0}};
  DiscreteDataset dj;
  dj.name = "right";
  dj.domain = "R";
  dj.schema.attributes = {{"k", AttributeKind::categorical}, {"w", AttributeKind::numeric}};
  dj.records = {{std::string("a"), 10.0}, {std::string("c"), 30.0}};
  SimilarityTable t;
  t.set("k", "k", 1.0);
  t.set("v", "w", 0.6);
  const std::vector<Transformation> ts = {primitive("id", TransformStep{}, "R", "L")};
  const auto r = integrate(di, dj, ts, t, 0.0, 0.5);
  // Duplicate (a,1) rows collapse; b and c never join.
  REQUIRE(r.unified.records.size() == 1);
  CHECK(r.unified.records[0] == Record{std::string("a"), 1.0, 10.0});
}

TEST_CASE("sinkhorn validates its input") {
  CHECK_THROWS_AS(sinkhorn_w2({0.5, 0.5}, {1.0}, {{0.0}, {0.0}}, 0.0, 10),
                  std::invalid_argument);
  CHECK_THROWS_AS(sinkhorn_w2({0.7, 0.5}, {1.0}, {{0.0}, {0.0}}, 1e-3, 10),
                  std::invalid_argument);
  CHECK_THROWS_AS(sinkhorn_w2({-0.5, 1.5}, {1.0}, {{0.0}, {0.0}}, 1e-3, 10),
                  std::invalid_argument);
  CHECK_THROWS_AS(sinkhorn_w2({1.0}, {1.0}, {{-1.0}}, 1e-3, 10), std::invalid_argument);
  CHECK_THROWS_AS(sinkhorn_w2({1.0}, {1.0}, {{0.0, 1.0}}, 1e-3, 10), std::invalid_argument);
}

TEST_CASE("transporting a distribution onto itself is free") {
  const std::vector<double> p = {0.25, 0.75};
  const auto r = sinkhorn_w2(p, p, {{0.0, 1.0}, {1.0, 0.0}}, 1e-3, 2000);
  CHECK(r.value < 0.05);
  // Marginals are honoured.
  CHECK(r.plan[0][0] + r.plan[0][1] == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(r.plan[0][0] + r.plan[1][0] == doctest::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("point masses pay the full ground distance") {
  // All mass moves from coordinate 0 to coordinate 3: cost 9, W2 = 3.
  const auto r = sinkhorn_w2({1.0, 0.0}, {0.0, 1.0},
                             {{0.0, 9.0}, {9.0, 0.0}}, 1e-3, 2000);
  CHECK(r.value == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(r.plan[0][1] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.plan[1][0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
}

TEST_CASE("sinkhorn tracks the exact optimum on random small instances") {
  Rng rng(606);
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t n = 2 + rng.next_below(2);
    const std::size_t m = 2 + rng.next_below(2);
    std::vector<double> px(n), qx(m), p(n), q(m);
    for (auto& v : px) v = rng.uniform(0.0, 4.0);
    for (auto& v : qx) v = rng.uniform(0.0, 4.0);
    double sp = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) sp += (p[i] = 0.2 + rng.next_double());
    for (std::size_t j = 0; j < m; ++j) sq += (q[j] = 0.2 + rng.next_double());
    for (auto& v : p) v /= sp;
    for (auto& v : q) v /= sq;
    // Renormalisation drift would trip the strict sum check; pin the last entry.
    double accp = 0.0, accq = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) accp += p[i];
    for (std::size_t j = 0; j + 1 < m; ++j) accq += q[j];
    p[n - 1] = 1.0 - accp;
    q[m - 1] = 1.0 - accq;
    std::vector<std::vector<double>> cost(n, std::vector<double>(m));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) cost[i][j] = (px[i] - qx[j]) * (px[i] - qx[j]);

    const double exact = exact_transport(p, q, cost);
    // At reg this small the alternating updates converge slowly; the large
    // budget is cheap on <= 4-point instances.
    const auto approx = sinkhorn_w2(p, q, cost, 1e-3, 200000);
    CHECK(std::abs(approx.value - exact) <= std::max(0.05 * exact, 0.02));
  }
}

TEST_CASE("vector edge aggregation is exact and order-insensitive") {
  EmbeddingVector a, b, c;
  a.values = {1e16, 1.0};
  b.values = {1.0, 2.0};
  c.values = {-1e16, 3.0};
  const EdgeMorphism sum{EdgeAggregation::sum, 3};
  const auto r1 = apply_hyperedge(sum, {a, b, c});
  const auto r2 = apply_hyperedge(sum, {c, a, b});
  const auto r3 = apply_hyperedge(sum, {b, c, a});
  CHECK(r1.values == r2.values);
  CHECK(r1.values == r3.values);

  const EdgeMorphism mx{EdgeAggregation::max, 3};
  CHECK(apply_hyperedge(mx, {a, b, c}).values == std::vector<double>{1e16, 3.0});
  const EdgeMorphism mean{EdgeAggregation::mean, 2};
  CHECK(apply_hyperedge(mean, {b, b}).values == std::vector<double>{1.0, 2.0});
}

TEST_CASE("vector edge aggregation validates arity and shape") {
  EmbeddingVector a, b;
  a.values = {1.0};
  b.values = {1.0, 2.0};
  CHECK_THROWS_AS(apply_hyperedge(EdgeMorphism{EdgeAggregation::sum, 3}, {a, a}),
                  std::invalid_argument);
  CHECK_THROWS_AS(apply_hyperedge(EdgeMorphism{EdgeAggregation::sum, 2}, {a, b}),
                  std::invalid_argument);
  CHECK_THROWS_AS(apply_hyperedge(EdgeMorphism{EdgeAggregation::set_union, 2}, {a, a}),
                  std::invalid_argument);
}

TEST_CASE("dataset union deduplicates rows across any input order") {
  DiscreteDataset a = four_bins(), b = four_bins();
  b.records = {{1.5}, {9.0}};
  const EdgeMorphism un{EdgeAggregation::set_union, 2};
  const auto r1 = apply_hyperedge(un, {a, b});
  const auto r2 = apply_hyperedge(un, {b, a});
  CHECK(r1.records == r2.records);
  CHECK(r1.records.size() == 5);  // 1.5 is shared

  DiscreteDataset other = four_bins();
  other.schema.attributes[0].name = "y";
  CHECK_THROWS_AS(apply_hyperedge(un, {a, other}), std::invalid_argument);
  CHECK_THROWS_AS(apply_hyperedge(EdgeMorphism{EdgeAggregation::sum, 2},
                                  std::vector<DiscreteDataset>{a, b}),
                  std::invalid_argument);
}
