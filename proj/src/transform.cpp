#include "fabric/transform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "fabric/rng.hpp"

namespace fabric {

std::string to_string(TransformKind k) {
  switch (k) {
    case TransformKind::identity: return "identity";
    case TransformKind::affineScale: return "affineScale";
    case TransformKind::project: return "project";
    case TransformKind::aggregateSum: return "aggregateSum";
    case TransformKind::binMerge: return "binMerge";
    case TransformKind::constant: return "constant";
  }
  return "?";
}

TransformKind Transformation::kind() const {
  if (!is_primitive())
    throw std::logic_error("transformation '" + id + "' is a composite chain");
  return steps.front().kind;
}

void Transformation::validate_params() const {
  if (steps.empty()) throw std::invalid_argument("transformation '" + id + "' has no steps");
  for (const auto& s : steps) {
    switch (s.kind) {
      case TransformKind::affineScale:
        if (s.scale == 0.0 || !std::isfinite(s.scale) || !std::isfinite(s.offset))
          throw std::invalid_argument("transformation '" + id + "': affine scale must be nonzero");
        if (s.attr.empty())
          throw std::invalid_argument("transformation '" + id + "': affine needs an attribute");
        break;
      case TransformKind::project:
        if (s.keep.empty())
          throw std::invalid_argument("transformation '" + id + "': projection keeps nothing");
        break;
      case TransformKind::binMerge:
        if (s.merge_factor < 1)
          throw std::invalid_argument("transformation '" + id + "': merge factor must be >= 1");
        if (s.attr.empty())
          throw std::invalid_argument("transformation '" + id + "': binMerge needs an attribute");
        break;
      case TransformKind::constant:
        if (!std::isfinite(s.fill_value))
          throw std::invalid_argument("transformation '" + id + "': non-finite fill value");
        break;
      case TransformKind::identity:
      case TransformKind::aggregateSum:
        break;
    }
  }
}

namespace {

void apply_step(const TransformStep& s, DiscreteDataset& d) {
  switch (s.kind) {
    case TransformKind::identity:
      return;
    case TransformKind::affineScale: {
      std::size_t pos = d.attribute_position(s.attr);
      const auto kind = d.schema.attributes[pos].kind;
      if (kind != AttributeKind::numeric && kind != AttributeKind::temporal)
        throw std::invalid_argument("affine step targets non-numeric attribute '" + s.attr + "'");
      for (auto& r : d.records) {
        double& v = std::get<double>(r[pos]);
        v = s.scale * v + s.offset;
      }
      auto bin_it = d.binning.find(s.attr);
      if (bin_it != d.binning.end()) {
        for (double& e : bin_it->second.edges) e = s.scale * e + s.offset;
        if (s.scale < 0.0)
          std::reverse(bin_it->second.edges.begin(), bin_it->second.edges.end());
      }
      if (!s.rename_to.empty() && s.rename_to != s.attr) {
        if (d.schema.has_attribute(s.rename_to))
          throw std::invalid_argument("affine rename collides with attribute '" + s.rename_to + "'");
        d.schema.attributes[pos].name = s.rename_to;
        if (bin_it != d.binning.end()) {
          Binning moved = bin_it->second;
          d.binning.erase(bin_it);
          d.binning[s.rename_to] = std::move(moved);
        }
      }
      return;
    }
    case TransformKind::project: {
      std::vector<std::size_t> keep_pos;
      std::set<std::string> wanted(s.keep.begin(), s.keep.end());
      for (const auto& attr : s.keep) d.attribute_position(attr);  // existence check
      Schema out_schema;
      out_schema.name = d.schema.name;
      for (std::size_t i = 0; i < d.schema.attributes.size(); ++i) {
        if (!wanted.count(d.schema.attributes[i].name)) continue;
        keep_pos.push_back(i);
        out_schema.attributes.push_back(d.schema.attributes[i]);
      }
      std::vector<Record> out_records;
      out_records.reserve(d.records.size());
      for (const auto& r : d.records) {
        Record nr;
        for (std::size_t i : keep_pos) nr.push_back(r[i]);
        out_records.push_back(std::move(nr));
      }
      std::map<std::string, Binning> out_binning;
      for (const auto& a : out_schema.attributes) {
        auto it = d.binning.find(a.name);
        if (it != d.binning.end()) out_binning[a.name] = it->second;
      }
      d.schema = std::move(out_schema);
      d.records = std::move(out_records);
      d.binning = std::move(out_binning);
      return;
    }
    case TransformKind::aggregateSum: {
      Schema out_schema;
      out_schema.name = d.schema.name;
      std::vector<std::size_t> numeric_pos;
      for (std::size_t i = 0; i < d.schema.attributes.size(); ++i) {
        const auto kind = d.schema.attributes[i].kind;
        if (kind != AttributeKind::numeric && kind != AttributeKind::temporal) continue;
        numeric_pos.push_back(i);
        out_schema.attributes.push_back(d.schema.attributes[i]);
      }
      if (numeric_pos.empty())
        throw std::invalid_argument("aggregateSum needs at least one numeric attribute");
      Record sum(numeric_pos.size(), 0.0);
      for (const auto& r : d.records)
        for (std::size_t i = 0; i < numeric_pos.size(); ++i)
          std::get<double>(sum[i]) += std::get<double>(r[numeric_pos[i]]);
      d.schema = std::move(out_schema);
      d.records.assign(1, std::move(sum));
      d.binning.clear();  // sums live outside the original bin ranges
      return;
    }
    case TransformKind::binMerge: {
      std::size_t pos = d.attribute_position(s.attr);
      auto it = d.binning.find(s.attr);
      if (it == d.binning.end())
        throw std::invalid_argument("binMerge needs binning on attribute '" + s.attr + "'");
      const Binning& old = it->second;
      std::size_t merged_count = (old.bin_count() + s.merge_factor - 1) / s.merge_factor;
      for (auto& r : d.records) {
        double& v = std::get<double>(r[pos]);
        v = static_cast<double>(old.bin_of(v) / s.merge_factor);
      }
      Binning nb;
      for (std::size_t i = 0; i + 1 < merged_count; ++i)
        nb.edges.push_back(static_cast<double>(i) + 0.5);
      d.binning[s.attr] = std::move(nb);
      return;
    }
    case TransformKind::constant: {
      for (auto& r : d.records)
        for (auto& v : r) {
          if (std::holds_alternative<double>(v))
            v = s.fill_value;
          else
            v = std::string();
        }
      return;
    }
  }
}

}  // namespace

DiscreteDataset apply(const Transformation& t, const DiscreteDataset& d) {
  t.validate_params();
  if (d.domain != t.source_domain)
    throw std::invalid_argument("transformation '" + t.id + "' expects domain '" +
                                t.source_domain + "' but dataset '" + d.name + "' is in '" +
                                d.domain + "'");
  DiscreteDataset out = d;
  for (const auto& s : t.steps) apply_step(s, out);
  out.domain = t.target_domain;
  return out;
}

Transformation compose(const Transformation& t1, const Transformation& t2) {
  if (t1.target_domain != t2.source_domain)
    throw std::invalid_argument("cannot compose '" + t2.id + "' after '" + t1.id +
                                "': domain chain broken");
  Transformation out;
  out.id = t2.id + "*" + t1.id;
  out.source_domain = t1.source_domain;
  out.target_domain = t2.target_domain;
  out.cost_class = (t1.cost_class == CostClass::quadratic ||
                    t2.cost_class == CostClass::quadratic)
                       ? CostClass::quadratic
                       : CostClass::linear;
  for (const auto& s : t1.steps) out.steps.push_back(s);
  for (const auto& s : t2.steps) out.steps.push_back(s);

  // Peephole fusion keeps chains short where the algebra is closed:
  // identities vanish and adjacent affine steps over the same attribute fold.
  std::vector<TransformStep> fused;
  for (const auto& s : out.steps) {
    if (s.kind == TransformKind::identity) continue;
    if (s.kind == TransformKind::affineScale && !fused.empty()) {
      TransformStep& prev = fused.back();
      const std::string prev_out = prev.rename_to.empty() ? prev.attr : prev.rename_to;
      if (prev.kind == TransformKind::affineScale && prev_out == s.attr) {
        prev.scale = s.scale * prev.scale;
        prev.offset = s.scale * prev.offset + s.offset;
        prev.rename_to = s.rename_to.empty() ? prev.rename_to : s.rename_to;
        continue;
      }
    }
    fused.push_back(s);
  }
  if (fused.empty()) fused.push_back(TransformStep{});  // pure identity chain
  out.steps = std::move(fused);
  return out;
}

namespace {

// Entropy in bits from a multiset of counts.  Counts are sorted first so the
// floating-point sum is independent of symbol enumeration order; identical
// count multisets therefore produce bit-identical entropies.
double entropy_bits(std::vector<std::size_t> counts) {
  std::sort(counts.begin(), counts.end());
  double total = 0.0;
  for (std::size_t c : counts) total += static_cast<double>(c);
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    double p = static_cast<double>(c) / total;
    h -= p * std::log2(p);
  }
  return h;
}

void require_binned(const DiscreteDataset& d) {
  for (const auto& a : d.schema.attributes) {
    bool numeric = a.kind == AttributeKind::numeric || a.kind == AttributeKind::temporal;
    if (numeric && !d.binning.count(a.name))
      throw std::invalid_argument("dataset '" + d.name + "' attribute '" + a.name +
                                  "' must be binned before loss estimation");
  }
}

}  // namespace

LossReport estimate_loss(const Transformation& t, const DiscreteDataset& d) {
  if (d.records.empty())
    throw std::invalid_argument("loss estimation needs a nonempty dataset");
  require_binned(d);

  DiscreteDataset out = apply(t, d);
  // Row lineage: record-wise steps keep row i at i; aggregateSum folds every
  // row into the single output row.
  bool aggregated = false;
  for (const auto& s : t.steps) aggregated |= s.kind == TransformKind::aggregateSum;

  std::map<std::string, std::size_t> cx, cy, cxy;
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    std::string sx = d.record_symbol(d.records[i]);
    std::string sy = out.record_symbol(out.records[aggregated ? 0 : i]);
    ++cx[sx];
    ++cy[sy];
    ++cxy[sx + '\x1e' + sy];
  }
  auto counts = [](const std::map<std::string, std::size_t>& m) {
    std::vector<std::size_t> v;
    v.reserve(m.size());
    for (const auto& [_, c] : m) v.push_back(c);
    return v;
  };
  double hx = entropy_bits(counts(cx));
  double hy = entropy_bits(counts(cy));
  double hxy = entropy_bits(counts(cxy));

  LossReport rep;
  rep.entropy_before = hx;
  rep.mi_after = hx + hy - hxy;
  double raw = hxy - hy;  // == H(d) - I(t(d); d)
  rep.clamped = raw < 0.0;
  rep.loss = rep.clamped ? 0.0 : raw;
  return rep;
}

bool check_subadditivity(const Transformation& t1, const Transformation& t2,
                         const DiscreteDataset& d, double eps) {
  Transformation chained = compose(t1, t2);
  double lhs = estimate_loss(chained, d).loss;
  DiscreteDataset mid = apply(t1, d);
  double rhs = estimate_loss(t1, d).loss + estimate_loss(t2, mid).loss;
  return lhs <= rhs + eps;
}

double numeric_cost(const Transformation& t, std::size_t record_count) {
  double n = static_cast<double>(record_count);
  return t.cost_class == CostClass::quadratic ? n * n : n;
}

SelectionResult select_transformation(const std::vector<Transformation>& candidates,
                                      const DiscreteDataset& d, double lambda) {
  if (candidates.empty()) throw std::invalid_argument("no candidate transformations");
  std::optional<SelectionResult> best;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].source_domain != d.domain) continue;
    LossReport rep = estimate_loss(candidates[i], d);
    double score = numeric_cost(candidates[i], d.records.size()) + lambda * rep.loss;
    if (!best || score < best->score) best = SelectionResult{i, score, rep};
  }
  if (!best)
    throw std::invalid_argument("no candidate transformation applies to domain '" +
                                d.domain + "'");
  return *best;
}

namespace {

// Match the smaller schema into the larger one and report pairs with the
// di-side attribute first.
AttributeMapping align_schemas(const Schema& di, const Schema& dj,
                               const SimilarityTable& table) {
  if (di.attributes.size() <= dj.attributes.size())
    return match_schemas_greedy(di, dj, table);
  AttributeMapping inv = match_schemas_greedy(dj, di, table);
  AttributeMapping out;
  out.score = inv.score;
  for (const auto& [s, t] : inv.pairs) out.pairs.emplace_back(t, s);
  return out;
}

}  // namespace

IntegrationResult integrate(const DiscreteDataset& di, const DiscreteDataset& dj,
                            const std::vector<Transformation>& candidates,
                            const SimilarityTable& table, double lambda, double theta) {
  if (candidates.empty()) throw std::invalid_argument("no candidate transformations");

  std::optional<IntegrationResult> best;
  std::optional<DiscreteDataset> best_dj;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const Transformation& t = candidates[i];
    if (t.source_domain != dj.domain || t.target_domain != di.domain) continue;
    DiscreteDataset dj2 = apply(t, dj);
    AttributeMapping mapping = align_schemas(di.schema, dj2.schema, table);
    CompatResult cr = compat(di.schema, dj2.schema, mapping, table, theta);
    if (!cr.pass) continue;
    double dist = schema_distance(di.schema, dj2.schema, table);
    double objective = dist + lambda * numeric_cost(t, dj.records.size());
    if (!best || objective < best->objective) {
      IntegrationResult r;
      r.candidate_index = i;
      r.mapping = std::move(mapping);
      r.schema_distance = dist;
      r.objective = objective;
      best = std::move(r);
      best_dj = std::move(dj2);
    }
  }
  if (!best)
    throw std::invalid_argument("no candidate passes the compatibility threshold");

  // Union schema: di attributes first, then transformed-dj attributes whose
  // names are new.  Shared names join records naturally (equal values on all
  // shared attributes); duplicates collapse in first-seen order.
  const DiscreteDataset& dj2 = *best_dj;
  DiscreteDataset unified;
  unified.name = di.name + "+" + dj2.name;
  unified.domain = di.domain;
  unified.schema.name = unified.name;
  unified.schema.attributes = di.schema.attributes;
  std::vector<std::string> shared;
  std::vector<std::string> fresh;
  for (const auto& a : dj2.schema.attributes) {
    if (di.schema.has_attribute(a.name))
      shared.push_back(a.name);
    else {
      fresh.push_back(a.name);
      unified.schema.attributes.push_back(a);
    }
  }
  unified.binning = di.binning;
  for (const auto& name : fresh) {
    auto it = dj2.binning.find(name);
    if (it != dj2.binning.end()) unified.binning[name] = it->second;
  }

  std::set<std::string> seen;
  for (const auto& ri : di.records) {
    for (const auto& rj : dj2.records) {
      bool match = true;
      for (const auto& name : shared)
        match &= ri[di.attribute_position(name)] == rj[dj2.attribute_position(name)];
      if (!match) continue;
      Record merged = ri;
      for (const auto& name : fresh) merged.push_back(rj[dj2.attribute_position(name)]);
      std::string key;
      for (const auto& v : merged) key += value_repr(v) + '\x1f';
      if (seen.insert(key).second) unified.records.push_back(std::move(merged));
    }
  }
  best->unified = std::move(unified);
  return *best;
}

TransportPlan sinkhorn_w2(const std::vector<double>& p, const std::vector<double>& q,
                          const std::vector<std::vector<double>>& cost, double reg,
                          std::size_t iters) {
  if (reg <= 0.0) throw std::invalid_argument("sinkhorn regulariser must be positive");
  if (p.empty() || q.empty()) throw std::invalid_argument("sinkhorn needs nonempty marginals");
  if (cost.size() != p.size()) throw std::invalid_argument("cost matrix row count mismatch");
  double sp = 0.0, sq = 0.0;
  for (double x : p) {
    if (x < 0.0) throw std::invalid_argument("negative mass in p");
    sp += x;
  }
  for (double x : q) {
    if (x < 0.0) throw std::invalid_argument("negative mass in q");
    sq += x;
  }
  if (std::abs(sp - 1.0) > 1e-9 || std::abs(sq - 1.0) > 1e-9)
    throw std::invalid_argument("sinkhorn marginals must sum to 1");
  for (const auto& row : cost) {
    if (row.size() != q.size()) throw std::invalid_argument("cost matrix column count mismatch");
    for (double c : row)
      if (!(c >= 0.0) || !std::isfinite(c))
        throw std::invalid_argument("cost entries must be finite and nonnegative");
  }

  // Zero-mass atoms are excluded from the iteration and restored as zero
  // rows/columns of the plan.
  std::vector<std::size_t> pi, qi;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) pi.push_back(i);
  for (std::size_t j = 0; j < q.size(); ++j)
    if (q[j] > 0.0) qi.push_back(j);

  const std::size_t n = pi.size(), m = qi.size();
  std::vector<double> logp(n), logq(m);
  for (std::size_t i = 0; i < n; ++i) logp[i] = std::log(p[pi[i]]);
  for (std::size_t j = 0; j < m; ++j) logq[j] = std::log(q[qi[j]]);

  std::vector<double> f(n, 0.0), g(m, 0.0);
  auto lse = [](const std::vector<double>& xs) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double x : xs) mx = std::max(mx, x);
    double s = 0.0;
    for (double x : xs) s += std::exp(x - mx);
    return mx + std::log(s);
  };

  std::vector<double> buf(std::max(n, m));
  for (std::size_t it = 0; it < iters; ++it) {
    for (std::size_t j = 0; j < m; ++j) {
      buf.resize(n);
      for (std::size_t i = 0; i < n; ++i)
        buf[i] = (f[i] - cost[pi[i]][qi[j]]) / reg;
      g[j] = reg * (logq[j] - lse(buf));
    }
    for (std::size_t i = 0; i < n; ++i) {
      buf.resize(m);
      for (std::size_t j = 0; j < m; ++j)
        buf[j] = (g[j] - cost[pi[i]][qi[j]]) / reg;
      f[i] = reg * (logp[i] - lse(buf));
    }
  }

  TransportPlan out;
  out.plan.assign(p.size(), std::vector<double>(q.size(), 0.0));
  double inner = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double pij = std::exp((f[i] + g[j] - cost[pi[i]][qi[j]]) / reg);
      out.plan[pi[i]][qi[j]] = pij;
      inner += pij * cost[pi[i]][qi[j]];
    }
  out.value = std::sqrt(std::max(0.0, inner));
  return out;
}

namespace {

std::string vector_key(const EmbeddingVector& v) {
  std::string key;
  for (double x : v.values) key += value_repr(Value{x}) + ',';
  return key;
}

std::string dataset_key(const DiscreteDataset& d) {
  std::string key = d.name + '\x1e';
  for (const auto& r : d.records) {
    for (const auto& v : r) key += value_repr(v) + '\x1f';
    key += '\x1e';
  }
  return key;
}

}  // namespace

EmbeddingVector apply_hyperedge(const EdgeMorphism& m,
                                const std::vector<EmbeddingVector>& inputs) {
  if (inputs.size() != m.arity)
    throw std::invalid_argument("edge morphism expects " + std::to_string(m.arity) +
                                " inputs, got " + std::to_string(inputs.size()));
  if (inputs.empty()) throw std::invalid_argument("edge morphism needs at least one input");
  if (m.aggregation == EdgeAggregation::set_union)
    throw std::invalid_argument("set_union aggregation applies to datasets, not vectors");
  const std::size_t dim = inputs[0].dim();
  for (const auto& v : inputs)
    if (v.dim() != dim) throw std::invalid_argument("edge morphism inputs differ in dimension");

  // Canonical order: ascending content key, so summation order (and hence
  // every rounding decision) is identical for any permutation of inputs.
  std::vector<const EmbeddingVector*> ordered;
  for (const auto& v : inputs) ordered.push_back(&v);
  std::sort(ordered.begin(), ordered.end(),
            [](const EmbeddingVector* a, const EmbeddingVector* b) {
              return vector_key(*a) < vector_key(*b);
            });

  EmbeddingVector out;
  out.values.assign(dim, m.aggregation == EdgeAggregation::max
                             ? -std::numeric_limits<double>::infinity()
                             : 0.0);
  for (const EmbeddingVector* v : ordered)
    for (std::size_t i = 0; i < dim; ++i) {
      if (m.aggregation == EdgeAggregation::max)
        out.values[i] = std::max(out.values[i], v->values[i]);
      else
        out.values[i] += v->values[i];
    }
  if (m.aggregation == EdgeAggregation::mean)
    for (auto& x : out.values) x /= static_cast<double>(inputs.size());
  return out;
}

DiscreteDataset apply_hyperedge(const EdgeMorphism& m,
                                const std::vector<DiscreteDataset>& inputs) {
  if (inputs.size() != m.arity)
    throw std::invalid_argument("edge morphism expects " + std::to_string(m.arity) +
                                " inputs, got " + std::to_string(inputs.size()));
  if (inputs.empty()) throw std::invalid_argument("edge morphism needs at least one input");
  if (m.aggregation != EdgeAggregation::set_union)
    throw std::invalid_argument("dataset edges support set_union aggregation only");
  for (const auto& d : inputs)
    if (d.schema.attributes != inputs[0].schema.attributes)
      throw std::invalid_argument("set_union inputs must share a schema");

  std::vector<const DiscreteDataset*> ordered;
  for (const auto& d : inputs) ordered.push_back(&d);
  std::sort(ordered.begin(), ordered.end(),
            [](const DiscreteDataset* a, const DiscreteDataset* b) {
              return dataset_key(*a) < dataset_key(*b);
            });

  DiscreteDataset out;
  out.name = "union";
  out.domain = inputs[0].domain;
  out.schema = inputs[0].schema;
  out.binning = inputs[0].binning;
  std::vector<std::pair<std::string, Record>> rows;
  for (const DiscreteDataset* d : ordered)
    for (const auto& r : d->records) {
      std::string key;
      for (const auto& v : r) key += value_repr(v) + '\x1f';
      rows.emplace_back(std::move(key), r);
    }
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::string last;
  for (auto& [key, rec] : rows) {
    if (!out.records.empty() && key == last) continue;
    out.records.push_back(std::move(rec));
    last = key;
  }
  return out;
}

}  // namespace fabric
