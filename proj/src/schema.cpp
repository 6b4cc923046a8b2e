#include "fabric/schema.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace fabric {

bool Schema::has_attribute(const std::string& attr) const {
  for (const auto& a : attributes)
    if (a.name == attr) return true;
  return false;
}

const Attribute& Schema::attribute(const std::string& attr) const {
  for (const auto& a : attributes)
    if (a.name == attr) return a;
  throw std::invalid_argument("schema '" + name + "' has no attribute '" + attr + "'");
}

std::pair<std::string, std::string> SimilarityTable::key(const std::string& a,
                                                         const std::string& b) {
  return a <= b ? std::make_pair(a, b) : std::make_pair(b, a);
}

void SimilarityTable::set(const std::string& a, const std::string& b, double sim,
                          std::optional<double> weight) {
  if (sim < 0.0 || sim > 1.0)
    throw std::invalid_argument("similarity must lie in [0,1]");
  double w = weight.value_or(default_weight_);
  if (w < 0.0) throw std::invalid_argument("pair weight must be nonnegative");
  entries_[key(a, b)] = Entry{sim, w};
}

double SimilarityTable::sim(const std::string& a, const std::string& b) const {
  auto it = entries_.find(key(a, b));
  return it == entries_.end() ? default_sim_ : it->second.sim;
}

double SimilarityTable::weight(const std::string& a, const std::string& b) const {
  auto it = entries_.find(key(a, b));
  return it == entries_.end() ? default_weight_ : it->second.weight;
}

std::optional<std::string> AttributeMapping::target_of(const std::string& source) const {
  for (const auto& [s, t] : pairs)
    if (s == source) return t;
  return std::nullopt;
}

namespace {

void check_unique_names(const Schema& s) {
  std::set<std::string> seen;
  for (const auto& a : s.attributes)
    if (!seen.insert(a.name).second)
      throw std::invalid_argument("schema '" + s.name + "' repeats attribute '" + a.name + "'");
}

}  // namespace

double schema_distance(const Schema& si, const Schema& sj, const SimilarityTable& table) {
  check_unique_names(si);
  check_unique_names(sj);
  double total = 0.0;
  for (const auto& a : si.attributes)
    for (const auto& b : sj.attributes)
      total += table.weight(a.name, b.name) * (1.0 - table.sim(a.name, b.name));
  return total;
}

double schema_distance_matrix(const std::vector<std::vector<double>>& weights,
                              const std::vector<std::vector<double>>& sims) {
  if (weights.size() != sims.size())
    throw std::invalid_argument("weight/similarity matrices differ in row count");
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i].size() != sims[i].size())
      throw std::invalid_argument("weight/similarity matrices differ in shape");
    for (std::size_t j = 0; j < weights[i].size(); ++j)
      total += weights[i][j] * (1.0 - sims[i][j]);
  }
  return total;
}

AttributeMapping match_schemas_exact(const Schema& si, const Schema& sj,
                                     const SimilarityTable& table) {
  check_unique_names(si);
  check_unique_names(sj);
  const std::size_t n = si.attributes.size();
  const std::size_t m = sj.attributes.size();
  if (n > m)
    throw std::invalid_argument("exact matching requires the source schema to be no larger");
  if (n > 10)
    throw std::invalid_argument("exact matching limited to 10 source attributes");

  // Enumerate targets in name order: with strict improvement the first
  // maximal assignment found is the lexicographically smallest one.
  std::vector<std::string> targets;
  for (const auto& b : sj.attributes) targets.push_back(b.name);
  std::sort(targets.begin(), targets.end());

  std::vector<std::string> chosen(n), best_choice;
  std::vector<bool> used(m, false);
  double best = -1.0;

  // Optimistic bound: best unconstrained similarity for each remaining source.
  std::vector<double> max_sim(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& t : targets)
      max_sim[i] = std::max(max_sim[i], table.sim(si.attributes[i].name, t));
  std::vector<double> suffix_bound(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;) suffix_bound[i] = suffix_bound[i + 1] + max_sim[i];

  auto recurse = [&](auto&& self, std::size_t i, double acc) -> void {
    if (i == n) {
      if (acc > best) {
        best = acc;
        best_choice = chosen;
      }
      return;
    }
    if (acc + suffix_bound[i] < best) return;
    for (std::size_t t = 0; t < m; ++t) {
      if (used[t]) continue;
      used[t] = true;
      chosen[i] = targets[t];
      self(self, i + 1, acc + table.sim(si.attributes[i].name, targets[t]));
      used[t] = false;
    }
  };
  recurse(recurse, 0, 0.0);

  AttributeMapping out;
  out.score = n == 0 ? 0.0 : best;
  for (std::size_t i = 0; i < n; ++i)
    out.pairs.emplace_back(si.attributes[i].name, best_choice[i]);
  return out;
}

AttributeMapping match_schemas_greedy(const Schema& si, const Schema& sj,
                                      const SimilarityTable& table) {
  check_unique_names(si);
  check_unique_names(sj);
  if (si.attributes.size() > sj.attributes.size())
    throw std::invalid_argument("greedy matching requires the source schema to be no larger");

  struct Cand {
    double sim;
    std::string source;
    std::string target;
  };
  std::vector<Cand> cands;
  for (const auto& a : si.attributes)
    for (const auto& b : sj.attributes)
      cands.push_back({table.sim(a.name, b.name), a.name, b.name});
  std::sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
    if (x.sim != y.sim) return x.sim > y.sim;
    if (x.source != y.source) return x.source < y.source;
    return x.target < y.target;
  });

  std::set<std::string> src_used, dst_used;
  std::vector<std::pair<std::string, std::string>> picked;
  double score = 0.0;
  for (const auto& c : cands) {
    if (src_used.count(c.source) || dst_used.count(c.target)) continue;
    src_used.insert(c.source);
    dst_used.insert(c.target);
    picked.emplace_back(c.source, c.target);
    score += c.sim;
  }

  // Report pairs in source-schema order to keep output deterministic.
  AttributeMapping out;
  out.score = score;
  for (const auto& a : si.attributes)
    for (const auto& [s, t] : picked)
      if (s == a.name) out.pairs.emplace_back(s, t);
  return out;
}

CompatResult compat(const Schema& si, const Schema& sj, const AttributeMapping& mapping,
                    const SimilarityTable& table, double threshold) {
  if (threshold < 0.0 || threshold > 1.0)
    throw std::invalid_argument("compat threshold must lie in [0,1]");
  for (const auto& [s, t] : mapping.pairs) {
    if (!si.has_attribute(s))
      throw std::invalid_argument("mapping source '" + s + "' missing from schema");
    if (!sj.has_attribute(t))
      throw std::invalid_argument("mapping target '" + t + "' missing from schema");
  }
  std::size_t qualifying = 0;
  for (const auto& [s, t] : mapping.pairs)
    if (table.sim(s, t) >= 0.5) ++qualifying;
  CompatResult r;
  r.fraction = si.attributes.empty()
                   ? 0.0
                   : static_cast<double>(qualifying) / static_cast<double>(si.attributes.size());
  r.pass = r.fraction >= threshold;
  return r;
}

}  // namespace fabric
