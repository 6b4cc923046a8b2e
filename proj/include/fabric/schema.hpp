#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fabric {

enum class AttributeKind { numeric, categorical, temporal, text };

struct Attribute {
  std::string name;
  AttributeKind kind = AttributeKind::numeric;

  bool operator==(const Attribute&) const = default;
};

struct Schema {
  std::string name;
  std::vector<Attribute> attributes;  // unique names, declaration order kept

  bool has_attribute(const std::string& attr) const;
  const Attribute& attribute(const std::string& attr) const;
};

// Symmetric similarity/weight lookup over attribute-name pairs.  Pairs not
// present fall back to defaultSim / defaultWeight.
class SimilarityTable {
 public:
  SimilarityTable(double default_sim = 0.0, double default_weight = 1.0)
      : default_sim_(default_sim), default_weight_(default_weight) {}

  // sim must lie in [0,1]; weight must be >= 0.
  void set(const std::string& a, const std::string& b, double sim,
           std::optional<double> weight = std::nullopt);

  double sim(const std::string& a, const std::string& b) const;
  double weight(const std::string& a, const std::string& b) const;

  double default_sim() const { return default_sim_; }
  double default_weight() const { return default_weight_; }

 private:
  struct Entry {
    double sim;
    double weight;
  };
  static std::pair<std::string, std::string> key(const std::string& a,
                                                 const std::string& b);
  std::map<std::pair<std::string, std::string>, Entry> entries_;
  double default_sim_;
  double default_weight_;
};

// Injective attribute alignment from a source schema into a target schema.
struct AttributeMapping {
  std::vector<std::pair<std::string, std::string>> pairs;  // (source, target)
  double score = 0.0;

  std::optional<std::string> target_of(const std::string& source) const;
};

// Weighted all-pairs dissimilarity sum(a in si, b in sj) w(a,b) * (1 - sim(a,b)).
double schema_distance(const Schema& si, const Schema& sj, const SimilarityTable& table);

// Elementwise matrix form of the same quantity: sum_ij W[i][j] * (1 - S[i][j]).
// Throws if the two matrices are not the same (rectangular) shape.
double schema_distance_matrix(const std::vector<std::vector<double>>& weights,
                              const std::vector<std::vector<double>>& sims);

// Exhaustive optimal injective matching, maximising total similarity.
// Requires |si| <= |sj| and |si| <= 10.  Ties break toward the
// lexicographically smallest sequence of target names in source order.
AttributeMapping match_schemas_exact(const Schema& si, const Schema& sj,
                                     const SimilarityTable& table);

// Greedy matching: scan candidate pairs by similarity descending (ties by
// source then target name) and keep pairs that respect injectivity.
AttributeMapping match_schemas_greedy(const Schema& si, const Schema& sj,
                                      const SimilarityTable& table);

struct CompatResult {
  double fraction = 0.0;  // share of si attributes mapped with sim >= 0.5
  bool pass = false;      // fraction >= threshold
};

CompatResult compat(const Schema& si, const Schema& sj, const AttributeMapping& mapping,
                    const SimilarityTable& table, double threshold);

}  // namespace fabric
