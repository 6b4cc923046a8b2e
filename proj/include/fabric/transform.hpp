#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fabric/dataset.hpp"
#include "fabric/vectorize.hpp"

namespace fabric {

enum class TransformKind { identity, affineScale, project, aggregateSum, binMerge, constant };
enum class CostClass { linear, quadratic };

std::string to_string(TransformKind k);

// One primitive rewriting step.  Only the fields of the declared kind are
// meaningful:
//   affineScale: attr, scale (nonzero), offset, optional rename_to
//   project:     keep (subset of attributes, original order preserved)
//   binMerge:    attr, merge_factor >= 1 (groups of adjacent bins collapse)
//   constant:    fill_value for numeric cells; strings become empty
struct TransformStep {
  TransformKind kind = TransformKind::identity;
  std::string attr;
  double scale = 1.0;
  double offset = 0.0;
  std::string rename_to;
  std::vector<std::string> keep;
  std::size_t merge_factor = 2;
  double fill_value = 0.0;
};

// A domain-to-domain mapping.  Declared transformations carry a single step;
// compose() concatenates step chains (fusing where the algebra allows), so
// the semigroup stays closed under composition.
struct Transformation {
  std::string id;
  std::string source_domain;
  std::string target_domain;
  CostClass cost_class = CostClass::linear;
  std::vector<TransformStep> steps;

  bool is_primitive() const { return steps.size() == 1; }
  TransformKind kind() const;  // single-step kind; throws on composites
  void validate_params() const;
};

// Applies the step chain to a copy of d.  Requires d.domain to equal the
// transformation's source domain.
DiscreteDataset apply(const Transformation& t, const DiscreteDataset& d);

// t2 after t1; requires t1.target_domain == t2.source_domain.
Transformation compose(const Transformation& t1, const Transformation& t2);

struct LossReport {
  double entropy_before = 0.0;  // H(d) in bits
  double mi_after = 0.0;        // I(t(d); d) in bits
  double loss = 0.0;            // H(d) - I(t(d); d), clamped at 0
  bool clamped = false;
};

// Plug-in entropies over the empirical joint distribution of
// (record, image-record).  Requires a nonempty dataset whose numeric and
// temporal attributes are binned.
LossReport estimate_loss(const Transformation& t, const DiscreteDataset& d);

// loss(t2 . t1, d) <= loss(t1, d) + loss(t2, t1(d)) + eps
bool check_subadditivity(const Transformation& t1, const Transformation& t2,
                         const DiscreteDataset& d, double eps = 1e-9);

double numeric_cost(const Transformation& t, std::size_t record_count);

struct SelectionResult {
  std::size_t index = 0;   // position in the candidate list
  double score = 0.0;      // numeric cost + lambda * loss
  LossReport loss;
};

// argmin over applicable candidates of numeric_cost + lambda * loss; ties
// resolve to the earlier candidate.  Candidates whose source domain does not
// match d are skipped; errors when none applies or the list is empty.
SelectionResult select_transformation(const std::vector<Transformation>& candidates,
                                      const DiscreteDataset& d, double lambda);

struct IntegrationResult {
  DiscreteDataset unified;
  std::size_t candidate_index = 0;
  AttributeMapping mapping;      // alignment between di and the transformed dj
  double schema_distance = 0.0;  // between di and the transformed dj
  double objective = 0.0;        // distance + lambda * numeric cost
};

// Picks the candidate minimising schema distance + lambda * cost among those
// whose transformed schema passes compat() at `theta`, then merges: schemas
// union by attribute name (di attributes first), records natural-join on the
// shared attributes with first-seen deduplication.
IntegrationResult integrate(const DiscreteDataset& di, const DiscreteDataset& dj,
                            const std::vector<Transformation>& candidates,
                            const SimilarityTable& table, double lambda, double theta);

struct TransportPlan {
  double value = 0.0;  // sqrt(<plan, cost>)
  std::vector<std::vector<double>> plan;
};

// Entropic optimal transport between discrete distributions p and q under a
// squared-distance cost matrix, solved by log-domain Sinkhorn iterations.
TransportPlan sinkhorn_w2(const std::vector<double>& p, const std::vector<double>& q,
                          const std::vector<std::vector<double>>& cost, double reg,
                          std::size_t iters);

enum class EdgeAggregation { sum, mean, max, set_union };

struct EdgeMorphism {
  EdgeAggregation aggregation = EdgeAggregation::sum;
  std::size_t arity = 0;  // expected input count (the edge's tail size)
};

// Order-insensitive aggregation over the edge inputs: inputs are sorted by
// canonical content key before reduction, so any permutation produces a
// bit-identical result.  set_union applies to datasets only.
EmbeddingVector apply_hyperedge(const EdgeMorphism& m,
                                const std::vector<EmbeddingVector>& inputs);
DiscreteDataset apply_hyperedge(const EdgeMorphism& m,
                                const std::vector<DiscreteDataset>& inputs);

}  // namespace fabric
