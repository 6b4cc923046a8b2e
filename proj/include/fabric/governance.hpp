#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fabric/dataset.hpp"

namespace fabric {

// Thrown on malformed predicate text; carries the byte offset of the fault.
class PredicateParseError : public std::runtime_error {
 public:
  PredicateParseError(const std::string& what, std::size_t position);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

// Thrown when a predicate references a missing field or compares
// incompatible types.
class PredicateEvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class CompareOp { eq, ne, lt, le, gt, ge };
enum class FieldSpace { data, user };

struct UserContext {
  std::string id;
  std::string role;
  double clearance = 0.0;
  double at = 0.0;
};

// Expression tree.  The grammar is flat: 'and' and 'or' share one precedence
// level and associate left; 'not' binds to the following atom.
struct PredicateExpr {
  enum class Node { and_op, or_op, not_op, compare } node = Node::compare;
  std::shared_ptr<const PredicateExpr> lhs, rhs;  // and/or both, not -> lhs
  FieldSpace space = FieldSpace::data;
  std::string field;
  CompareOp op = CompareOp::eq;
  Value literal;
};

using PredicatePtr = std::shared_ptr<const PredicateExpr>;

PredicatePtr parse_predicate(const std::string& text);

using AttrValues = std::map<std::string, Value>;

bool evaluate_predicate(const PredicateExpr& expr, const AttrValues& data,
                        const UserContext& user);

struct Policy {
  std::string id;
  std::string text;
  PredicatePtr predicate;

  static Policy parse(std::string id, std::string text);
};

struct AccessDecision {
  bool granted = false;
  std::vector<std::string> failing;  // policy ids, ascending
};

// Grant iff every policy predicate holds (conjunction semantics).  A policy
// whose predicate cannot be evaluated against the presented context (missing
// field, type mismatch) counts as failed: access control fails closed.
AccessDecision evaluate_request(const AttrValues& data, const UserContext& user,
                                const std::vector<Policy>& policies);

enum class AggregateKind { sum, mean };

struct DpResult {
  double true_value = 0.0;
  double noisy_value = 0.0;
  double scale = 0.0;  // Laplace scale b = sensitivity / epsilon
};

// Laplace mechanism over the aggregate: noise drawn by inverse-CDF sampling
// from the seeded deterministic stream, giving pure epsilon-DP with standard
// deviation sqrt(2) * sensitivity / epsilon.
DpResult dp_aggregate(const std::vector<double>& values, double epsilon, double sensitivity,
                      std::uint64_t seed, AggregateKind kind);

}  // namespace fabric
