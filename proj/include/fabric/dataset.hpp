#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "fabric/schema.hpp"

namespace fabric {

// Cell value: numeric and temporal attributes hold doubles, categorical and
// text attributes hold strings.
using Value = std::variant<double, std::string>;
using Record = std::vector<Value>;

bool value_is_numeric(const Value& v);
std::string value_repr(const Value& v);  // canonical, lossless for doubles

// Ascending interior boundaries; bin index of x = number of edges <= x,
// so k edges define k+1 bins.
struct Binning {
  std::vector<double> edges;

  std::size_t bin_of(double x) const;
  std::size_t bin_count() const { return edges.size() + 1; }
};

struct DiscreteDataset {
  std::string name;
  std::string domain;  // transformation source/target tag
  Schema schema;
  std::vector<Record> records;
  std::map<std::string, Binning> binning;  // per numeric/temporal attribute

  std::size_t attribute_position(const std::string& attr) const;

  // Checks records against the schema (arity and per-kind value types) and
  // binning edges for monotonicity; throws on the first violation.
  void validate() const;

  // Canonical symbol for entropy estimation: numeric/temporal cells use the
  // bin index when the attribute is binned, the exact value otherwise.
  std::string record_symbol(const Record& r) const;
};

}  // namespace fabric
