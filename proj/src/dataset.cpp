#include "fabric/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace fabric {

bool value_is_numeric(const Value& v) { return std::holds_alternative<double>(v); }

std::string value_repr(const Value& v) {
  if (const double* d = std::get_if<double>(&v)) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", *d);
    return buf;
  }
  return std::get<std::string>(v);
}

std::size_t Binning::bin_of(double x) const {
  return static_cast<std::size_t>(
      std::upper_bound(edges.begin(), edges.end(), x) - edges.begin());
}

std::size_t DiscreteDataset::attribute_position(const std::string& attr) const {
  for (std::size_t i = 0; i < schema.attributes.size(); ++i)
    if (schema.attributes[i].name == attr) return i;
  throw std::invalid_argument("dataset '" + name + "' has no attribute '" + attr + "'");
}

void DiscreteDataset::validate() const {
  std::vector<bool> numeric_kind;
  for (const auto& a : schema.attributes)
    numeric_kind.push_back(a.kind == AttributeKind::numeric || a.kind == AttributeKind::temporal);

  for (std::size_t r = 0; r < records.size(); ++r) {
    if (records[r].size() != schema.attributes.size())
      throw std::invalid_argument("dataset '" + name + "' record " + std::to_string(r) +
                                  " does not match the schema arity");
    for (std::size_t c = 0; c < records[r].size(); ++c) {
      bool is_num = value_is_numeric(records[r][c]);
      if (is_num != numeric_kind[c])
        throw std::invalid_argument("dataset '" + name + "' record " + std::to_string(r) +
                                    " has a wrong value type for attribute '" +
                                    schema.attributes[c].name + "'");
      if (is_num && !std::isfinite(std::get<double>(records[r][c])))
        throw std::invalid_argument("dataset '" + name + "' record " + std::to_string(r) +
                                    " holds a non-finite number");
    }
  }
  for (const auto& [attr, b] : binning) {
    std::size_t pos = attribute_position(attr);
    if (!numeric_kind[pos])
      throw std::invalid_argument("dataset '" + name + "' bins non-numeric attribute '" +
                                  attr + "'");
    if (!std::is_sorted(b.edges.begin(), b.edges.end()) ||
        std::adjacent_find(b.edges.begin(), b.edges.end()) != b.edges.end())
      throw std::invalid_argument("dataset '" + name + "' has non-increasing bin edges for '" +
                                  attr + "'");
  }
}

std::string DiscreteDataset::record_symbol(const Record& r) const {
  std::string sym;
  for (std::size_t c = 0; c < r.size(); ++c) {
    if (c > 0) sym += '\x1f';
    if (const double* d = std::get_if<double>(&r[c])) {
      auto it = binning.find(schema.attributes[c].name);
      if (it != binning.end())
        sym += '#' + std::to_string(it->second.bin_of(*d));
      else
        sym += value_repr(r[c]);
    } else {
      sym += std::get<std::string>(r[c]);
    }
  }
  return sym;
}

}  // namespace fabric
