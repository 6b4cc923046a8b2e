#pragma once

#include <stdexcept>
#include <string>

#include "fabric/store.hpp"

namespace fabric {

// Raised on malformed fabric description files; the message names the
// offending section and field.
class DescriptionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parses a fabric description document (JSON text) into a store.  Top-level
// sections, all optional: datasets, transformations, metadata, hyperedges,
// policies, similarity, nodes, links, options.  Referential integrity across
// sections is enforced; structural violations of the fabric conditions are
// deliberately loadable so validate() can report them.
FabricStore parse_fabric(const std::string& text);

// Reads the file at `path` and parses it.
FabricStore load_fabric(const std::string& path);

}  // namespace fabric
