#pragma once

#include <string>

#include "gridphase/grid_model.hpp"

namespace gridphase {

// Loads a network description from a JSON file. See docs/formats.md for the
// schema. The loader is strict: unknown fields, non-radial topology, missing
// buses and switchable non-participants are all rejected with
// std::runtime_error.
NetworkModel load_network(const std::string& path);

// Same, from an already parsed JSON text (used by tests and the validator).
NetworkModel parse_network(const std::string& json_text, const std::string& origin = "<memory>");

}  // namespace gridphase
