#pragma once

#include <string>

#include "vppfra/types.hpp"

namespace vppfra {

// Reads and validates a scenario file (JSON, schema in docs/scenario-schema.md).
// Throws ParseError on malformed input, ValidationError on invariant violations.
VppScenario load_scenario(const std::string& path);

// Serializes a scenario. load_scenario(save_scenario(s)) round-trips all
// numeric fields bit-exactly.
void save_scenario(const VppScenario& vpp, const std::string& path);

std::string scenario_to_json(const VppScenario& vpp);
VppScenario scenario_from_json(const std::string& text);

}  // namespace vppfra
