#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vppfra/types.hpp"

namespace vppfra {

// How a learnable entry was pinned down by the data.
enum class Identified { Yes, No, Boundary };

const char* to_string(Identified v);

struct ParamInfo {
  std::string name;  // "<mine>.p_bc_min.<link>" | ".p_bc_max." | ".p_g_min" | ".p_g_max" | ".theta2."
  double value = 0.0;
  double box_lo = 0.0;
  double box_hi = 0.0;
  Identified identified = Identified::No;
};

// The unknown vector Xi across all mines, in canonical order: per mine all
// p_bc_min (link order), all p_bc_max, p_g_min, p_g_max, all theta2.
struct ParameterVector {
  std::vector<ParamInfo> entries;

  int size() const { return static_cast<int>(entries.size()); }
  int index_of(const std::string& name) const;
  const ParamInfo* find(const std::string& name) const;
  std::vector<double> values() const;

  // True values and search boxes taken from the scenario.
  static ParameterVector truth_of(const VppScenario& vpp);
  // Same boxes, values at box midpoints (the default initializer).
  static ParameterVector midpoint_of(const VppScenario& vpp);

  void clamp_to_box();
  void check_valid() const;  // throws ValidationError / InfeasibleStructure
};

// Canonical entry names for one mine, in LP hook order.
std::vector<std::string> param_names_for(const MineScenario& mine);

ParameterVector load_params(const std::string& path);
void save_params(const ParameterVector& pv, const std::string& path);
std::string params_to_json(const ParameterVector& pv);
ParameterVector params_from_json(const std::string& text);

}  // namespace vppfra
