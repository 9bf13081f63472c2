#include "vppfra/params.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vppfra/errors.hpp"

namespace vppfra {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

const char* to_string(Identified v) {
  switch (v) {
    case Identified::Yes: return "yes";
    case Identified::No: return "no";
    case Identified::Boundary: return "boundary";
  }
  return "?";
}

int ParameterVector::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < entries.size(); ++i)
    if (entries[i].name == name) return static_cast<int>(i);
  return -1;
}

const ParamInfo* ParameterVector::find(const std::string& name) const {
  int i = index_of(name);
  return i < 0 ? nullptr : &entries[i];
}

std::vector<double> ParameterVector::values() const {
  std::vector<double> v(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) v[i] = entries[i].value;
  return v;
}

std::vector<std::string> param_names_for(const MineScenario& mine) {
  std::vector<std::string> names;
  for (const auto& l : mine.bc_links) names.push_back(mine.id + ".p_bc_min." + l.id);
  for (const auto& l : mine.bc_links) names.push_back(mine.id + ".p_bc_max." + l.id);
  names.push_back(mine.id + ".p_g_min");
  names.push_back(mine.id + ".p_g_max");
  for (const auto& l : mine.bc_links) names.push_back(mine.id + ".theta2." + l.id);
  return names;
}

namespace {

SearchBox default_box(double v) {
  double half = 0.5 * std::abs(v) + 1.0;
  return {v - half, v + half};
}

void append_mine(ParameterVector& pv, const MineScenario& mine) {
  const bool boxed = !mine.xi_box.theta2.empty();
  auto add = [&pv](const std::string& name, double value, SearchBox box) {
    pv.entries.push_back({name, value, box.lo, box.hi, Identified::No});
  };
  for (std::size_t j = 0; j < mine.bc_links.size(); ++j)
    add(mine.id + ".p_bc_min." + mine.bc_links[j].id, mine.bc_links[j].power_min,
        boxed ? mine.xi_box.p_bc_min[j] : default_box(mine.bc_links[j].power_min));
  for (std::size_t j = 0; j < mine.bc_links.size(); ++j)
    add(mine.id + ".p_bc_max." + mine.bc_links[j].id, mine.bc_links[j].power_max,
        boxed ? mine.xi_box.p_bc_max[j] : default_box(mine.bc_links[j].power_max));
  add(mine.id + ".p_g_min", mine.grid_min, boxed ? mine.xi_box.p_g_min : default_box(mine.grid_min));
  add(mine.id + ".p_g_max", mine.grid_max, boxed ? mine.xi_box.p_g_max : default_box(mine.grid_max));
  for (std::size_t j = 0; j < mine.bc_links.size(); ++j)
    add(mine.id + ".theta2." + mine.bc_links[j].id, mine.bc_links[j].theta2,
        boxed ? mine.xi_box.theta2[j] : default_box(mine.bc_links[j].theta2));
}

}  // namespace

ParameterVector ParameterVector::truth_of(const VppScenario& vpp) {
  ParameterVector pv;
  for (const auto& mine : vpp.mines) append_mine(pv, mine);
  return pv;
}

ParameterVector ParameterVector::midpoint_of(const VppScenario& vpp) {
  ParameterVector pv = truth_of(vpp);
  for (auto& e : pv.entries) e.value = 0.5 * (e.box_lo + e.box_hi);
  return pv;
}

void ParameterVector::clamp_to_box() {
  for (auto& e : entries) e.value = std::clamp(e.value, e.box_lo, e.box_hi);
}

void ParameterVector::check_valid() const {
  for (const auto& e : entries) {
    if (e.box_lo > e.box_hi) throw ValidationError("parameter box empty for " + e.name);
    if (e.value < e.box_lo - 1e-9 * (1 + std::abs(e.box_lo)) ||
        e.value > e.box_hi + 1e-9 * (1 + std::abs(e.box_hi)))
      throw ValidationError("parameter outside search box: " + e.name);
  }
}

std::string params_to_json(const ParameterVector& pv) {
  ordered_json j;
  for (const auto& e : pv.entries) {
    ordered_json je;
    je["estimate"] = e.value;
    je["box_lo"] = e.box_lo;
    je["box_hi"] = e.box_hi;
    je["identified"] = to_string(e.identified);
    j[e.name] = je;
  }
  return j.dump(2) + "\n";
}

ParameterVector params_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw ParseError(std::string("parameter file parse failure: ") + e.what());
  }
  ParameterVector pv;
  for (auto it = j.begin(); it != j.end(); ++it) {
    ParamInfo e;
    e.name = it.key();
    const auto& je = it.value();
    e.value = je.at("estimate").get<double>();
    e.box_lo = je.at("box_lo").get<double>();
    e.box_hi = je.at("box_hi").get<double>();
    std::string id = je.value("identified", "no");
    e.identified = id == "yes" ? Identified::Yes : (id == "boundary" ? Identified::Boundary : Identified::No);
    pv.entries.push_back(e);
  }
  return pv;
}

ParameterVector load_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open parameter file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return params_from_json(ss.str());
}

void save_params(const ParameterVector& pv, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write parameter file: " + path);
  out << params_to_json(pv);
}

}  // namespace vppfra
