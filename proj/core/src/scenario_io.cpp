#include "vppfra/scenario_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace vppfra {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

double num(const json& j, const std::string& key) {
  if (!j.contains(key)) throw ParseError("missing numeric field '" + key + "'");
  if (!j[key].is_number()) throw ParseError("field '" + key + "' is not a number");
  return j[key].get<double>();
}

std::string str(const json& j, const std::string& key) {
  if (!j.contains(key)) throw ParseError("missing string field '" + key + "'");
  if (!j[key].is_string()) throw ParseError("field '" + key + "' is not a string");
  return j[key].get<std::string>();
}

std::vector<double> series(const json& j, const std::string& key) {
  if (!j.contains(key) || !j[key].is_array())
    throw ParseError("missing series field '" + key + "'");
  std::vector<double> out;
  for (const auto& v : j[key]) {
    if (!v.is_number()) throw ParseError("series '" + key + "' has a non-numeric entry");
    out.push_back(v.get<double>());
  }
  return out;
}

SearchBox box_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ParseError("search box must be [lo, hi]");
  return {j[0].get<double>(), j[1].get<double>()};
}

StorageParams storage_from(const json& j, StorageKind kind) {
  StorageParams s;
  s.kind = kind;
  s.retention = num(j, "retention");
  s.efficiency = num(j, "efficiency");
  s.energy_min = num(j, "energy_min");
  s.energy_max = num(j, "energy_max");
  s.charge_min = num(j, "charge_min");
  s.charge_max = num(j, "charge_max");
  s.discharge_min = num(j, "discharge_min");
  s.discharge_max = num(j, "discharge_max");
  s.energy_start = num(j, "energy_start");
  s.energy_end = num(j, "energy_end");
  return s;
}

json storage_to(const StorageParams& s) {
  ordered_json j;
  j["retention"] = s.retention;
  j["efficiency"] = s.efficiency;
  j["energy_min"] = s.energy_min;
  j["energy_max"] = s.energy_max;
  j["charge_min"] = s.charge_min;
  j["charge_max"] = s.charge_max;
  j["discharge_min"] = s.discharge_min;
  j["discharge_max"] = s.discharge_max;
  j["energy_start"] = s.energy_start;
  j["energy_end"] = s.energy_end;
  return j;
}

MineScenario mine_from(const json& jm, const TimeGrid& time) {
  MineScenario m;
  m.time = time;
  m.id = str(jm, "id");

  const auto& ctn = jm.at("ctn");
  for (const auto& jn : ctn.at("nodes")) {
    CtnNode n;
    n.id = str(jn, "id");
    n.kind = node_kind_from_string(str(jn, "kind"));
    m.ctn_nodes.push_back(n);
  }
  for (const auto& jl : ctn.at("links")) {
    BcParams b;
    b.id = str(jl, "id");
    b.from_node = str(jl, "from");
    b.to_node = str(jl, "to");
    b.cof = num(jl, "cof");
    b.theta2 = num(jl, "theta2");
    b.theta4 = num(jl, "theta4");
    b.speed = num(jl, "speed");
    b.feed_max = num(jl, "feed_max");
    b.ramp_min = num(jl, "ramp_min");
    b.ramp_max = num(jl, "ramp_max");
    b.power_min = num(jl, "power_min");
    b.power_max = num(jl, "power_max");
    m.bc_links.push_back(b);
  }

  const auto& dev = jm.at("devices");
  for (const auto& js : dev.at("silos")) {
    SiloParams s;
    s.node_id = str(js, "node");
    s.capacity_min = num(js, "capacity_min");
    s.capacity_max = num(js, "capacity_max");
    s.level_start = num(js, "level_start");
    s.level_end = num(js, "level_end");
    m.silos.push_back(s);
  }
  m.phs = storage_from(dev.at("phs"), StorageKind::Electrical);
  m.tst = storage_from(dev.at("tst"), StorageKind::Thermal);
  if (dev.contains("units"))
    for (const auto& ju : dev.at("units")) {
      CoupledUnitParams u;
      u.kind = unit_kind_from_string(str(ju, "kind"));
      u.ehr = num(ju, "ehr");
      u.heat_min = num(ju, "heat_min");
      u.heat_max = num(ju, "heat_max");
      m.units.push_back(u);
    }

  const auto& jc = jm.at("costs");
  m.costs.fuel_chp = num(jc, "fuel_chp");
  const auto& jo = jc.at("om");
  m.costs.om_pv = num(jo, "pv");
  m.costs.om_wt = num(jo, "wt");
  m.costs.om_gt = num(jo, "gt");
  m.costs.om_chp = num(jo, "chp");
  m.costs.om_rto = num(jo, "rto");
  m.costs.om_bc = num(jo, "bc");
  m.costs.om_phs = num(jo, "phs");
  m.costs.om_tst = num(jo, "tst");
  m.costs.om_wshp = num(jo, "wshp");

  const auto& jp = jm.at("profiles");
  m.profiles.price = series(jp, "price");
  m.profiles.elec_load = series(jp, "elec_load");
  m.profiles.heat_load = series(jp, "heat_load");
  m.profiles.pv_avail = series(jp, "pv_avail");
  m.profiles.wt_avail = series(jp, "wt_avail");
  m.profiles.cpp_demand = num(jp, "cpp_demand");

  const auto& jg = jm.at("grid");
  m.grid_min = num(jg, "min");
  m.grid_max = num(jg, "max");

  if (jm.contains("xi_box")) {
    const auto& jb = jm.at("xi_box");
    auto per_link = [&](const char* key) {
      std::vector<SearchBox> out;
      const auto& sect = jb.at(key);
      for (const auto& l : m.bc_links) {
        if (!sect.contains(l.id)) throw ParseError(std::string("xi_box ") + key + " missing link '" + l.id + "'");
        out.push_back(box_from(sect.at(l.id)));
      }
      return out;
    };
    m.xi_box.theta2 = per_link("theta2");
    m.xi_box.p_bc_min = per_link("p_bc_min");
    m.xi_box.p_bc_max = per_link("p_bc_max");
    m.xi_box.p_g_min = box_from(jb.at("p_g_min"));
    m.xi_box.p_g_max = box_from(jb.at("p_g_max"));
  }
  return m;
}

ordered_json mine_to(const MineScenario& m) {
  ordered_json jm;
  jm["id"] = m.id;
  ordered_json nodes = ordered_json::array();
  for (const auto& n : m.ctn_nodes) nodes.push_back({{"id", n.id}, {"kind", to_string(n.kind)}});
  ordered_json links = ordered_json::array();
  for (const auto& l : m.bc_links) {
    ordered_json jl;
    jl["id"] = l.id;
    jl["from"] = l.from_node;
    jl["to"] = l.to_node;
    jl["cof"] = l.cof;
    jl["theta2"] = l.theta2;
    jl["theta4"] = l.theta4;
    jl["speed"] = l.speed;
    jl["feed_max"] = l.feed_max;
    jl["ramp_min"] = l.ramp_min;
    jl["ramp_max"] = l.ramp_max;
    jl["power_min"] = l.power_min;
    jl["power_max"] = l.power_max;
    links.push_back(jl);
  }
  jm["ctn"] = {{"nodes", nodes}, {"links", links}};

  ordered_json silos = ordered_json::array();
  for (const auto& s : m.silos) {
    ordered_json js;
    js["node"] = s.node_id;
    js["capacity_min"] = s.capacity_min;
    js["capacity_max"] = s.capacity_max;
    js["level_start"] = s.level_start;
    js["level_end"] = s.level_end;
    silos.push_back(js);
  }
  ordered_json units = ordered_json::array();
  for (const auto& u : m.units)
    units.push_back({{"kind", to_string(u.kind)}, {"ehr", u.ehr}, {"heat_min", u.heat_min}, {"heat_max", u.heat_max}});
  jm["devices"] = {{"silos", silos}, {"phs", storage_to(m.phs)}, {"tst", storage_to(m.tst)}, {"units", units}};

  jm["costs"] = {{"fuel_chp", m.costs.fuel_chp},
                 {"om",
                  {{"pv", m.costs.om_pv},
                   {"wt", m.costs.om_wt},
                   {"gt", m.costs.om_gt},
                   {"chp", m.costs.om_chp},
                   {"rto", m.costs.om_rto},
                   {"bc", m.costs.om_bc},
                   {"phs", m.costs.om_phs},
                   {"tst", m.costs.om_tst},
                   {"wshp", m.costs.om_wshp}}}};
  jm["profiles"] = {{"price", m.profiles.price},
                    {"elec_load", m.profiles.elec_load},
                    {"heat_load", m.profiles.heat_load},
                    {"pv_avail", m.profiles.pv_avail},
                    {"wt_avail", m.profiles.wt_avail},
                    {"cpp_demand", m.profiles.cpp_demand}};
  jm["grid"] = {{"min", m.grid_min}, {"max", m.grid_max}};

  if (!m.xi_box.theta2.empty()) {
    ordered_json jb;
    auto per_link = [&](const std::vector<SearchBox>& boxes) {
      ordered_json sect;
      for (std::size_t j = 0; j < m.bc_links.size(); ++j)
        sect[m.bc_links[j].id] = {boxes[j].lo, boxes[j].hi};
      return sect;
    };
    jb["theta2"] = per_link(m.xi_box.theta2);
    jb["p_bc_min"] = per_link(m.xi_box.p_bc_min);
    jb["p_bc_max"] = per_link(m.xi_box.p_bc_max);
    jb["p_g_min"] = {m.xi_box.p_g_min.lo, m.xi_box.p_g_min.hi};
    jb["p_g_max"] = {m.xi_box.p_g_max.lo, m.xi_box.p_g_max.hi};
    jm["xi_box"] = jb;
  }
  return jm;
}

}  // namespace

VppScenario scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ParseError(std::string("scenario parse failure: ") + e.what());
  }
  VppScenario vpp;
  try {
    TimeGrid time;
    time.horizon_length = static_cast<int>(num(j.at("time"), "horizon_length"));
    time.interval_hours = num(j.at("time"), "interval_hours");
    if (!j.contains("mines") || !j["mines"].is_array())
      throw ParseError("scenario needs a 'mines' array");
    for (const auto& jm : j["mines"]) vpp.mines.push_back(mine_from(jm, time));
  } catch (const json::exception& e) {
    throw ParseError(std::string("scenario structure error: ") + e.what());
  }
  validate_scenario(vpp);
  return vpp;
}

std::string scenario_to_json(const VppScenario& vpp) {
  ordered_json j;
  j["time"] = {{"horizon_length", vpp.time().horizon_length},
               {"interval_hours", vpp.time().interval_hours}};
  ordered_json mines = ordered_json::array();
  for (const auto& m : vpp.mines) mines.push_back(mine_to(m));
  j["mines"] = mines;
  return j.dump(2) + "\n";
}

VppScenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return scenario_from_json(ss.str());
}

void save_scenario(const VppScenario& vpp, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write scenario file: " + path);
  out << scenario_to_json(vpp);
}

}  // namespace vppfra
