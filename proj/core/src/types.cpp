#include "vppfra/types.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace vppfra {

const char* to_string(NodeKind k) {
  switch (k) {
    case NodeKind::CoalFace: return "CoalFace";
    case NodeKind::ShaftSilo: return "ShaftSilo";
    case NodeKind::MainSilo: return "MainSilo";
    case NodeKind::PreparationPlant: return "PreparationPlant";
  }
  return "?";
}

NodeKind node_kind_from_string(const std::string& s) {
  if (s == "CoalFace") return NodeKind::CoalFace;
  if (s == "ShaftSilo") return NodeKind::ShaftSilo;
  if (s == "MainSilo") return NodeKind::MainSilo;
  if (s == "PreparationPlant") return NodeKind::PreparationPlant;
  throw ParseError("unknown CTN node kind: " + s);
}

int node_level(NodeKind k) { return static_cast<int>(k); }

const char* to_string(UnitKind k) {
  switch (k) {
    case UnitKind::RTO: return "RTO";
    case UnitKind::CHP: return "CHP";
    case UnitKind::GT: return "GT";
    case UnitKind::WSHP: return "WSHP";
  }
  return "?";
}

UnitKind unit_kind_from_string(const std::string& s) {
  if (s == "RTO") return UnitKind::RTO;
  if (s == "CHP") return UnitKind::CHP;
  // GT and MT are the same device class here.
  if (s == "GT" || s == "MT") return UnitKind::GT;
  if (s == "WSHP") return UnitKind::WSHP;
  throw ParseError("unknown unit kind: " + s);
}

const CtnNode* MineScenario::find_node(const std::string& node_id) const {
  for (const auto& n : ctn_nodes)
    if (n.id == node_id) return &n;
  return nullptr;
}

const SiloParams* MineScenario::find_silo(const std::string& node_id) const {
  for (const auto& s : silos)
    if (s.node_id == node_id) return &s;
  return nullptr;
}

namespace {

std::string where(const MineScenario& mine, const std::string& elem) {
  return "mine '" + mine.id + "', " + elem;
}

void check_series(std::vector<std::string>& out, const MineScenario& mine, const char* name,
                  const std::vector<double>& v, bool nonneg) {
  if (static_cast<int>(v.size()) != mine.time.horizon_length) {
    std::ostringstream os;
    os << where(mine, std::string("profile '") + name + "'") << ": length " << v.size()
       << " != horizon_length " << mine.time.horizon_length;
    out.push_back(os.str());
    return;
  }
  if (nonneg)
    for (std::size_t t = 0; t < v.size(); ++t)
      if (v[t] < 0.0) {
        std::ostringstream os;
        os << where(mine, std::string("profile '") + name + "'") << ": negative value at t=" << t;
        out.push_back(os.str());
        return;
      }
}

}  // namespace

std::vector<std::string> validate_ctn(const MineScenario& mine) {
  std::vector<std::string> out;

  std::map<std::string, const CtnNode*> nodes;
  for (const auto& n : mine.ctn_nodes) {
    if (!nodes.emplace(n.id, &n).second)
      out.push_back(where(mine, "node '" + n.id + "': duplicate id"));
  }
  std::set<std::string> link_ids;
  for (const auto& l : mine.bc_links) {
    if (!link_ids.insert(l.id).second)
      out.push_back(where(mine, "link '" + l.id + "': duplicate id"));
    if (!nodes.count(l.from_node))
      out.push_back(where(mine, "link '" + l.id + "': unknown from_node '" + l.from_node + "'"));
    if (!nodes.count(l.to_node))
      out.push_back(where(mine, "link '" + l.id + "': unknown to_node '" + l.to_node + "'"));
  }
  if (!out.empty()) return out;  // id errors make the graph checks meaningless

  int n_cpp = 0, n_cf = 0;
  for (const auto& n : mine.ctn_nodes) {
    if (n.kind == NodeKind::PreparationPlant) ++n_cpp;
    if (n.kind == NodeKind::CoalFace) ++n_cf;
  }
  if (n_cpp != 1) out.push_back(where(mine, "CTN: expected exactly one PreparationPlant node"));
  if (n_cf < 1) out.push_back(where(mine, "CTN: at least one CoalFace node required"));

  // Cycle detection on the raw digraph. Edges on a cycle are reported once as
  // the cycle and excluded from the flow-direction check below.
  std::map<std::string, std::vector<std::pair<std::string, const BcParams*>>> adj;
  for (const auto& l : mine.bc_links) adj[l.from_node].push_back({l.to_node, &l});
  std::set<const BcParams*> cycle_edges;
  {
    std::map<std::string, int> color;  // 0 white, 1 gray, 2 black
    std::vector<std::pair<std::string, const BcParams*>> stack_path;
    std::function<void(const std::string&)> dfs = [&](const std::string& u) {
      color[u] = 1;
      for (const auto& [v, edge] : adj[u]) {
        if (color[v] == 1) {
          // unwind the path back to v
          std::vector<const BcParams*> cyc{edge};
          for (auto it = stack_path.rbegin(); it != stack_path.rend(); ++it) {
            cyc.push_back(it->second);
            if (it->first == v) break;
          }
          bool fresh = false;
          for (const auto* e : cyc) fresh |= cycle_edges.insert(e).second;
          if (fresh) {
            std::ostringstream os;
            os << where(mine, "CTN: cycle detected through node '" + v + "'");
            out.push_back(os.str());
          }
        } else if (color[v] == 0) {
          stack_path.push_back({u, edge});
          dfs(v);
          stack_path.pop_back();
        }
      }
      color[u] = 2;
    };
    for (const auto& n : mine.ctn_nodes)
      if (color[n.id] == 0) dfs(n.id);
  }

  for (const auto& l : mine.bc_links) {
    if (cycle_edges.count(&l)) continue;
    const auto* a = nodes[l.from_node];
    const auto* b = nodes[l.to_node];
    if (node_level(a->kind) >= node_level(b->kind)) {
      out.push_back(where(mine, "link '" + l.id + "': flow direction violates " +
                                    std::string(to_string(a->kind)) + " -> " +
                                    std::string(to_string(b->kind)) + " ordering"));
    }
  }

  std::map<std::string, int> outdeg, indeg;
  for (const auto& l : mine.bc_links) {
    ++outdeg[l.from_node];
    ++indeg[l.to_node];
  }
  for (const auto& n : mine.ctn_nodes) {
    int od = outdeg.count(n.id) ? outdeg[n.id] : 0;
    int id = indeg.count(n.id) ? indeg[n.id] : 0;
    switch (n.kind) {
      case NodeKind::CoalFace:
        if (id != 0) out.push_back(where(mine, "node '" + n.id + "': coal face has inbound links"));
        if (od != 1)
          out.push_back(where(mine, "node '" + n.id + "': coal face needs exactly one outbound link"));
        break;
      case NodeKind::ShaftSilo:
        if (id < 1) out.push_back(where(mine, "node '" + n.id + "': shaft silo has no inbound link"));
        if (od != 1)
          out.push_back(where(mine, od > 1 ? "node '" + n.id + "': multiple outbound links from shaft silo"
                                           : "node '" + n.id + "': shaft silo has no outbound link"));
        break;
      case NodeKind::MainSilo:
        if (id < 1) out.push_back(where(mine, "node '" + n.id + "': main silo has no inbound link"));
        if (od != 1)
          out.push_back(where(mine, od > 1 ? "node '" + n.id + "': multiple outbound links from main silo"
                                           : "node '" + n.id + "': main silo has no outbound link"));
        else {
          for (const auto& l : mine.bc_links)
            if (l.from_node == n.id && nodes[l.to_node]->kind != NodeKind::PreparationPlant)
              out.push_back(where(mine, "node '" + n.id + "': main silo outbound link must feed the CPP"));
        }
        break;
      case NodeKind::PreparationPlant:
        if (od != 0) out.push_back(where(mine, "node '" + n.id + "': CPP has outbound links"));
        if (id < 1) out.push_back(where(mine, "node '" + n.id + "': CPP has no inbound link"));
        break;
    }
  }

  // Reference reachability: every coal face must reach the CPP without
  // revisiting a node. With the degree rules above the walk is unique.
  if (cycle_edges.empty()) {
    for (const auto& n : mine.ctn_nodes) {
      if (n.kind != NodeKind::CoalFace) continue;
      std::set<std::string> seen;
      std::string cur = n.id;
      bool reached = false;
      while (seen.insert(cur).second) {
        if (nodes.count(cur) && nodes[cur]->kind == NodeKind::PreparationPlant) {
          reached = true;
          break;
        }
        auto it = adj.find(cur);
        if (it == adj.end() || it->second.empty()) break;
        cur = it->second.front().first;
      }
      if (!reached)
        out.push_back(where(mine, "node '" + n.id + "': coal face cannot reach the CPP"));
    }
  }

  // Every silo-kind node carries exactly one storage record.
  for (const auto& n : mine.ctn_nodes) {
    if (n.kind != NodeKind::ShaftSilo && n.kind != NodeKind::MainSilo) continue;
    int cnt = 0;
    for (const auto& s : mine.silos)
      if (s.node_id == n.id) ++cnt;
    if (cnt != 1)
      out.push_back(where(mine, "node '" + n.id + "': silo node needs exactly one silo record, has " +
                                    std::to_string(cnt)));
  }
  for (const auto& s : mine.silos) {
    const auto* n = mine.find_node(s.node_id);
    if (!n)
      out.push_back(where(mine, "silo at '" + s.node_id + "': unknown node"));
    else if (n->kind != NodeKind::ShaftSilo && n->kind != NodeKind::MainSilo)
      out.push_back(where(mine, "silo at '" + s.node_id + "': node is not a silo kind"));
  }

  return out;
}

std::vector<std::string> validate_mine(const MineScenario& mine) {
  std::vector<std::string> out;

  if (mine.time.horizon_length < 2)
    out.push_back(where(mine, "time: horizon_length must be >= 2"));
  if (!(mine.time.interval_hours > 0.0))
    out.push_back(where(mine, "time: interval_hours must be > 0"));

  for (const auto& l : mine.bc_links) {
    auto bad = [&](const std::string& msg) { out.push_back(where(mine, "link '" + l.id + "': " + msg)); };
    if (!(l.speed > 0.0)) bad("speed must be > 0");
    if (!(l.feed_max > 0.0)) bad("feed_max must be > 0");
    if (l.power_min > l.power_max) bad("power_min > power_max");
    if (!(l.ramp_min <= 0.0 && 0.0 <= l.ramp_max)) bad("ramp limits must satisfy ramp_min <= 0 <= ramp_max");
  }
  for (const auto& s : mine.silos) {
    auto bad = [&](const std::string& msg) { out.push_back(where(mine, "silo at '" + s.node_id + "': " + msg)); };
    if (s.capacity_min > s.capacity_max) bad("capacity_min > capacity_max");
    if (s.level_start < s.capacity_min || s.level_start > s.capacity_max)
      bad("level_start outside capacity box");
    if (s.level_end < s.capacity_min || s.level_end > s.capacity_max)
      bad("level_end outside capacity box");
  }
  auto check_storage = [&](const StorageParams& st, const char* name) {
    auto bad = [&](const std::string& msg) { out.push_back(where(mine, std::string(name) + ": " + msg)); };
    if (!(st.retention > 0.0 && st.retention <= 1.0)) bad("retention must be in (0, 1]");
    if (!(st.efficiency > 0.0 && st.efficiency <= 1.0)) bad("efficiency must be in (0, 1]");
    if (st.energy_min > st.energy_max) bad("energy_min > energy_max");
    if (st.energy_start < st.energy_min || st.energy_start > st.energy_max)
      bad("energy_start outside energy box");
    if (st.energy_end < st.energy_min || st.energy_end > st.energy_max)
      bad("energy_end outside energy box");
    if (st.charge_min > st.charge_max) bad("charge box empty");
    if (st.discharge_min > st.discharge_max) bad("discharge box empty");
    if (st.charge_min < 0.0 || st.discharge_min < 0.0) bad("charge/discharge powers must be >= 0");
  };
  check_storage(mine.phs, "phs");
  check_storage(mine.tst, "tst");
  if (mine.phs.kind != StorageKind::Electrical) out.push_back(where(mine, "phs: kind must be electrical"));
  if (mine.tst.kind != StorageKind::Thermal) out.push_back(where(mine, "tst: kind must be thermal"));

  for (const auto& u : mine.units) {
    if (u.heat_min > u.heat_max)
      out.push_back(where(mine, std::string("unit ") + to_string(u.kind) + ": heat_min > heat_max"));
  }

  const auto& c = mine.costs;
  for (double v : {c.fuel_chp, c.om_pv, c.om_wt, c.om_gt, c.om_chp, c.om_rto, c.om_bc, c.om_phs,
                   c.om_tst, c.om_wshp})
    if (v < 0.0) {
      out.push_back(where(mine, "costs: coefficients must be >= 0"));
      break;
    }

  check_series(out, mine, "price", mine.profiles.price, false);
  check_series(out, mine, "elec_load", mine.profiles.elec_load, true);
  check_series(out, mine, "heat_load", mine.profiles.heat_load, true);
  check_series(out, mine, "pv_avail", mine.profiles.pv_avail, true);
  check_series(out, mine, "wt_avail", mine.profiles.wt_avail, true);
  if (mine.profiles.cpp_demand < 0.0) out.push_back(where(mine, "profiles: cpp_demand must be >= 0"));

  if (mine.grid_min > mine.grid_max) out.push_back(where(mine, "grid: min > max"));

  auto check_box = [&](const SearchBox& b, const std::string& name, double value) {
    if (b.lo > b.hi) out.push_back(where(mine, "xi_box " + name + ": lo > hi"));
    if (value < b.lo - 1e-12 || value > b.hi + 1e-12)
      out.push_back(where(mine, "xi_box " + name + ": true value outside search box"));
  };
  if (!mine.xi_box.theta2.empty()) {
    if (mine.xi_box.theta2.size() != mine.bc_links.size() ||
        mine.xi_box.p_bc_min.size() != mine.bc_links.size() ||
        mine.xi_box.p_bc_max.size() != mine.bc_links.size()) {
      out.push_back(where(mine, "xi_box: per-conveyor box counts must match bc_links"));
    } else {
      for (std::size_t j = 0; j < mine.bc_links.size(); ++j) {
        check_box(mine.xi_box.theta2[j], "theta2." + mine.bc_links[j].id, mine.bc_links[j].theta2);
        check_box(mine.xi_box.p_bc_min[j], "p_bc_min." + mine.bc_links[j].id, mine.bc_links[j].power_min);
        check_box(mine.xi_box.p_bc_max[j], "p_bc_max." + mine.bc_links[j].id, mine.bc_links[j].power_max);
      }
      check_box(mine.xi_box.p_g_min, "p_g_min", mine.grid_min);
      check_box(mine.xi_box.p_g_max, "p_g_max", mine.grid_max);
    }
  }

  auto ctn = validate_ctn(mine);
  out.insert(out.end(), ctn.begin(), ctn.end());
  return out;
}

void validate_scenario(const VppScenario& vpp) {
  if (vpp.mines.empty()) throw ValidationError("scenario has no mines");
  for (const auto& mine : vpp.mines) {
    auto v = validate_mine(mine);
    if (!v.empty()) throw ValidationError(v.front());
  }
  const auto& t0 = vpp.mines.front().time;
  for (const auto& mine : vpp.mines)
    if (mine.time.horizon_length != t0.horizon_length ||
        mine.time.interval_hours != t0.interval_hours)
      throw ValidationError("mine '" + mine.id + "': time grid differs from the first mine");
  std::set<std::string> ids;
  for (const auto& mine : vpp.mines)
    if (!ids.insert(mine.id).second) throw ValidationError("duplicate mine id '" + mine.id + "'");
}

}  // namespace vppfra
