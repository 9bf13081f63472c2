#pragma once

#include <string>
#include <vector>

#include "vppfra/errors.hpp"

namespace vppfra {

// Dispatch horizon. Units convention used throughout the repo: power in kW,
// heat in kW-thermal, energy in kWh, silo mass in tonnes, conveyor feed rate
// in t/h, one interval lasts interval_hours.
struct TimeGrid {
  int horizon_length = 24;
  double interval_hours = 1.0;
};

enum class NodeKind { CoalFace, ShaftSilo, MainSilo, PreparationPlant };

const char* to_string(NodeKind k);
NodeKind node_kind_from_string(const std::string& s);
int node_level(NodeKind k);  // CoalFace=0 < ShaftSilo=1 < MainSilo=2 < PreparationPlant=3

struct CtnNode {
  std::string id;
  NodeKind kind = NodeKind::CoalFace;
};

// One belt conveyor. Electric draw follows
//   p = cof * (theta2 * speed + (theta4 + speed/3.6) * q)
// with q the feed rate in t/h; per-interval mass moved is sigma = q/(3.6*speed).
struct BcParams {
  std::string id;
  std::string from_node;
  std::string to_node;
  double cof = 1.0;
  double theta2 = 0.0;    // kW per unit belt speed, the learnable coefficient
  double theta4 = 0.0;    // kWh per tonne
  double speed = 1.0;     // m/s, fixed
  double feed_max = 0.0;  // t/h cap on q
  double ramp_min = 0.0;  // per-interval change bounds on sigma, ramp_min <= 0 <= ramp_max
  double ramp_max = 0.0;
  double power_min = 0.0;  // kW box on p
  double power_max = 0.0;
};

struct SiloParams {
  std::string node_id;
  double capacity_min = 0.0;  // tonnes
  double capacity_max = 0.0;
  double level_start = 0.0;
  double level_end = 0.0;
};

enum class StorageKind { Electrical, Thermal };

// Battery-style storage, instantiated once as PHS (electrical) and once as
// TST (thermal). Dynamics: e[t] = retention*e[t-1] + efficiency*(charge - discharge)*dt.
struct StorageParams {
  StorageKind kind = StorageKind::Electrical;
  double retention = 1.0;
  double efficiency = 1.0;
  double energy_min = 0.0;
  double energy_max = 0.0;
  double charge_min = 0.0;
  double charge_max = 0.0;
  double discharge_min = 0.0;
  double discharge_max = 0.0;
  double energy_start = 0.0;
  double energy_end = 0.0;
};

enum class UnitKind { RTO, CHP, GT, WSHP };

const char* to_string(UnitKind k);
UnitKind unit_kind_from_string(const std::string& s);

// Electricity/heat coupled unit: p = ehr * h, heat_min <= h <= heat_max.
// ehr may be negative for units that consume electricity while heating.
struct CoupledUnitParams {
  UnitKind kind = UnitKind::CHP;
  double ehr = 1.0;
  double heat_min = 0.0;
  double heat_max = 0.0;
};

struct CostCoefficients {
  double fuel_chp = 0.0;  // currency per kWh of CHP electric output
  double om_pv = 0.0;
  double om_wt = 0.0;
  double om_gt = 0.0;
  double om_chp = 0.0;
  double om_rto = 0.0;
  double om_bc = 0.0;
  double om_phs = 0.0;
  double om_tst = 0.0;
  double om_wshp = 0.0;
};

struct ExogenousProfiles {
  std::vector<double> price;      // currency/kWh
  std::vector<double> elec_load;  // kW
  std::vector<double> heat_load;  // kW thermal
  std::vector<double> pv_avail;   // kW cap
  std::vector<double> wt_avail;   // kW cap
  double cpp_demand = 0.0;        // total coal delivered to the CPP over the horizon
};

// Aggregator's prior interval for one learnable scalar.
struct SearchBox {
  double lo = 0.0;
  double hi = 0.0;
};

// Search boxes for the unknown parameter vector of one mine; keys follow
// bc_links order.
struct XiBox {
  std::vector<SearchBox> theta2;
  std::vector<SearchBox> p_bc_min;
  std::vector<SearchBox> p_bc_max;
  SearchBox p_g_min;
  SearchBox p_g_max;
};

struct MineScenario {
  std::string id;
  TimeGrid time;
  std::vector<CtnNode> ctn_nodes;
  std::vector<BcParams> bc_links;
  std::vector<SiloParams> silos;
  StorageParams phs;
  StorageParams tst;
  std::vector<CoupledUnitParams> units;
  CostCoefficients costs;
  ExogenousProfiles profiles;
  double grid_min = 0.0;  // kW box on exchange with the DSO
  double grid_max = 0.0;
  XiBox xi_box;

  const CtnNode* find_node(const std::string& id) const;
  const SiloParams* find_silo(const std::string& node_id) const;
};

struct VppScenario {
  std::vector<MineScenario> mines;
  const TimeGrid& time() const { return mines.at(0).time; }
};

// Graph/topology checks for one mine's coal transportation network. Returns
// human-readable violations naming the offending element; empty means valid.
std::vector<std::string> validate_ctn(const MineScenario& mine);

// Full invariant check across one mine (types, boxes, profile lengths, CTN).
std::vector<std::string> validate_mine(const MineScenario& mine);

// Validates the whole scenario, throwing ValidationError on the first
// violation list found.
void validate_scenario(const VppScenario& vpp);

}  // namespace vppfra
