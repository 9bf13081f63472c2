#include "vppfra/lp_builder.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace vppfra {

namespace {

struct Builder {
  std::vector<Eigen::Triplet<double>> eq_trip, ineq_trip;
  std::vector<double> eq_rhs, ineq_rhs;
  std::vector<std::string> eq_names, ineq_names;
  std::vector<RowFamily> eq_fams, ineq_fams;
  std::vector<int> ineq_partner;

  int add_eq(const std::string& name, RowFamily fam, double rhs) {
    eq_names.push_back(name);
    eq_fams.push_back(fam);
    eq_rhs.push_back(rhs);
    return static_cast<int>(eq_rhs.size()) - 1;
  }
  int add_ineq(const std::string& name, RowFamily fam, double rhs) {
    ineq_names.push_back(name);
    ineq_fams.push_back(fam);
    ineq_rhs.push_back(rhs);
    ineq_partner.push_back(-1);
    return static_cast<int>(ineq_rhs.size()) - 1;
  }
  void eq(int row, int col, double v) { eq_trip.emplace_back(row, col, v); }
  void ineq(int row, int col, double v) { ineq_trip.emplace_back(row, col, v); }
  void pair(int lo, int hi) {
    ineq_partner[lo] = hi;
    ineq_partner[hi] = lo;
  }
};

std::string at(const std::string& base, int t) { return base + "@" + std::to_string(t); }

}  // namespace

MineLp build_mine_lp(const MineScenario& mine, const ParameterVector* params) {
  const int T = mine.time.horizon_length;
  const double dt = mine.time.interval_hours;
  const int L = static_cast<int>(mine.bc_links.size());
  const int S = static_cast<int>(mine.silos.size());
  const int U = static_cast<int>(mine.units.size());

  // Effective parameter values: scenario truth unless overridden.
  auto names = param_names_for(mine);
  std::vector<double> xi_val(names.size());
  std::vector<SearchBox> xi_box(names.size());
  {
    ParameterVector truth;
    VppScenario one;
    one.mines.push_back(mine);
    truth = ParameterVector::truth_of(one);
    for (std::size_t i = 0; i < names.size(); ++i) {
      xi_val[i] = truth.entries[i].value;
      xi_box[i] = {truth.entries[i].box_lo, truth.entries[i].box_hi};
      if (params) {
        if (const ParamInfo* p = params->find(names[i])) {
          xi_val[i] = p->value;
          xi_box[i] = {p->box_lo, p->box_hi};
        }
      }
    }
  }
  auto xi_at = [&](const std::string& name) -> int {
    auto it = std::find(names.begin(), names.end(), name);
    return static_cast<int>(it - names.begin());
  };
  for (int j = 0; j < L; ++j) {
    double lo = xi_val[xi_at(mine.id + ".p_bc_min." + mine.bc_links[j].id)];
    double hi = xi_val[xi_at(mine.id + ".p_bc_max." + mine.bc_links[j].id)];
    if (lo > hi)
      throw InfeasibleStructure("power box empty for conveyor " + mine.bc_links[j].id);
  }
  if (xi_val[xi_at(mine.id + ".p_g_min")] > xi_val[xi_at(mine.id + ".p_g_max")])
    throw InfeasibleStructure("grid exchange box empty for mine " + mine.id);

  MineLayout lay;
  lay.horizon = T;
  int off = 0;
  auto alloc = [&off]() { return off++; };
  lay.q.resize(L);
  lay.sigma.resize(L);
  lay.p_bc.resize(L);
  for (int j = 0; j < L; ++j) lay.q[j] = alloc();
  for (int j = 0; j < L; ++j) lay.sigma[j] = alloc();
  for (int j = 0; j < L; ++j) lay.p_bc[j] = alloc();
  lay.m_silo.resize(S);
  for (int k = 0; k < S; ++k) lay.m_silo[k] = alloc();
  lay.e_phs = alloc();
  lay.p_phsc = alloc();
  lay.p_phsd = alloc();
  lay.e_tst = alloc();
  lay.h_tstc = alloc();
  lay.h_tstd = alloc();
  lay.h_unit.resize(U);
  for (int u = 0; u < U; ++u) lay.h_unit[u] = alloc();
  lay.p_pv = alloc();
  lay.p_wt = alloc();
  lay.p_g = alloc();
  lay.stride = off;

  const int n_cols = lay.stride * T;

  // link topology helpers
  std::map<std::string, int> silo_of_node;
  for (int k = 0; k < S; ++k) silo_of_node[mine.silos[k].node_id] = k;
  auto kind_of = [&](const std::string& node_id) { return mine.find_node(node_id)->kind; };
  std::vector<int> cf_links, cpp_links;  // leaving a coal face / entering the CPP
  for (int j = 0; j < L; ++j) {
    if (kind_of(mine.bc_links[j].from_node) == NodeKind::CoalFace) cf_links.push_back(j);
    if (kind_of(mine.bc_links[j].to_node) == NodeKind::PreparationPlant) cpp_links.push_back(j);
  }

  LpProblem lp;
  lp.c = Vec::Zero(n_cols);
  lp.interval_hours = dt;
  Builder b;

  // names + var_index
  lp.col_names.resize(n_cols);
  auto name_col = [&](int offset, const std::string& base, int t) {
    int c = lay.col(offset, t);
    lp.col_names[c] = at(base, t);
    lp.var_index[at(base, t)] = c;
  };
  for (int t = 0; t < T; ++t) {
    for (int j = 0; j < L; ++j) {
      name_col(lay.q[j], "q." + mine.bc_links[j].id, t);
      name_col(lay.sigma[j], "sigma." + mine.bc_links[j].id, t);
      name_col(lay.p_bc[j], "p_bc." + mine.bc_links[j].id, t);
    }
    for (int k = 0; k < S; ++k) name_col(lay.m_silo[k], "m_silo." + mine.silos[k].node_id, t);
    name_col(lay.e_phs, "e_phs", t);
    name_col(lay.p_phsc, "p_phsc", t);
    name_col(lay.p_phsd, "p_phsd", t);
    name_col(lay.e_tst, "e_tst", t);
    name_col(lay.h_tstc, "h_tstc", t);
    name_col(lay.h_tstd, "h_tstd", t);
    for (int u = 0; u < U; ++u) {
      std::string k = to_string(mine.units[u].kind);
      std::transform(k.begin(), k.end(), k.begin(), [](unsigned char c) { return std::tolower(c); });
      name_col(lay.h_unit[u], "h_" + k, t);
    }
    name_col(lay.p_pv, "p_pv", t);
    name_col(lay.p_wt, "p_wt", t);
    name_col(lay.p_g, "p_g", t);
  }

  // objective
  for (int t = 0; t < T; ++t) {
    const auto& c = mine.costs;
    lp.c[lay.col(lay.p_g, t)] += dt * mine.profiles.price[t];
    lp.c[lay.col(lay.p_pv, t)] += dt * c.om_pv;
    lp.c[lay.col(lay.p_wt, t)] += dt * c.om_wt;
    lp.c[lay.col(lay.p_phsc, t)] += dt * c.om_phs;
    lp.c[lay.col(lay.p_phsd, t)] += dt * c.om_phs;
    lp.c[lay.col(lay.h_tstc, t)] += dt * c.om_tst;
    lp.c[lay.col(lay.h_tstd, t)] += dt * c.om_tst;
    for (int j = 0; j < L; ++j) lp.c[lay.col(lay.p_bc[j], t)] += dt * c.om_bc;
    for (int u = 0; u < U; ++u) {
      const auto& unit = mine.units[u];
      double om = 0.0;
      switch (unit.kind) {
        case UnitKind::RTO: om = c.om_rto; break;
        case UnitKind::CHP: om = c.om_chp + c.fuel_chp; break;
        case UnitKind::GT: om = c.om_gt; break;
        case UnitKind::WSHP: om = c.om_wshp; break;
      }
      lp.c[lay.col(lay.h_unit[u], t)] += dt * om * unit.ehr;
    }
  }

  // hooked rows collected per parameter
  std::vector<std::vector<ParamHook>> hooks(names.size());
  lay.row_p_lo.assign(L, std::vector<int>(T, -1));
  lay.row_p_hi.assign(L, std::vector<int>(T, -1));
  lay.row_g_lo.assign(T, -1);
  lay.row_g_hi.assign(T, -1);

  for (int t = 0; t < T; ++t) {
    // sigma = q / (3.6 * speed)
    for (int j = 0; j < L; ++j) {
      const auto& link = mine.bc_links[j];
      int r = b.add_eq(at("tie." + link.id, t), RowFamily::SigmaTie, 0.0);
      b.eq(r, lay.col(lay.sigma[j], t), 1.0);
      b.eq(r, lay.col(lay.q[j], t), -1.0 / (3.6 * link.speed));
    }
    // p = cof*(theta2*V + (theta4 + V/3.6) q); theta2 sits in the rhs
    for (int j = 0; j < L; ++j) {
      const auto& link = mine.bc_links[j];
      int r = b.add_eq(at("pow." + link.id, t), RowFamily::BcPowerLaw, 0.0);
      b.eq(r, lay.col(lay.p_bc[j], t), 1.0);
      b.eq(r, lay.col(lay.q[j], t), -link.cof * (link.theta4 + link.speed / 3.6));
      hooks[xi_at(mine.id + ".theta2." + link.id)].push_back({true, r, -1, link.cof * link.speed});
    }
    // silo balances m[t] = m[t-1] + inflow - outflow
    for (int k = 0; k < S; ++k) {
      const auto& silo = mine.silos[k];
      double rhs = (t == 0) ? silo.level_start : 0.0;
      int r = b.add_eq(at("silo." + silo.node_id, t), RowFamily::SiloBalance, rhs);
      b.eq(r, lay.col(lay.m_silo[k], t), 1.0);
      if (t > 0) b.eq(r, lay.col(lay.m_silo[k], t - 1), -1.0);
      for (int j = 0; j < L; ++j) {
        if (mine.bc_links[j].to_node == silo.node_id) b.eq(r, lay.col(lay.sigma[j], t), -1.0);
        if (mine.bc_links[j].from_node == silo.node_id) b.eq(r, lay.col(lay.sigma[j], t), 1.0);
      }
    }
    // storage dynamics e[t] = retention*e[t-1] + efficiency*dt*(charge - discharge)
    {
      const auto& st = mine.phs;
      double rhs = (t == 0) ? st.retention * st.energy_start : 0.0;
      int r = b.add_eq(at("phs", t), RowFamily::StorageBalance, rhs);
      b.eq(r, lay.col(lay.e_phs, t), 1.0);
      if (t > 0) b.eq(r, lay.col(lay.e_phs, t - 1), -st.retention);
      b.eq(r, lay.col(lay.p_phsc, t), -st.efficiency * dt);
      b.eq(r, lay.col(lay.p_phsd, t), st.efficiency * dt);
    }
    {
      const auto& st = mine.tst;
      double rhs = (t == 0) ? st.retention * st.energy_start : 0.0;
      int r = b.add_eq(at("tst", t), RowFamily::StorageBalance, rhs);
      b.eq(r, lay.col(lay.e_tst, t), 1.0);
      if (t > 0) b.eq(r, lay.col(lay.e_tst, t - 1), -st.retention);
      b.eq(r, lay.col(lay.h_tstc, t), -st.efficiency * dt);
      b.eq(r, lay.col(lay.h_tstd, t), st.efficiency * dt);
    }
    // electrical balance:
    //   p_g + generation + p_phsd = p_phsc + load + BC draw + WSHP draw
    {
      int r = b.add_eq(at("elec", t), RowFamily::ElecBalance, mine.profiles.elec_load[t]);
      b.eq(r, lay.col(lay.p_g, t), 1.0);
      b.eq(r, lay.col(lay.p_pv, t), 1.0);
      b.eq(r, lay.col(lay.p_wt, t), 1.0);
      b.eq(r, lay.col(lay.p_phsd, t), 1.0);
      b.eq(r, lay.col(lay.p_phsc, t), -1.0);
      for (int j = 0; j < L; ++j) b.eq(r, lay.col(lay.p_bc[j], t), -1.0);
      for (int u = 0; u < U; ++u) {
        const auto& unit = mine.units[u];
        double sign = (unit.kind == UnitKind::WSHP) ? -1.0 : 1.0;
        b.eq(r, lay.col(lay.h_unit[u], t), sign * unit.ehr);
      }
    }
    // heat balance: sum of unit heat + TST discharge = TST charge + heat load
    {
      int r = b.add_eq(at("heat", t), RowFamily::HeatBalance, mine.profiles.heat_load[t]);
      for (int u = 0; u < U; ++u) b.eq(r, lay.col(lay.h_unit[u], t), 1.0);
      b.eq(r, lay.col(lay.h_tstd, t), 1.0);
      b.eq(r, lay.col(lay.h_tstc, t), -1.0);
    }
  }
  // boundary states
  for (int k = 0; k < S; ++k) {
    int r = b.add_eq("silo_end." + mine.silos[k].node_id, RowFamily::SiloEnd, mine.silos[k].level_end);
    b.eq(r, lay.col(lay.m_silo[k], T - 1), 1.0);
  }
  {
    int r = b.add_eq("phs_end", RowFamily::StorageEnd, mine.phs.energy_end);
    b.eq(r, lay.col(lay.e_phs, T - 1), 1.0);
    r = b.add_eq("tst_end", RowFamily::StorageEnd, mine.tst.energy_end);
    b.eq(r, lay.col(lay.e_tst, T - 1), 1.0);
  }
  // total delivered coal equals the CPP demand
  {
    int r = b.add_eq("delivery", RowFamily::Delivery, mine.profiles.cpp_demand);
    for (int t = 0; t < T; ++t)
      for (int j : cpp_links) b.eq(r, lay.col(lay.q[j], t), 1.0);
  }

  // inequality block
  for (int t = 0; t < T; ++t) {
    for (int j = 0; j < L; ++j) {
      const auto& link = mine.bc_links[j];
      int rlo = b.add_ineq(at("q_lo." + link.id, t), RowFamily::QLower, 0.0);
      b.ineq(rlo, lay.col(lay.q[j], t), -1.0);
      int rhi = b.add_ineq(at("q_cap." + link.id, t), RowFamily::QCap, link.feed_max);
      b.ineq(rhi, lay.col(lay.q[j], t), 1.0);
      b.pair(rlo, rhi);
    }
    for (int j = 0; j < L; ++j) {
      const auto& link = mine.bc_links[j];
      int rlo = b.add_ineq(at("p_lo." + link.id, t), RowFamily::BcPowerLower, 0.0);
      b.ineq(rlo, lay.col(lay.p_bc[j], t), -1.0);
      hooks[xi_at(mine.id + ".p_bc_min." + link.id)].push_back({false, rlo, -1, -1.0});
      int rhi = b.add_ineq(at("p_hi." + link.id, t), RowFamily::BcPowerUpper, 0.0);
      b.ineq(rhi, lay.col(lay.p_bc[j], t), 1.0);
      hooks[xi_at(mine.id + ".p_bc_max." + link.id)].push_back({false, rhi, -1, 1.0});
      b.pair(rlo, rhi);
      lay.row_p_lo[j][t] = rlo;
      lay.row_p_hi[j][t] = rhi;
    }
    for (int k = 0; k < S; ++k) {
      const auto& silo = mine.silos[k];
      int rlo = b.add_ineq(at("silo_lo." + silo.node_id, t), RowFamily::SiloBox, -silo.capacity_min);
      b.ineq(rlo, lay.col(lay.m_silo[k], t), -1.0);
      int rhi = b.add_ineq(at("silo_hi." + silo.node_id, t), RowFamily::SiloBox, silo.capacity_max);
      b.ineq(rhi, lay.col(lay.m_silo[k], t), 1.0);
      b.pair(rlo, rhi);
    }
    // shaft-silo outflow covers the inflow of the same interval
    for (int k = 0; k < S; ++k) {
      const auto& silo = mine.silos[k];
      if (kind_of(silo.node_id) != NodeKind::ShaftSilo) continue;
      int r = b.add_ineq(at("dom." + silo.node_id, t), RowFamily::FeedDominance, 0.0);
      for (int j = 0; j < L; ++j) {
        if (mine.bc_links[j].to_node == silo.node_id) b.ineq(r, lay.col(lay.sigma[j], t), 1.0);
        if (mine.bc_links[j].from_node == silo.node_id) b.ineq(r, lay.col(lay.sigma[j], t), -1.0);
      }
    }
    if (t > 0) {
      for (int j : cf_links) {
        const auto& link = mine.bc_links[j];
        int rlo = b.add_ineq(at("ramp_lo." + link.id, t), RowFamily::Ramp, -link.ramp_min);
        b.ineq(rlo, lay.col(lay.sigma[j], t), -1.0);
        b.ineq(rlo, lay.col(lay.sigma[j], t - 1), 1.0);
        int rhi = b.add_ineq(at("ramp_hi." + link.id, t), RowFamily::Ramp, link.ramp_max);
        b.ineq(rhi, lay.col(lay.sigma[j], t), 1.0);
        b.ineq(rhi, lay.col(lay.sigma[j], t - 1), -1.0);
        b.pair(rlo, rhi);
      }
    }
    auto box = [&](int col, double lo_v, double hi_v, const std::string& nm, RowFamily fam) {
      int rlo = b.add_ineq(at(nm + "_lo", t), fam, -lo_v);
      b.ineq(rlo, col, -1.0);
      int rhi = b.add_ineq(at(nm + "_hi", t), fam, hi_v);
      b.ineq(rhi, col, 1.0);
      b.pair(rlo, rhi);
    };
    box(lay.col(lay.e_phs, t), mine.phs.energy_min, mine.phs.energy_max, "e_phs", RowFamily::StorageBox);
    box(lay.col(lay.p_phsc, t), mine.phs.charge_min, mine.phs.charge_max, "p_phsc", RowFamily::ChargeBox);
    box(lay.col(lay.p_phsd, t), mine.phs.discharge_min, mine.phs.discharge_max, "p_phsd",
        RowFamily::DischargeBox);
    box(lay.col(lay.e_tst, t), mine.tst.energy_min, mine.tst.energy_max, "e_tst", RowFamily::StorageBox);
    box(lay.col(lay.h_tstc, t), mine.tst.charge_min, mine.tst.charge_max, "h_tstc", RowFamily::ChargeBox);
    box(lay.col(lay.h_tstd, t), mine.tst.discharge_min, mine.tst.discharge_max, "h_tstd",
        RowFamily::DischargeBox);
    for (int u = 0; u < U; ++u) {
      std::string k = to_string(mine.units[u].kind);
      std::transform(k.begin(), k.end(), k.begin(), [](unsigned char c) { return std::tolower(c); });
      box(lay.col(lay.h_unit[u], t), mine.units[u].heat_min, mine.units[u].heat_max, "h_" + k,
          RowFamily::UnitHeatBox);
    }
    box(lay.col(lay.p_pv, t), 0.0, mine.profiles.pv_avail[t], "pv", RowFamily::PvBound);
    box(lay.col(lay.p_wt, t), 0.0, mine.profiles.wt_avail[t], "wt", RowFamily::WtBound);
    {
      int rlo = b.add_ineq(at("g_lo", t), RowFamily::GridBox, 0.0);
      b.ineq(rlo, lay.col(lay.p_g, t), -1.0);
      hooks[xi_at(mine.id + ".p_g_min")].push_back({false, rlo, -1, -1.0});
      int rhi = b.add_ineq(at("g_hi", t), RowFamily::GridBox, 0.0);
      b.ineq(rhi, lay.col(lay.p_g, t), 1.0);
      hooks[xi_at(mine.id + ".p_g_max")].push_back({false, rhi, -1, 1.0});
      b.pair(rlo, rhi);
      lay.row_g_lo[t] = rlo;
      lay.row_g_hi[t] = rhi;
    }
  }
  // horizon ordering: mined coal <= delivered coal <= CPP demand
  {
    int r = b.add_ineq("mined_le_delivered", RowFamily::DemandOrder, 0.0);
    for (int t = 0; t < T; ++t) {
      for (int j : cf_links) b.ineq(r, lay.col(lay.q[j], t), 1.0);
      for (int j : cpp_links) b.ineq(r, lay.col(lay.q[j], t), -1.0);
    }
    r = b.add_ineq("delivered_le_demand", RowFamily::DemandOrder, mine.profiles.cpp_demand);
    for (int t = 0; t < T; ++t)
      for (int j : cpp_links) b.ineq(r, lay.col(lay.q[j], t), 1.0);
  }

  const int m_eq = static_cast<int>(b.eq_rhs.size());
  const int m_ineq = static_cast<int>(b.ineq_rhs.size());
  lp.eq_matrix.resize(m_eq, n_cols);
  lp.eq_matrix.setFromTriplets(b.eq_trip.begin(), b.eq_trip.end());
  lp.eq_matrix.makeCompressed();
  lp.ineq_matrix.resize(m_ineq, n_cols);
  lp.ineq_matrix.setFromTriplets(b.ineq_trip.begin(), b.ineq_trip.end());
  lp.ineq_matrix.makeCompressed();
  lp.eq_rhs_base = Eigen::Map<Vec>(b.eq_rhs.data(), m_eq);
  lp.ineq_rhs_base = Eigen::Map<Vec>(b.ineq_rhs.data(), m_ineq);
  lp.eq_names = std::move(b.eq_names);
  lp.ineq_names = std::move(b.ineq_names);
  lp.eq_families = std::move(b.eq_fams);
  lp.ineq_families = std::move(b.ineq_fams);
  lp.ineq_partner = std::move(b.ineq_partner);

  lp.params.resize(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    lp.params[i].name = names[i];
    lp.params[i].value = xi_val[i];
    lp.params[i].box_lo = xi_box[i].lo;
    lp.params[i].box_hi = xi_box[i].hi;
    lp.params[i].hooks = std::move(hooks[i]);
  }

  // advisory column ranges over the whole search box, used for big-M sizing
  lp.col_bound_lo = Vec::Zero(n_cols);
  lp.col_bound_hi = Vec::Zero(n_cols);
  for (int t = 0; t < T; ++t) {
    auto setb = [&](int offc, double lo_v, double hi_v) {
      lp.col_bound_lo[lay.col(offc, t)] = lo_v;
      lp.col_bound_hi[lay.col(offc, t)] = hi_v;
    };
    for (int j = 0; j < L; ++j) {
      const auto& link = mine.bc_links[j];
      setb(lay.q[j], 0.0, link.feed_max);
      setb(lay.sigma[j], 0.0, link.feed_max / (3.6 * link.speed));
      setb(lay.p_bc[j], std::min(0.0, xi_box[xi_at(mine.id + ".p_bc_min." + link.id)].lo),
           xi_box[xi_at(mine.id + ".p_bc_max." + link.id)].hi);
    }
    for (int k = 0; k < S; ++k) setb(lay.m_silo[k], mine.silos[k].capacity_min, mine.silos[k].capacity_max);
    setb(lay.e_phs, mine.phs.energy_min, mine.phs.energy_max);
    setb(lay.p_phsc, mine.phs.charge_min, mine.phs.charge_max);
    setb(lay.p_phsd, mine.phs.discharge_min, mine.phs.discharge_max);
    setb(lay.e_tst, mine.tst.energy_min, mine.tst.energy_max);
    setb(lay.h_tstc, mine.tst.charge_min, mine.tst.charge_max);
    setb(lay.h_tstd, mine.tst.discharge_min, mine.tst.discharge_max);
    for (int u = 0; u < U; ++u) setb(lay.h_unit[u], mine.units[u].heat_min, mine.units[u].heat_max);
    setb(lay.p_pv, 0.0, mine.profiles.pv_avail[t]);
    setb(lay.p_wt, 0.0, mine.profiles.wt_avail[t]);
    setb(lay.p_g, xi_box[xi_at(mine.id + ".p_g_min")].lo, xi_box[xi_at(mine.id + ".p_g_max")].hi);
  }
  lp.check_consistent();

  MineLp out;
  out.lp = std::move(lp);
  out.layout = std::move(lay);
  out.mine_id = mine.id;
  return out;
}

LpProblem build_lp(const MineScenario& mine, const ParameterVector* params) {
  return build_mine_lp(mine, params).lp;
}

}  // namespace vppfra
