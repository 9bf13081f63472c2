#include "vppfra/lp.hpp"

#include <algorithm>
#include <cmath>

namespace vppfra {

const char* to_string(RowFamily f) {
  switch (f) {
    case RowFamily::SigmaTie: return "sigma_tie";
    case RowFamily::BcPowerLaw: return "bc_power_law";
    case RowFamily::SiloBalance: return "silo_balance";
    case RowFamily::SiloEnd: return "silo_end";
    case RowFamily::StorageBalance: return "storage_balance";
    case RowFamily::StorageEnd: return "storage_end";
    case RowFamily::ElecBalance: return "elec_balance";
    case RowFamily::HeatBalance: return "heat_balance";
    case RowFamily::Delivery: return "delivery";
    case RowFamily::QLower: return "q_lower";
    case RowFamily::QCap: return "q_cap";
    case RowFamily::BcPowerLower: return "bc_power_lower";
    case RowFamily::BcPowerUpper: return "bc_power_upper";
    case RowFamily::SiloBox: return "silo_box";
    case RowFamily::Ramp: return "ramp";
    case RowFamily::FeedDominance: return "feed_dominance";
    case RowFamily::StorageBox: return "storage_box";
    case RowFamily::ChargeBox: return "charge_box";
    case RowFamily::DischargeBox: return "discharge_box";
    case RowFamily::UnitHeatBox: return "unit_heat_box";
    case RowFamily::PvBound: return "pv_bound";
    case RowFamily::WtBound: return "wt_bound";
    case RowFamily::GridBox: return "grid_box";
    case RowFamily::DemandOrder: return "demand_order";
    case RowFamily::Other: return "other";
  }
  return "?";
}

Vec LpProblem::param_values() const {
  Vec v(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) v[static_cast<int>(i)] = params[i].value;
  return v;
}

Vec LpProblem::eq_rhs_for(const Vec& xi) const {
  Vec b = eq_rhs_base;
  for (std::size_t i = 0; i < params.size(); ++i)
    for (const auto& hk : params[i].hooks)
      if (hk.on_eq) b[hk.row] += hk.coeff * xi[static_cast<int>(i)];
  return b;
}

Vec LpProblem::ineq_rhs_for(const Vec& xi) const {
  Vec h = ineq_rhs_base;
  for (std::size_t i = 0; i < params.size(); ++i)
    for (const auto& hk : params[i].hooks)
      if (!hk.on_eq) h[hk.row] += hk.coeff * xi[static_cast<int>(i)];
  return h;
}

int LpProblem::col(const std::string& flat_name) const {
  auto it = var_index.find(flat_name);
  if (it == var_index.end()) throw Error("unknown LP variable: " + flat_name);
  return it->second;
}

void LpProblem::check_consistent() const {
  const int n = n_cols();
  if (eq_matrix.cols() != n || ineq_matrix.cols() != n)
    throw ValidationError("LpProblem: matrix column count mismatch");
  if (eq_matrix.rows() != n_eq() || ineq_matrix.rows() != n_ineq())
    throw ValidationError("LpProblem: matrix row count mismatch");
  if (static_cast<int>(col_names.size()) != n ||
      static_cast<int>(eq_names.size()) != n_eq() ||
      static_cast<int>(ineq_names.size()) != n_ineq())
    throw ValidationError("LpProblem: name tables inconsistent");
  std::vector<char> seen(n, 0);
  for (const auto& [name, col] : var_index) {
    if (col < 0 || col >= n) throw ValidationError("LpProblem: var_index out of range for " + name);
    if (seen[col]) throw ValidationError("LpProblem: two names map to column of " + name);
    seen[col] = 1;
  }
  for (char s : seen)
    if (!s) throw ValidationError("LpProblem: column without a var_index name");
  for (const auto& p : params) {
    if (p.hooks.empty()) throw ValidationError("LpProblem: parameter without hook cells: " + p.name);
    for (const auto& hk : p.hooks) {
      int rows = hk.on_eq ? n_eq() : n_ineq();
      if (hk.row < 0 || hk.row >= rows)
        throw ValidationError("LpProblem: hook row out of range for " + p.name);
    }
  }
}

double KktResiduals::max_abs() const {
  return std::max({primal_eq, primal_ineq, dual_neg, stationarity, complementarity, duality_gap});
}

KktResiduals kkt_residuals(const LpProblem& lp, const Vec& xi, const PrimalDualSolution& sol) {
  KktResiduals r;
  const Vec b = lp.eq_rhs_for(xi);
  const Vec h = lp.ineq_rhs_for(xi);
  if (lp.n_eq() > 0) {
    Vec pe = lp.eq_matrix * sol.primal - b;
    r.primal_eq = pe.cwiseAbs().maxCoeff();
  }
  Vec slack;  // h - Gx >= 0
  if (lp.n_ineq() > 0) {
    slack = h - lp.ineq_matrix * sol.primal;
    r.primal_ineq = std::max(0.0, (-slack).maxCoeff());
    r.dual_neg = std::max(0.0, (-sol.ineq_duals).maxCoeff());
    r.complementarity = (sol.ineq_duals.cwiseProduct(slack)).cwiseAbs().maxCoeff();
  }
  Vec st = lp.c;
  if (lp.n_eq() > 0) st += lp.eq_matrix.transpose() * sol.eq_duals;
  if (lp.n_ineq() > 0) st += lp.ineq_matrix.transpose() * sol.ineq_duals;
  r.stationarity = st.cwiseAbs().maxCoeff();
  double primal_obj = lp.c.dot(sol.primal);
  double dual_obj = 0.0;
  if (lp.n_eq() > 0) dual_obj -= b.dot(sol.eq_duals);
  if (lp.n_ineq() > 0) dual_obj -= h.dot(sol.ineq_duals);
  r.duality_gap = std::abs(primal_obj - dual_obj);
  return r;
}

double feas_tol_for(const LpProblem& lp) {
  double rhs_inf = 0.0;
  const Vec b = lp.eq_rhs();
  const Vec h = lp.ineq_rhs();
  if (b.size() > 0) rhs_inf = std::max(rhs_inf, b.cwiseAbs().maxCoeff());
  if (h.size() > 0) rhs_inf = std::max(rhs_inf, h.cwiseAbs().maxCoeff());
  return 1e-8 * (1.0 + rhs_inf);
}

}  // namespace vppfra
