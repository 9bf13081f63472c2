#pragma once

#include <Eigen/Sparse>
#include <map>
#include <string>
#include <vector>

#include "vppfra/errors.hpp"

namespace vppfra {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

enum class RowFamily {
  SigmaTie,       // sigma = q / (3.6 * speed)
  BcPowerLaw,     // p = cof*(theta2*V + (theta4 + V/3.6)*q), theta2 hooked in rhs
  SiloBalance,
  SiloEnd,
  StorageBalance,
  StorageEnd,
  ElecBalance,
  HeatBalance,
  Delivery,       // total coal delivered to the CPP equals demand
  QLower,
  QCap,
  BcPowerLower,   // hooked: p_bc_min
  BcPowerUpper,   // hooked: p_bc_max
  SiloBox,
  Ramp,
  FeedDominance,  // shaft-silo outflow covers inflow each interval
  StorageBox,
  ChargeBox,
  DischargeBox,
  UnitHeatBox,
  PvBound,
  WtBound,
  GridBox,        // hooked: p_g_min / p_g_max
  DemandOrder,    // horizon ordering of mined vs delivered coal
  Other,
};

const char* to_string(RowFamily f);

// One learnable parameter: name, current (true or overridden) value, search
// box, and the rhs cells it occupies. rhs_i = rhs_base_i + coeff * value.
// col >= 0 would place the parameter inside the coefficient matrix instead;
// no builder ever does that, and derive_kkt rejects it (the stationarity
// conditions would turn bilinear).
struct ParamHook {
  bool on_eq = false;
  int row = -1;
  int col = -1;
  double coeff = 1.0;
};

struct ParamEntry {
  std::string name;  // e.g. "mine1.theta2.bc3"
  double value = 0.0;
  double box_lo = 0.0;
  double box_hi = 0.0;
  std::vector<ParamHook> hooks;
};

// Canonical linear program
//   min c'x  s.t.  A x = b(xi),  G x <= h(xi)
// where the parameter vector xi occupies rhs cells only. Variable boxes are
// encoded as inequality rows so every bound owns a dual and a complementarity
// pair.
struct LpProblem {
  Vec c;
  SpMat eq_matrix;    // A
  Vec eq_rhs_base;    // b before parameter contributions
  SpMat ineq_matrix;  // G
  Vec ineq_rhs_base;  // h before parameter contributions
  double interval_hours = 1.0;

  std::vector<std::string> col_names;
  std::vector<std::string> eq_names;
  std::vector<std::string> ineq_names;
  std::vector<RowFamily> eq_families;
  std::vector<RowFamily> ineq_families;
  // For box-pair rows, index of the opposite side (-1 otherwise).
  std::vector<int> ineq_partner;

  std::map<std::string, int> var_index;  // flat "name@t" -> column
  std::vector<ParamEntry> params;

  // Advisory per-column ranges implied by the box rows (over the whole
  // parameter search box). Used to size big-M constants; not constraints.
  Vec col_bound_lo, col_bound_hi;

  int n_cols() const { return static_cast<int>(c.size()); }
  int n_eq() const { return static_cast<int>(eq_rhs_base.size()); }
  int n_ineq() const { return static_cast<int>(ineq_rhs_base.size()); }

  Vec param_values() const;
  Vec eq_rhs_for(const Vec& xi) const;
  Vec ineq_rhs_for(const Vec& xi) const;
  Vec eq_rhs() const { return eq_rhs_for(param_values()); }
  Vec ineq_rhs() const { return ineq_rhs_for(param_values()); }

  int col(const std::string& flat_name) const;
  // Checks index/dimension consistency; throws ValidationError.
  void check_consistent() const;
};

struct PrimalDualSolution {
  Vec primal;
  Vec eq_duals;    // lambda, free sign
  Vec ineq_duals;  // mu >= 0
  double objective = 0.0;
};

struct KktResiduals {
  double primal_eq = 0.0;      // max |Ax - b|
  double primal_ineq = 0.0;    // max (Gx - h)_+
  double dual_neg = 0.0;       // max (-mu)_+
  double stationarity = 0.0;   // max |c + A'l + G'm|
  double complementarity = 0.0;// max |mu_i (Gx - h)_i|
  double duality_gap = 0.0;    // |c'x + b'l + h'm|
  double max_abs() const;
};

KktResiduals kkt_residuals(const LpProblem& lp, const Vec& xi, const PrimalDualSolution& sol);

// feas_tol convention used repo-wide: 1e-8 * (1 + ||rhs||_inf).
double feas_tol_for(const LpProblem& lp);

}  // namespace vppfra
