#pragma once

#include "vppfra/lp.hpp"

namespace vppfra {

// KKT optimality system of one mine's dispatch LP, parameterized by the
// learnable vector xi (rhs cells only): stationarity, primal feasibility,
// dual feasibility, complementarity (one binary indicator per inequality
// row under big-M), and a strong-duality residual checked post hoc.
struct KktSystem {
  LpProblem lp;
  double big_m_scale = 10.0;
  Vec big_m;  // per inequality row

  int n_binaries() const { return lp.n_ineq(); }
  int n_xi() const { return static_cast<int>(lp.params.size()); }

  // Parameter hooks as matrices: rhs(xi) = rhs_base + H * xi.
  SpMat hook_eq() const;    // n_eq x n_xi
  SpMat hook_ineq() const;  // n_ineq x n_xi

  KktResiduals residuals(const Vec& xi, const PrimalDualSolution& sol) const {
    return kkt_residuals(lp, xi, sol);
  }
  double strong_duality_residual(const Vec& xi, const PrimalDualSolution& sol) const;
};

// Throws HookViolation if any parameter occupies a coefficient-matrix cell.
// Big-M per row covers the largest slack the row can attain over the
// advisory column ranges and the parameter search box.
KktSystem derive_kkt(const LpProblem& lp, double big_m_scale = 10.0);

}  // namespace vppfra
