#include "vppfra/kkt_system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vppfra {

SpMat KktSystem::hook_eq() const {
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t i = 0; i < lp.params.size(); ++i)
    for (const auto& hk : lp.params[i].hooks)
      if (hk.on_eq) trip.emplace_back(hk.row, static_cast<int>(i), hk.coeff);
  SpMat H(lp.n_eq(), n_xi());
  H.setFromTriplets(trip.begin(), trip.end());
  return H;
}

SpMat KktSystem::hook_ineq() const {
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t i = 0; i < lp.params.size(); ++i)
    for (const auto& hk : lp.params[i].hooks)
      if (!hk.on_eq) trip.emplace_back(hk.row, static_cast<int>(i), hk.coeff);
  SpMat H(lp.n_ineq(), n_xi());
  H.setFromTriplets(trip.begin(), trip.end());
  return H;
}

double KktSystem::strong_duality_residual(const Vec& xi, const PrimalDualSolution& sol) const {
  double primal = lp.c.dot(sol.primal);
  double dual = 0.0;
  if (lp.n_eq()) dual -= lp.eq_rhs_for(xi).dot(sol.eq_duals);
  if (lp.n_ineq()) dual -= lp.ineq_rhs_for(xi).dot(sol.ineq_duals);
  return std::abs(primal - dual);
}

KktSystem derive_kkt(const LpProblem& lp, double big_m_scale) {
  for (const auto& p : lp.params) {
    if (p.hooks.empty()) throw HookViolation("parameter " + p.name + " has no hook cells");
    for (const auto& hk : p.hooks)
      if (hk.col >= 0)
        throw HookViolation("parameter " + p.name +
                            " occupies a coefficient-matrix cell; stationarity would be bilinear");
  }

  KktSystem sys;
  sys.lp = lp;
  sys.big_m_scale = big_m_scale;

  const int mi = lp.n_ineq();
  sys.big_m = Vec::Zero(mi);

  // rhs at the search-box extreme maximizing slack
  Vec h_max = lp.ineq_rhs_base;
  for (const auto& p : lp.params)
    for (const auto& hk : p.hooks)
      if (!hk.on_eq) h_max[hk.row] += hk.coeff * (hk.coeff >= 0.0 ? p.box_hi : p.box_lo);

  const bool have_ranges = lp.col_bound_lo.size() == lp.n_cols();
  // max slack = h_max - min_x G x over the advisory column ranges
  Vec g_min = Vec::Zero(mi);
  if (have_ranges) {
    for (int k = 0; k < lp.ineq_matrix.outerSize(); ++k)
      for (SpMat::InnerIterator it(lp.ineq_matrix, k); it; ++it) {
        double contrib = it.value() >= 0.0 ? it.value() * lp.col_bound_lo[it.col()]
                                           : it.value() * lp.col_bound_hi[it.col()];
        g_min[it.row()] += contrib;
      }
  }
  for (int r = 0; r < mi; ++r) {
    double slack_max = have_ranges ? (h_max[r] - g_min[r]) : 0.0;
    if (!std::isfinite(slack_max)) slack_max = 0.0;
    sys.big_m[r] = big_m_scale * (1.0 + std::max(std::abs(h_max[r]), slack_max));
  }
  return sys;
}

}  // namespace vppfra
