#include "vppfra/qp.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

namespace vppfra {

// Newton direction, slacks and multipliers eliminated:
//   [H + G'WG  E'] [dv]   [-r_d - G'rc]        W  = diag(mu/s)
//   [E        -dI] [dy] = [-r_p]               rc = tau/s - mu + W r_g
//   ds  = -r_g - G dv
//   dmu = rc + W (G dv)
QpResult solve_qp(const QpProblem& qp, const QpOptions& opts, const Vec* warm_v) {
  const int n = qp.n();
  const int me = static_cast<int>(qp.e.size());
  const int mi = static_cast<int>(qp.h.size());

  QpResult res;
  res.v = (warm_v && warm_v->size() == n) ? *warm_v : Vec::Zero(n);

  const double scale_obj = 1.0 + qp.g.cwiseAbs().maxCoeff();
  const double scale_e = 1.0 + (me ? qp.e.cwiseAbs().maxCoeff() : 0.0);
  const double scale_h = 1.0 + (mi ? qp.h.cwiseAbs().maxCoeff() : 0.0);

  SpMat base(n + me, n + me);
  {
    std::vector<Eigen::Triplet<double>> trip;
    auto add = [&trip](int r, int c, double v) {
      if (r >= c) trip.emplace_back(r, c, v);
    };
    for (int k = 0; k < qp.H.outerSize(); ++k)
      for (SpMat::InnerIterator it(qp.H, k); it; ++it)
        add(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (int j = 0; j < n; ++j) add(j, j, opts.reg);
    for (int k = 0; k < qp.E.outerSize(); ++k)
      for (SpMat::InnerIterator it(qp.E, k); it; ++it)
        add(n + static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (int r = 0; r < me; ++r) add(n + r, n + r, -opts.reg);
    base.setFromTriplets(trip.begin(), trip.end());
    base.makeCompressed();
  }

  Eigen::SimplicialLDLT<SpMat, Eigen::Lower> ldlt;

  if (mi == 0) {
    ldlt.compute(base);
    if (ldlt.info() != Eigen::Success) return res;
    Vec rhs(n + me);
    rhs.head(n) = -qp.g;
    if (me) rhs.tail(me) = qp.e;
    Vec sol = ldlt.solve(rhs);
    res.v = sol.head(n);
    res.y = me ? Vec(sol.tail(me)) : Vec();
    res.optimal = true;
    res.obj = 0.5 * res.v.dot(Vec(qp.H * res.v)) + qp.g.dot(res.v);
    res.iters = 1;
    return res;
  }

  SpMat Gt = qp.G.transpose();

  Vec s = qp.h - qp.G * res.v;
  double smin = s.minCoeff();
  if (smin < 1e-3 * scale_h) s.array() += 1e-3 * scale_h - smin + 1e-6 * scale_h;
  Vec mu = Vec::Constant(mi, std::max(1e-2, 1e-2 * scale_obj));
  Vec y = Vec::Zero(me);

  bool analyzed = false;
  double best_kkt = std::numeric_limits<double>::infinity();
  Vec Hv = qp.H * res.v;

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    res.iters = iter + 1;
    Vec r_d = Hv + qp.g + Gt * mu;
    if (me) r_d += qp.E.transpose() * y;
    Vec r_p = me ? Vec(qp.E * res.v - qp.e) : Vec();
    Vec r_g = qp.G * res.v + s - qp.h;
    double gap = mu.dot(s) / mi;

    res.primal_inf = std::max(me ? r_p.cwiseAbs().maxCoeff() / scale_e : 0.0,
                              r_g.cwiseAbs().maxCoeff() / scale_h);
    res.dual_inf = r_d.cwiseAbs().maxCoeff() / scale_obj;
    res.gap = gap / scale_obj;
    double kkt = std::max({res.primal_inf, res.dual_inf, res.gap});
    best_kkt = std::min(best_kkt, kkt);
    if (kkt < opts.tol) {
      res.optimal = true;
      break;
    }
    if (iter > 30 && kkt > 1e4 * best_kkt) break;

    Vec w = mu.cwiseQuotient(s);
    SpMat dyn = Gt * w.asDiagonal() * qp.G;
    SpMat dynL = SpMat(dyn.triangularView<Eigen::Lower>());
    dynL.conservativeResize(n + me, n + me);
    SpMat K = base + dynL;
    if (!analyzed) {
      ldlt.analyzePattern(K);
      analyzed = true;
    }
    ldlt.factorize(K);
    if (ldlt.info() != Eigen::Success) {
      ldlt.analyzePattern(K);
      ldlt.factorize(K);
      if (ldlt.info() != Eigen::Success) break;
    }

    auto solve_dir = [&](const Vec& tau) {
      Vec rc = tau.cwiseQuotient(s) - mu + w.cwiseProduct(r_g);
      Vec rhs(n + me);
      rhs.head(n) = -r_d - Gt * rc;
      if (me) rhs.tail(me) = -r_p;
      Vec sol = ldlt.solve(rhs);
      Vec dv = sol.head(n);
      Vec dy = me ? Vec(sol.tail(me)) : Vec();
      Vec ds = -r_g - qp.G * dv;
      Vec dmu = rc + w.cwiseProduct(Vec(qp.G * dv));
      return std::make_tuple(dv, dy, ds, dmu);
    };
    auto step_len = [](const Vec& z, const Vec& dz) {
      double a = 1.0;
      for (int i = 0; i < z.size(); ++i)
        if (dz[i] < 0.0) a = std::min(a, -z[i] / dz[i]);
      return a;
    };

    auto [dv_a, dy_a, ds_a, dmu_a] = solve_dir(Vec::Zero(mi));
    double ap_a = step_len(s, ds_a);
    double ad_a = step_len(mu, dmu_a);
    double gap_aff = (mu + ad_a * dmu_a).dot(s + ap_a * ds_a) / mi;
    double sigma = std::clamp(std::pow(gap_aff / std::max(gap, 1e-300), 3.0), 1e-8, 0.9);

    Vec tau = Vec::Constant(mi, sigma * gap) - ds_a.cwiseProduct(dmu_a);
    auto [dv, dy, ds, dmu] = solve_dir(tau);
    double ap = std::min(1.0, opts.step_frac * step_len(s, ds));
    double ad = std::min(1.0, opts.step_frac * step_len(mu, dmu));

    res.v += ap * dv;
    s += ap * ds;
    mu += ad * dmu;
    if (me) y += ad * dy;
    Hv = qp.H * res.v;
  }

  res.y = y;
  res.mu = mu.cwiseMax(0.0);
  res.slack = s;
  res.obj = 0.5 * res.v.dot(Hv) + qp.g.dot(res.v);
  if (!res.optimal && res.primal_inf > 1e-6 && res.dual_inf < 1e2 * opts.tol)
    res.likely_infeasible = true;
  return res;
}

}  // namespace vppfra
