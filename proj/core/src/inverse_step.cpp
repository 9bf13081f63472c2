#include "vppfra/inverse_step.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "vppfra/log.hpp"

namespace vppfra {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double two_norm_res(const SpMat& P, const Vec& x, const std::vector<double>& obs) {
  Vec r = P * x;
  double s = 0.0;
  for (int t = 0; t < r.size(); ++t) {
    double d = r[t] - obs[static_cast<std::size_t>(t)];
    s += d * d;
  }
  return std::sqrt(s);
}

struct QpLayout {
  int n_x = 0, n_xi = 0, m_eq = 0, m_ineq = 0;
  int x0 = 0, xi0 = 0, l0 = -1, mu0_count = 0;
  std::vector<int> mu_col;  // per ineq row, -1 when pinned to zero or absent
  int total = 0;
};

struct Weights {
  double bc = 1.0;
  double grid = 1.0;
};

struct Assembled {
  QpProblem qp;
  QpLayout lay;
};

// Node subproblem of the step MIP with binaries fixed per `dec`
// (-1 undecided, 0 inactive, 1 active), z relaxed on undecided rows.
// With dual_block the exact projection of the big-M relaxation is used:
// stationarity + mu bounds + the coupling slack/M + mu/M <= 1. The
// constraint part is weight-independent; set_weights refreshes H and g.
Assembled assemble_constraints(const StepProgram& prog, const std::vector<int8_t>& dec,
                               bool dual_block, bool caps, double m_mult) {
  const LpProblem& lp = prog.kkt->lp;
  QpLayout lay;
  lay.n_x = lp.n_cols();
  lay.n_xi = prog.kkt->n_xi();
  lay.m_eq = lp.n_eq();
  lay.m_ineq = lp.n_ineq();
  lay.x0 = 0;
  lay.xi0 = lay.n_x;
  int next = lay.n_x + lay.n_xi;
  lay.mu_col.assign(lay.m_ineq, -1);
  if (dual_block) {
    lay.l0 = next;
    next += lay.m_eq;
    for (int r = 0; r < lay.m_ineq; ++r)
      if (dec[r] != 0) lay.mu_col[r] = next++, ++lay.mu0_count;
  }
  lay.total = next;

  QpProblem qp;
  const int n = lay.total;
  Eigen::SparseMatrix<double, Eigen::RowMajor> Grow = lp.ineq_matrix;
  Eigen::SparseMatrix<double, Eigen::RowMajor> Hrow = prog.hook_ineq;

  // equalities: LP rows, forced-active rows, stationarity
  std::vector<Eigen::Triplet<double>> etrip;
  std::vector<double> erhs;
  for (int r = 0; r < lay.m_eq; ++r) erhs.push_back(lp.eq_rhs_base[r]);
  for (int k = 0; k < lp.eq_matrix.outerSize(); ++k)
    for (SpMat::InnerIterator it(lp.eq_matrix, k); it; ++it)
      etrip.emplace_back(static_cast<int>(it.row()), lay.x0 + static_cast<int>(it.col()), it.value());
  for (int k = 0; k < prog.hook_eq.outerSize(); ++k)
    for (SpMat::InnerIterator it(prog.hook_eq, k); it; ++it)
      etrip.emplace_back(static_cast<int>(it.row()), lay.xi0 + static_cast<int>(it.col()), -it.value());
  for (int r = 0; r < lay.m_ineq; ++r) {
    if (dec[r] != 1) continue;
    int row = static_cast<int>(erhs.size());
    erhs.push_back(lp.ineq_rhs_base[r]);
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(Grow, r); it; ++it)
      etrip.emplace_back(row, lay.x0 + static_cast<int>(it.col()), it.value());
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(Hrow, r); it; ++it)
      etrip.emplace_back(row, lay.xi0 + static_cast<int>(it.col()), -it.value());
  }
  if (dual_block) {
    int stat0 = static_cast<int>(erhs.size());
    for (int j = 0; j < lay.n_x; ++j) erhs.push_back(-prog.c_rec[j]);
    for (int k = 0; k < lp.eq_matrix.outerSize(); ++k)
      for (SpMat::InnerIterator it(lp.eq_matrix, k); it; ++it)
        etrip.emplace_back(stat0 + static_cast<int>(it.col()), lay.l0 + static_cast<int>(it.row()),
                           it.value());
    for (int k = 0; k < lp.ineq_matrix.outerSize(); ++k)
      for (SpMat::InnerIterator it(lp.ineq_matrix, k); it; ++it)
        if (lay.mu_col[it.row()] >= 0)
          etrip.emplace_back(stat0 + static_cast<int>(it.col()), lay.mu_col[it.row()], it.value());
  }
  qp.E.resize(static_cast<int>(erhs.size()), n);
  qp.E.setFromTriplets(etrip.begin(), etrip.end());
  qp.E.makeCompressed();
  qp.e = Eigen::Map<Vec>(erhs.data(), static_cast<int>(erhs.size()));

  // inequalities: open LP rows, slack caps, xi box, dual bounds, coupling
  std::vector<Eigen::Triplet<double>> gtrip;
  std::vector<double> grhs;
  auto iq_row = [&](double rhs) {
    grhs.push_back(rhs);
    return static_cast<int>(grhs.size()) - 1;
  };
  for (int r = 0; r < lay.m_ineq; ++r) {
    if (dec[r] == 1) continue;
    int row = iq_row(lp.ineq_rhs_base[r]);
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(Grow, r); it; ++it)
      gtrip.emplace_back(row, lay.x0 + static_cast<int>(it.col()), it.value());
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(Hrow, r); it; ++it)
      gtrip.emplace_back(row, lay.xi0 + static_cast<int>(it.col()), -it.value());
  }
  if (caps) {
    for (int r = 0; r < lay.m_ineq; ++r) {
      if (dec[r] == 1) continue;
      double M = m_mult * prog.kkt->big_m[r];
      int row = iq_row(M - lp.ineq_rhs_base[r]);
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(Grow, r); it; ++it)
        gtrip.emplace_back(row, lay.x0 + static_cast<int>(it.col()), -it.value());
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(Hrow, r); it; ++it)
        gtrip.emplace_back(row, lay.xi0 + static_cast<int>(it.col()), it.value());
    }
  }
  for (int k = 0; k < lay.n_xi; ++k) {
    const auto& p = lp.params[k];
    int r1 = iq_row(p.box_hi);
    gtrip.emplace_back(r1, lay.xi0 + k, 1.0);
    int r2 = iq_row(-p.box_lo);
    gtrip.emplace_back(r2, lay.xi0 + k, -1.0);
  }
  if (dual_block) {
    for (int r = 0; r < lay.m_ineq; ++r) {
      if (lay.mu_col[r] < 0) continue;
      double M = m_mult * prog.kkt->big_m[r];
      int r1 = iq_row(0.0);
      gtrip.emplace_back(r1, lay.mu_col[r], -1.0);  // mu >= 0
      int r2 = iq_row(M);
      gtrip.emplace_back(r2, lay.mu_col[r], 1.0);  // mu <= M
      if (dec[r] == -1) {
        // slack/M + mu/M <= 1: (-G x + H xi + mu)/M <= 1 - h_base/M
        double Minv = 1.0 / M;
        int r3 = iq_row(1.0 - lp.ineq_rhs_base[r] * Minv);
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(Grow, r); it; ++it)
          gtrip.emplace_back(r3, lay.x0 + static_cast<int>(it.col()), -it.value() * Minv);
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(Hrow, r); it; ++it)
          gtrip.emplace_back(r3, lay.xi0 + static_cast<int>(it.col()), it.value() * Minv);
        gtrip.emplace_back(r3, lay.mu_col[r], Minv);
      }
    }
  }
  qp.G.resize(static_cast<int>(grhs.size()), n);
  qp.G.setFromTriplets(gtrip.begin(), gtrip.end());
  qp.G.makeCompressed();
  qp.h = Eigen::Map<Vec>(grhs.data(), static_cast<int>(grhs.size()));
  return {std::move(qp), std::move(lay)};
}

void set_weights(const StepProgram& prog, Assembled& as, const Weights& w) {
  const QpLayout& lay = as.lay;
  const int n = lay.total;
  std::vector<Eigen::Triplet<double>> htrip;
  as.qp.g = Vec::Zero(n);
  auto add_proj = [&](const SpMat& P, const std::vector<double>& obs, double weight) {
    SpMat pt = P.transpose();
    SpMat ptp = pt * P;
    for (int k = 0; k < ptp.outerSize(); ++k)
      for (SpMat::InnerIterator it(ptp, k); it; ++it)
        htrip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                           2.0 * weight * it.value());
    Vec o(P.rows());
    for (int t = 0; t < P.rows(); ++t) o[t] = obs[static_cast<std::size_t>(t)];
    Vec go = pt * o;
    for (int j = 0; j < go.size(); ++j) as.qp.g[j] += -2.0 * weight * go[j];
  };
  add_proj(prog.p_bc_rows, prog.obs.bc_total, w.bc);
  add_proj(prog.p_g_rows, prog.obs.grid, w.grid);
  for (int k = 0; k < lay.n_xi; ++k) {
    double d = prog.prox_scale[k];
    htrip.emplace_back(lay.xi0 + k, lay.xi0 + k, prog.rho * d * d);
    as.qp.g[lay.xi0 + k] += -prog.rho * d * d * prog.xi_prev[k];
  }
  as.qp.H.resize(n, n);
  as.qp.H.setFromTriplets(htrip.begin(), htrip.end());
  as.qp.H.makeCompressed();
}

struct FitOut {
  bool ok = false;
  bool infeasible = false;
  Vec x, xi;
  Vec mu_rows;    // per original ineq row (dual block only)
  Vec slack_rows; // h(xi) - Gx per original ineq row
  double f_smooth = kInf;
  double slack_est = 0.0;
  double loss = kInf;
  double prox = 0.0;
};

double prox_value(const StepProgram& prog, const Vec& xi) {
  double s = 0.0;
  for (int k = 0; k < xi.size(); ++k) {
    double d = prog.prox_scale[k] * (xi[k] - prog.xi_prev[k]);
    s += d * d;
  }
  return 0.5 * prog.rho * s;
}

// Iteratively reweighted fit: minimizes the delta-smoothed step objective
// over the node polytope. At the IRLS fixed point the iterate minimizes the
// smoothed objective itself; slack_est tracks the residual optimality slack.
FitOut irls_fit(const StepProgram& prog, const std::vector<int8_t>& dec, bool dual_block, bool caps,
                double m_mult, const StepOptions& opts) {
  Assembled cur = assemble_constraints(prog, dec, dual_block, caps, m_mult);
  const double delta = 1e-7 * prog.obs_scale;

  FitOut out;
  double a_bc = prog.obs_scale, a_g = prog.obs_scale;
  Vec warm;
  double prev_f = kInf;
  double last_decrease = kInf;
  for (int it = 0; it < opts.irls_iters; ++it) {
    Weights w{1.0 / (2.0 * a_bc), 1.0 / (2.0 * a_g)};
    set_weights(prog, cur, w);
    QpOptions qo;
    qo.tol = 1e-10;
    QpResult qr = solve_qp(cur.qp, qo, warm.size() ? &warm : nullptr);
    if (!qr.optimal && qr.likely_infeasible) {
      out.infeasible = true;
      return out;
    }
    if (!qr.optimal && it == 0) {
      // one retry with stronger regularization
      qo.reg = 1e-7;
      qr = solve_qp(cur.qp, qo, nullptr);
      if (!qr.optimal) {
        out.infeasible = qr.likely_infeasible;
        if (!qr.likely_infeasible && qr.primal_inf < 1e-6) {
          // usable but sloppy point; continue with it
        } else {
          return out;
        }
      }
    }
    warm = qr.v;
    Vec x = qr.v.head(cur.lay.n_x);
    Vec xi = qr.v.segment(cur.lay.xi0, cur.lay.n_xi);
    double r_bc = two_norm_res(prog.p_bc_rows, x, prog.obs.bc_total);
    double r_g = two_norm_res(prog.p_g_rows, x, prog.obs.grid);
    double f = std::sqrt(r_bc * r_bc + delta * delta) + std::sqrt(r_g * r_g + delta * delta) +
               prox_value(prog, xi);
    if (f < out.f_smooth) {
      out.f_smooth = f;
      out.x = x;
      out.xi = xi;
      out.loss = r_bc + r_g;
      out.prox = prox_value(prog, xi);
      if (dual_block) {
        out.mu_rows = Vec::Zero(prog.kkt->lp.n_ineq());
        for (int r = 0; r < prog.kkt->lp.n_ineq(); ++r)
          if (cur.lay.mu_col[r] >= 0) out.mu_rows[r] = std::max(0.0, qr.v[cur.lay.mu_col[r]]);
      }
      out.ok = true;
    }
    last_decrease = prev_f - f;
    prev_f = f;
    double na_bc = std::sqrt(r_bc * r_bc + delta * delta);
    double na_g = std::sqrt(r_g * r_g + delta * delta);
    bool stable = std::abs(na_bc - a_bc) < 1e-8 * (1.0 + a_bc) &&
                  std::abs(na_g - a_g) < 1e-8 * (1.0 + a_g);
    a_bc = na_bc;
    a_g = na_g;
    if (it > 0 && (stable || std::abs(last_decrease) < opts.irls_tol * (1.0 + std::abs(f)))) break;
  }
  if (out.ok) {
    const LpProblem& lp = prog.kkt->lp;
    Vec h = lp.ineq_rhs_base + prog.hook_ineq * out.xi;
    out.slack_rows = h - lp.ineq_matrix * out.x;
    out.slack_est = std::max({std::abs(last_decrease), 1e-12 * (1.0 + std::abs(out.f_smooth))}) * 4.0 +
                    2.0 * delta;
  }
  return out;
}

struct Incumbent {
  bool valid = false;
  bool big_m_violated = false;
  StepResult res;
};

Incumbent make_incumbent(const StepProgram& prog, Vec xi, SimplexSolver& fw, StepCache* cache,
                         double m_mult) {
  Incumbent inc;
  const LpProblem& lp = prog.kkt->lp;
  for (int k = 0; k < xi.size(); ++k)
    xi[k] = std::clamp(xi[k], lp.params[k].box_lo, lp.params[k].box_hi);
  for (std::size_t j = 0; j < lp.params.size(); ++j) {
    // empty effective boxes make the dispatch LP structurally empty
    (void)j;
  }
  Vec be = lp.eq_rhs_base + prog.hook_eq * xi;
  Vec bi = lp.ineq_rhs_base + prog.hook_ineq * xi;
  fw.set_rhs(be, bi);
  fw.set_objective(prog.c_rec);
  PrimalDualSolution sol;
  SimplexBasis out_basis;
  try {
    sol = fw.solve(cache && cache->has_basis ? &cache->basis : nullptr, &out_basis);
  } catch (const Infeasible&) {
    return inc;
  } catch (const Unbounded&) {
    return inc;
  }
  if (cache) {
    cache->basis = out_basis;
    cache->has_basis = true;
  }
  std::vector<int> active = fw.last_active_ineq();
  std::vector<char> is_active(lp.n_ineq(), 0);
  for (int r : active) is_active[r] = 1;
  Vec slack = bi - lp.ineq_matrix * sol.primal;
  for (int r = 0; r < lp.n_ineq(); ++r) {
    double M = m_mult * prog.kkt->big_m[r];
    if (is_active[r]) {
      if (sol.ineq_duals[r] > M * (1.0 + 1e-9)) inc.big_m_violated = true;
    } else {
      if (slack[r] > M * (1.0 + 1e-9)) inc.big_m_violated = true;
    }
  }
  double r_bc = two_norm_res(prog.p_bc_rows, sol.primal, prog.obs.bc_total);
  double r_g = two_norm_res(prog.p_g_rows, sol.primal, prog.obs.grid);
  inc.valid = true;
  inc.res.xi = xi;
  inc.res.loss = r_bc + r_g;
  inc.res.objective = inc.res.loss + prox_value(prog, xi);
  inc.res.x = sol.primal;
  inc.res.active_rows = active;
  return inc;
}

}  // namespace

StepProgram build_inverse_step(const KktSystem& kkt, const StepObservation& obs,
                               const Vec& xi_prev, double rho) {
  StepProgram prog;
  prog.kkt = &kkt;
  prog.obs = obs;
  prog.rho = rho;
  if (xi_prev.size() != kkt.n_xi())
    throw Error("build_inverse_step: xi_prev size mismatch");
  prog.xi_prev = xi_prev;

  const LpProblem& lp = kkt.lp;
  // horizon = number of p_g columns
  int T = 0;
  while (lp.var_index.count("p_g@" + std::to_string(T))) ++T;
  if (T == 0) throw Error("build_inverse_step: LP lacks p_g columns");
  if (static_cast<int>(obs.bc_total.size()) != T || static_cast<int>(obs.grid.size()) != T ||
      static_cast<int>(obs.price.size()) != T)
    throw HorizonMismatch("record horizon differs from the model horizon");

  std::vector<Eigen::Triplet<double>> pb, pg;
  for (const auto& [name, col] : lp.var_index) {
    if (name.rfind("p_bc.", 0) == 0) {
      auto atpos = name.rfind('@');
      int t = std::stoi(name.substr(atpos + 1));
      pb.emplace_back(t, col, 1.0);
    }
  }
  for (int t = 0; t < T; ++t) pg.emplace_back(t, lp.col("p_g@" + std::to_string(t)), 1.0);
  prog.p_bc_rows.resize(T, lp.n_cols());
  prog.p_bc_rows.setFromTriplets(pb.begin(), pb.end());
  prog.p_g_rows.resize(T, lp.n_cols());
  prog.p_g_rows.setFromTriplets(pg.begin(), pg.end());

  prog.c_rec = lp.c;
  for (int t = 0; t < T; ++t)
    prog.c_rec[lp.col("p_g@" + std::to_string(t))] = lp.interval_hours * obs.price[t];

  prog.hook_eq = kkt.hook_eq();
  prog.hook_ineq = kkt.hook_ineq();

  prog.prox_scale = Vec::Ones(kkt.n_xi());
  for (int k = 0; k < kkt.n_xi(); ++k) {
    double half = 0.5 * (lp.params[k].box_hi - lp.params[k].box_lo);
    prog.prox_scale[k] = 1.0 / std::max(half, 1e-9);
  }

  double ss = 0.0;
  int cnt = 0;
  for (double v : obs.bc_total) ss += v * v, ++cnt;
  for (double v : obs.grid) ss += v * v, ++cnt;
  prog.obs_scale = std::max(1e-6, std::sqrt(ss / std::max(1, cnt)));
  return prog;
}

namespace {

StepResult solve_attempt(const StepProgram& prog, const StepOptions& opts, StepCache* cache,
                         bool& big_m_trouble) {
  const LpProblem& lp = prog.kkt->lp;
  const int mi = lp.n_ineq();
  SimplexSolver fw(lp);

  Incumbent best;
  auto consider = [&](const Incumbent& cand) {
    if (!cand.valid) return;
    if (cand.big_m_violated) big_m_trouble = true;
    if (!best.valid || cand.res.objective < best.res.objective) best = cand;
  };

  // 1) replay under the previous estimate
  consider(make_incumbent(prog, prog.xi_prev, fw, cache, opts.big_m_multiplier));
  if (!best.valid) {
    // previous estimate produced an empty dispatch set; fall back to midpoints
    Vec mid(prog.kkt->n_xi());
    for (int k = 0; k < mid.size(); ++k)
      mid[k] = 0.5 * (lp.params[k].box_lo + lp.params[k].box_hi);
    consider(make_incumbent(prog, mid, fw, cache, opts.big_m_multiplier));
  }
  if (!best.valid)
    throw Infeasible("inverse step: no feasible dispatch inside the search box", "search_box");

  // 2) active-set refinement from the incumbent (or cached) active set
  std::vector<int> active = (cache && cache->has_active) ? cache->active : best.res.active_rows;
  double floor_loss = 1e-9 * prog.obs_scale;
  for (int loop = 0; loop < opts.refine_loops; ++loop) {
    std::vector<int8_t> dec(mi, -1);
    for (int r : active) dec[r] = 1;
    FitOut fit = irls_fit(prog, dec, false, false, opts.big_m_multiplier, opts);
    if (!fit.ok) break;
    Incumbent cand = make_incumbent(prog, fit.xi, fw, cache, opts.big_m_multiplier);
    consider(cand);
    if (!cand.valid) break;
    bool same = cand.res.active_rows == active;
    active = cand.res.active_rows;
    if (same || best.res.loss <= floor_loss) break;
  }

  // 3) free-fit seed when still poor: primal relaxation guides a fresh set
  Vec root_xi;
  double root_bound = 0.0;
  {
    std::vector<int8_t> dec(mi, -1);
    FitOut free_fit = irls_fit(prog, dec, false, true, opts.big_m_multiplier, opts);
    if (free_fit.ok) {
      root_bound = std::max(0.0, free_fit.f_smooth - free_fit.slack_est);
      root_xi = free_fit.xi;
      if (opts.seed_free_fit && best.res.loss > floor_loss) {
        std::vector<int> seed;
        for (int r = 0; r < mi; ++r)
          if (free_fit.slack_rows[r] < 1e-7 * (1.0 + prog.obs_scale)) seed.push_back(r);
        std::vector<int> cur = seed;
        for (int loop = 0; loop < opts.refine_loops; ++loop) {
          std::vector<int8_t> d2(mi, -1);
          for (int r : cur) d2[r] = 1;
          FitOut fit = irls_fit(prog, d2, false, false, opts.big_m_multiplier, opts);
          if (!fit.ok) break;
          Incumbent cand = make_incumbent(prog, fit.xi, fw, cache, opts.big_m_multiplier);
          consider(cand);
          if (!cand.valid) break;
          if (cand.res.active_rows == cur) break;
          cur = cand.res.active_rows;
          if (best.res.loss <= floor_loss) break;
        }
      }
    }
  }

  StepResult res = best.res;
  res.bound = std::min(root_bound, res.objective);
  res.certified = res.objective - res.bound <= opts.mip_gap * (1.0 + std::abs(res.objective));

  // 4) exact branch and bound on small programs
  if (!res.certified && mi <= opts.certify_max_binaries && opts.node_budget > 0) {
    struct Node {
      std::vector<int8_t> dec;
      double bound;
      Vec mu, slack;
      int id;
    };
    auto cmp = [](const Node& a, const Node& b) {
      return a.bound > b.bound || (a.bound == b.bound && a.id > b.id);
    };
    std::priority_queue<Node, std::vector<Node>, decltype(cmp)> open(cmp);
    int next_id = 0;
    int nodes = 0;
    double inc_obj = res.objective;

    auto eval_node = [&](std::vector<int8_t> dec) -> bool {
      FitOut fit = irls_fit(prog, dec, true, true, opts.big_m_multiplier, opts);
      ++nodes;
      if (!fit.ok) {
        if (!fit.infeasible) {
          // unresolved: keep conservative zero bound so the node stays open
          open.push({std::move(dec), 0.0, Vec(), Vec(), next_id++});
        }
        return false;
      }
      double bound = std::max(0.0, fit.f_smooth - fit.slack_est);
      Incumbent cand = make_incumbent(prog, fit.xi, fw, cache, opts.big_m_multiplier);
      if (cand.valid && (!best.valid || cand.res.objective < inc_obj)) {
        consider(cand);
        inc_obj = best.res.objective;
      }
      if (bound < inc_obj - opts.mip_gap * (1.0 + std::abs(inc_obj)))
        open.push({std::move(dec), bound, fit.mu_rows, fit.slack_rows, next_id++});
      return true;
    };

    eval_node(std::vector<int8_t>(mi, -1));
    double best_open_bound = res.bound;
    while (!open.empty() && nodes < opts.node_budget) {
      Node node = open.top();
      open.pop();
      double gap_abs = opts.mip_gap * (1.0 + std::abs(inc_obj));
      if (node.bound >= inc_obj - gap_abs) {
        best_open_bound = inc_obj;
        while (!open.empty()) open.pop();
        break;
      }
      // branch on the largest complementarity violation
      int pick = -1;
      double worst = 1e-9 * (1.0 + prog.obs_scale);
      if (node.mu.size() == mi && node.slack.size() == mi) {
        for (int r = 0; r < mi; ++r) {
          if (node.dec[r] != -1) continue;
          double v = std::max(0.0, node.mu[r]) * std::max(0.0, node.slack[r]);
          if (v > worst) {
            worst = v;
            pick = r;
          }
        }
      }
      if (pick < 0) {
        // relaxation already complementary: its incumbent was recorded
        best_open_bound = std::min(best_open_bound, node.bound);
        continue;
      }
      for (int8_t d : {static_cast<int8_t>(1), static_cast<int8_t>(0)}) {
        std::vector<int8_t> child = node.dec;
        child[pick] = d;
        eval_node(std::move(child));
      }
    }
    res = best.res;
    res.nodes = nodes;
    if (open.empty()) {
      res.bound = std::max(root_bound, inc_obj - opts.mip_gap * (1.0 + std::abs(inc_obj)));
      res.certified = true;
    } else {
      double b = inc_obj;
      while (!open.empty()) {
        b = std::min(b, open.top().bound);
        open.pop();
      }
      res.bound = std::max(root_bound, b);
      res.certified = res.objective - res.bound <= opts.mip_gap * (1.0 + std::abs(res.objective));
    }
  }

  if (cache) {
    cache->active = res.active_rows;
    cache->has_active = true;
  }
  return res;
}

}  // namespace

StepResult solve_inverse_step(const StepProgram& prog, const StepOptions& opts, StepCache* cache) {
  bool big_m_trouble = false;
  StepResult res = solve_attempt(prog, opts, cache, big_m_trouble);
  if (big_m_trouble) {
    log::warn("inverse step: big-M cap binding, retrying with M x10");
    StepOptions retry = opts;
    retry.big_m_multiplier = opts.big_m_multiplier * 10.0;
    bool still = false;
    res = solve_attempt(prog, retry, cache, still);
    if (still) throw Infeasible("inverse step: big-M too small even after x10 retry", "big_m");
  }
  if (opts.require_certified && !res.certified)
    throw MipTimeout("inverse step: node budget exhausted before the gap closed", res);
  return res;
}

}  // namespace vppfra
