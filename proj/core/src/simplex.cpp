#include "vppfra/simplex.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>

#include "vppfra/log.hpp"

namespace vppfra {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

struct SimplexSolver::Impl {
  const LpProblem* lp;
  SimplexOptions opts;

  int n_struct = 0, m_eq = 0, m_ineq = 0, m = 0, n_total = 0;
  // column blocks: [0,n) structural, [n, n+m_ineq) slacks, then m artificials
  int slack0 = 0, art0 = 0;

  SpMat W;  // m x n_total, column-major
  Vec cost;             // phase-2 objective per column
  Vec lo, up;           // column bounds (phase-2 for slacks/artificials)
  Vec rhs;              // stacked [eq; ineq]
  std::vector<char> forced;  // per ineq row

  // solver state
  std::vector<ColStatus> status;
  std::vector<int> basic_cols;     // per row
  std::vector<int> pos_in_basis;   // per column, -1 if nonbasic
  Vec x;                           // per column value
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  bool lu_ok = false;
  std::vector<std::pair<int, Vec>> etas;  // (basis position, direction)
  std::vector<int> last_active;

  // phase-1 bookkeeping
  Vec p1_cost;
  Vec p1_lo, p1_up;
  bool in_phase1 = false;

  Impl(const LpProblem& problem, SimplexOptions o) : lp(&problem), opts(o) {
    n_struct = lp->n_cols();
    m_eq = lp->n_eq();
    m_ineq = lp->n_ineq();
    m = m_eq + m_ineq;
    slack0 = n_struct;
    art0 = n_struct + m_ineq;
    n_total = n_struct + m_ineq + m;
    forced.assign(m_ineq, 0);

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(lp->eq_matrix.nonZeros() + lp->ineq_matrix.nonZeros() + m_ineq + m);
    for (int k = 0; k < lp->eq_matrix.outerSize(); ++k)
      for (SpMat::InnerIterator it(lp->eq_matrix, k); it; ++it)
        trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (int k = 0; k < lp->ineq_matrix.outerSize(); ++k)
      for (SpMat::InnerIterator it(lp->ineq_matrix, k); it; ++it)
        trip.emplace_back(m_eq + static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (int r = 0; r < m_ineq; ++r) trip.emplace_back(m_eq + r, slack0 + r, 1.0);
    for (int r = 0; r < m; ++r) trip.emplace_back(r, art0 + r, 1.0);
    W.resize(m, n_total);
    W.setFromTriplets(trip.begin(), trip.end());
    W.makeCompressed();

    cost = Vec::Zero(n_total);
    cost.head(n_struct) = lp->c;
    lo = Vec::Zero(n_total);
    up = Vec::Zero(n_total);
    for (int j = 0; j < n_struct; ++j) {
      lo[j] = -kInf;
      up[j] = kInf;
    }
    for (int r = 0; r < m_ineq; ++r) {
      lo[slack0 + r] = 0.0;
      up[slack0 + r] = kInf;
    }
    // artificials are fixed at zero outside phase 1
    rhs = Vec::Zero(m);
    rhs.head(m_eq) = lp->eq_rhs();
    rhs.tail(m_ineq) = lp->ineq_rhs();
  }

  double col_dot(int j, const Vec& y) const {
    double s = 0.0;
    for (SpMat::InnerIterator it(W, j); it; ++it) s += it.value() * y[it.row()];
    return s;
  }

  void scatter_col(int j, Vec& dense) const {
    dense.setZero();
    for (SpMat::InnerIterator it(W, j); it; ++it) dense[it.row()] = it.value();
  }

  bool refactorize() {
    SpMat B(m, m);
    std::vector<Eigen::Triplet<double>> trip;
    for (int r = 0; r < m; ++r) {
      int j = basic_cols[r];
      for (SpMat::InnerIterator it(W, j); it; ++it)
        trip.emplace_back(static_cast<int>(it.row()), r, it.value());
    }
    B.setFromTriplets(trip.begin(), trip.end());
    B.makeCompressed();
    lu.compute(B);
    lu_ok = (lu.info() == Eigen::Success);
    etas.clear();
    return lu_ok;
  }

  Vec ftran(const Vec& a) const {
    Vec v = lu.solve(a);
    for (const auto& [r, w] : etas) {
      double piv = v[r] / w[r];
      if (piv != 0.0) {
        v -= piv * w;
      }
      v[r] = piv;
    }
    return v;
  }

  Vec btran(const Vec& cvec) {
    Vec v = cvec;
    for (auto it = etas.rbegin(); it != etas.rend(); ++it) {
      const auto& [r, w] = *it;
      double dot = w.dot(v);
      v[r] = (v[r] - (dot - w[r] * v[r])) / w[r];
    }
    return lu.adjoint().solve(v);
  }

  Vec active_lo() const { return in_phase1 ? p1_lo : lo; }
  Vec active_up() const { return in_phase1 ? p1_up : up; }

  void compute_basic_values(const Vec& cur_lo, const Vec& cur_up) {
    Vec r = rhs;
    for (int j = 0; j < n_total; ++j) {
      if (pos_in_basis[j] >= 0) continue;
      double v;
      switch (status[j]) {
        case ColStatus::AtLower: v = cur_lo[j]; break;
        case ColStatus::AtUpper: v = cur_up[j]; break;
        default: v = 0.0; break;
      }
      x[j] = v;
      if (v != 0.0)
        for (SpMat::InnerIterator it(W, j); it; ++it) r[it.row()] -= it.value() * v;
    }
    Vec xb = ftran(r);
    for (int i = 0; i < m; ++i) x[basic_cols[i]] = xb[i];
  }

  struct SingularBasisError {};

  // Runs primal simplex to optimality on the current (cost, lo, up) set.
  // Throws Unbounded in phase 2 and SingularBasisError on numerical failure.
  void run(const Vec& ccur, const Vec& cur_lo, const Vec& cur_up, int& iters, int phase) {
    const double cscale = 1.0 + ccur.cwiseAbs().maxCoeff();
    const double rscale = 1.0 + (rhs.size() ? rhs.cwiseAbs().maxCoeff() : 0.0);
    const double dtol = opts.dual_tol * cscale;
    const double ftol = opts.feas_tol * rscale;

    Vec cb(m);
    Vec acol(m);
    int since_refactor = 0;
    int degenerate_streak = 0;
    bool bland = false;

    for (;; ++iters) {
      if (iters > opts.max_iters) throw Error("simplex: iteration limit exceeded");
      for (int i = 0; i < m; ++i) cb[i] = ccur[basic_cols[i]];
      Vec y = btran(cb);

      // pricing
      int enter = -1;
      double best = 0.0;
      int dir = 0;
      for (int j = 0; j < n_total; ++j) {
        if (pos_in_basis[j] >= 0) continue;
        if (cur_lo[j] == cur_up[j] && status[j] != ColStatus::FreeZero) continue;  // fixed
        double d = ccur[j] - col_dot(j, y);
        bool can_up = (status[j] == ColStatus::AtLower || status[j] == ColStatus::FreeZero);
        bool can_dn = (status[j] == ColStatus::AtUpper || status[j] == ColStatus::FreeZero);
        if (can_up && d < -dtol) {
          double score = -d;
          if (bland ? (enter == -1) : (score > best)) {
            best = score;
            enter = j;
            dir = +1;
            if (bland) break;
          }
        } else if (can_dn && d > dtol) {
          double score = d;
          if (bland ? (enter == -1) : (score > best)) {
            best = score;
            enter = j;
            dir = -1;
            if (bland) break;
          }
        }
      }
      if (enter < 0) return;

      scatter_col(enter, acol);
      Vec w = ftran(acol);

      // ratio test: entering moves t >= 0 towards dir, basics change by -dir*w
      double tmax = kInf;
      int leave_pos = -1;
      double leave_pivot = 0.0;
      int leave_to_upper = 0;
      for (int i = 0; i < m; ++i) {
        double delta = -dir * w[i];
        if (std::abs(delta) <= opts.pivot_tol) continue;
        int bj = basic_cols[i];
        double t;
        int to_upper;
        if (delta > 0) {
          if (cur_up[bj] == kInf) continue;
          t = (cur_up[bj] - x[bj]) / delta;
          to_upper = 1;
        } else {
          if (cur_lo[bj] == -kInf) continue;
          t = (x[bj] - cur_lo[bj]) / (-delta);
          to_upper = 0;
        }
        if (t < -ftol) t = 0.0;
        if (t < tmax - 1e-12 ||
            (t < tmax + 1e-12 &&
             (bland ? bj < (leave_pos >= 0 ? basic_cols[leave_pos] : n_total + 1)
                    : std::abs(w[i]) > std::abs(leave_pivot)))) {
          tmax = std::max(0.0, t);
          leave_pos = i;
          leave_pivot = w[i];
          leave_to_upper = to_upper;
        }
      }
      double bound_span = cur_up[enter] - cur_lo[enter];
      bool bound_flip = false;
      if (status[enter] != ColStatus::FreeZero && bound_span < tmax) {
        tmax = bound_span;
        bound_flip = true;
      }
      if (tmax == kInf) {
        if (phase == 1) throw Error("simplex: phase-1 subproblem unbounded (internal)");
        std::string hint = enter < n_struct
                               ? lp->col_names[enter]
                               : (enter < art0 ? std::string(to_string(lp->ineq_families[enter - slack0])) +
                                                     " slack"
                                               : "artificial");
        throw Unbounded("objective unbounded along column " + hint, hint);
      }

      degenerate_streak = (tmax <= ftol) ? degenerate_streak + 1 : 0;
      if (degenerate_streak > 400 && !bland) {
        bland = true;
        log::debug("simplex: engaging Bland's rule after degenerate streak");
      } else if (degenerate_streak == 0) {
        bland = false;
      }

      // apply step
      if (tmax > 0.0) {
        for (int i = 0; i < m; ++i)
          if (w[i] != 0.0) x[basic_cols[i]] -= dir * tmax * w[i];
      }
      if (bound_flip) {
        x[enter] = (dir > 0) ? cur_up[enter] : cur_lo[enter];
        status[enter] = (dir > 0) ? ColStatus::AtUpper : ColStatus::AtLower;
        continue;
      }
      // basis change
      int leave_col = basic_cols[leave_pos];
      double enter_base = (status[enter] == ColStatus::AtLower)   ? cur_lo[enter]
                          : (status[enter] == ColStatus::AtUpper) ? cur_up[enter]
                                                                  : 0.0;
      x[enter] = enter_base + dir * tmax;
      x[leave_col] = leave_to_upper ? cur_up[leave_col] : cur_lo[leave_col];
      status[leave_col] = leave_to_upper ? ColStatus::AtUpper : ColStatus::AtLower;
      if (cur_lo[leave_col] == -kInf && cur_up[leave_col] == kInf) status[leave_col] = ColStatus::FreeZero;
      status[enter] = ColStatus::Basic;
      basic_cols[leave_pos] = enter;
      pos_in_basis[enter] = leave_pos;
      pos_in_basis[leave_col] = -1;

      etas.emplace_back(leave_pos, w);
      if (++since_refactor >= opts.refactor_every || static_cast<int>(etas.size()) >= opts.refactor_every) {
        if (!refactorize()) throw SingularBasisError{};
        compute_basic_values(cur_lo, cur_up);
        since_refactor = 0;
      }
    }
  }

  // Crash basis: slack basic wherever that is already feasible, artificial
  // otherwise. Sets phase-1 bounds/costs so that minimizing p1_cost'x drives
  // all infeasibility to zero.
  void cold_basis() {
    status.assign(n_total, ColStatus::AtLower);
    for (int j = 0; j < n_struct; ++j) status[j] = ColStatus::FreeZero;
    basic_cols.assign(m, -1);
    pos_in_basis.assign(n_total, -1);
    x = Vec::Zero(n_total);

    p1_lo = lo;
    p1_up = up;
    p1_cost = Vec::Zero(n_total);
    auto make_basic = [&](int col, int row) {
      basic_cols[row] = col;
      pos_in_basis[col] = row;
      status[col] = ColStatus::Basic;
    };
    for (int r = 0; r < m; ++r) {
      int a = art0 + r;
      bool ineq = r >= m_eq;
      int s = ineq ? slack0 + (r - m_eq) : -1;
      bool slack_ok = ineq && rhs[r] >= 0.0 && !(s >= 0 && up[s] == 0.0);
      if (slack_ok) {
        make_basic(s, r);
        x[s] = rhs[r];
        // artificial unused: keep fixed at zero
        p1_lo[a] = p1_up[a] = 0.0;
      } else {
        make_basic(a, r);
        x[a] = rhs[r];
        if (rhs[r] >= 0.0) {
          p1_lo[a] = 0.0;
          p1_up[a] = kInf;
          p1_cost[a] = 1.0;
        } else {
          p1_lo[a] = -kInf;
          p1_up[a] = 0.0;
          p1_cost[a] = -1.0;
        }
      }
    }
  }

  bool basis_feasible(const Vec& cur_lo, const Vec& cur_up) {
    const double ftol = opts.feas_tol * (1.0 + rhs.cwiseAbs().maxCoeff());
    for (int i = 0; i < m; ++i) {
      int j = basic_cols[i];
      if (x[j] < cur_lo[j] - ftol || x[j] > cur_up[j] + ftol) return false;
    }
    return true;
  }

  PrimalDualSolution solve(const SimplexBasis* warm, SimplexBasis* out_basis, SimplexStats* stats) {
    try {
      return solve_attempt(warm, out_basis, stats);
    } catch (const SingularBasisError&) {
      log::warn("simplex: singular basis encountered, cold restarting once");
      try {
        return solve_attempt(nullptr, out_basis, stats);
      } catch (const SingularBasisError&) {
        throw Error("simplex: repeated singular basis, giving up");
      }
    }
  }

  PrimalDualSolution solve_attempt(const SimplexBasis* warm, SimplexBasis* out_basis,
                                   SimplexStats* stats) {
    bool warm_ok = false;
    if (warm && static_cast<int>(warm->status.size()) == n_total) {
      status = warm->status;
      basic_cols.clear();
      pos_in_basis.assign(n_total, -1);
      for (int j = 0; j < n_total; ++j)
        if (status[j] == ColStatus::Basic) {
          pos_in_basis[j] = static_cast<int>(basic_cols.size());
          basic_cols.push_back(j);
        }
      if (static_cast<int>(basic_cols.size()) == m) {
        x = Vec::Zero(n_total);
        // fixed columns must sit on their (possibly new) bounds
        for (int j = 0; j < n_total; ++j) {
          if (pos_in_basis[j] >= 0) continue;
          if (lo[j] == up[j] && j >= art0) status[j] = ColStatus::AtLower;
          if (j >= slack0 && j < art0 && forced[j - slack0]) status[j] = ColStatus::AtLower;
          if (status[j] == ColStatus::AtUpper && up[j] == kInf) status[j] = ColStatus::AtLower;
        }
        if (refactorize()) {
          compute_basic_values(lo, up);
          warm_ok = basis_feasible(lo, up);
        }
      }
    }
    if (stats) stats->warm_started = warm_ok;

    in_phase1 = false;
    if (!warm_ok) {
      cold_basis();
      if (!refactorize()) throw Error("simplex: initial basis singular");
      compute_basic_values(p1_lo, p1_up);
      in_phase1 = true;
      int it1 = 0;
      run(p1_cost, p1_lo, p1_up, it1, 1);
      if (stats) stats->phase1_iters = it1;
      in_phase1 = false;

      double infeas = 0.0;
      int worst_row = -1;
      for (int r = 0; r < m; ++r) {
        double v = std::abs(x[art0 + r]);
        if (v > infeas) {
          infeas = v;
          worst_row = r;
        }
      }
      const double ftol = opts.feas_tol * (1.0 + rhs.cwiseAbs().maxCoeff());
      if (infeas > ftol * 10.0) {
        std::string fam =
            worst_row < m_eq ? to_string(lp->eq_families[worst_row]) : to_string(lp->ineq_families[worst_row - m_eq]);
        std::string row_name =
            worst_row < m_eq ? lp->eq_names[worst_row] : lp->ineq_names[worst_row - m_eq];
        throw Infeasible("LP infeasible; largest residual on " + row_name + " (" + fam + ")", fam);
      }
      // pin artificials to zero for phase 2
      for (int r = 0; r < m; ++r) {
        int j = art0 + r;
        if (pos_in_basis[j] < 0) {
          status[j] = ColStatus::AtLower;
          x[j] = 0.0;
        }
      }
    }

    if (!refactorize()) throw SingularBasisError{};
    compute_basic_values(lo, up);
    int it2 = 0;
    run(cost, lo, up, it2, 2);
    if (stats) stats->phase2_iters = it2;

    // final cleanup: refactorize and recompute for tight residuals
    if (!refactorize()) throw SingularBasisError{};
    compute_basic_values(lo, up);

    PrimalDualSolution sol;
    sol.primal = x.head(n_struct);
    Vec cb(m);
    for (int i = 0; i < m; ++i) cb[i] = cost[basic_cols[i]];
    Vec y = btran(cb);
    sol.eq_duals = -y.head(m_eq);
    sol.ineq_duals = -y.tail(m_ineq);
    // clip tiny negative multipliers arising from roundoff
    for (int r = 0; r < m_ineq; ++r)
      if (sol.ineq_duals[r] < 0.0 && sol.ineq_duals[r] > -1e-11) sol.ineq_duals[r] = 0.0;
    sol.objective = cost.head(n_struct).dot(sol.primal);

    last_active.clear();
    for (int r = 0; r < m_ineq; ++r)
      if (pos_in_basis[slack0 + r] < 0) last_active.push_back(r);

    if (out_basis) out_basis->status = status;
    return sol;
  }
};

SimplexSolver::SimplexSolver(const LpProblem& lp, SimplexOptions opts)
    : impl_(std::make_unique<Impl>(lp, opts)) {}
SimplexSolver::~SimplexSolver() = default;
SimplexSolver::SimplexSolver(SimplexSolver&&) noexcept = default;
SimplexSolver& SimplexSolver::operator=(SimplexSolver&&) noexcept = default;

void SimplexSolver::set_objective(const Vec& c_structural) {
  impl_->cost.head(impl_->n_struct) = c_structural;
}

void SimplexSolver::set_rhs(const Vec& eq_rhs, const Vec& ineq_rhs) {
  impl_->rhs.head(impl_->m_eq) = eq_rhs;
  impl_->rhs.tail(impl_->m_ineq) = ineq_rhs;
}

void SimplexSolver::set_forced_active(const std::vector<int>& ineq_rows) {
  std::fill(impl_->forced.begin(), impl_->forced.end(), 0);
  for (int r = 0; r < impl_->m_ineq; ++r) impl_->up[impl_->slack0 + r] = kInf;
  for (int r : ineq_rows) {
    impl_->forced[r] = 1;
    impl_->up[impl_->slack0 + r] = 0.0;
  }
}

PrimalDualSolution SimplexSolver::solve(const SimplexBasis* warm, SimplexBasis* out_basis,
                                        SimplexStats* stats) {
  return impl_->solve(warm, out_basis, stats);
}

std::vector<int> SimplexSolver::last_active_ineq() const { return impl_->last_active; }

PrimalDualSolution solve_lp(const LpProblem& lp) {
  SimplexSolver solver(lp);
  return solver.solve();
}

}  // namespace vppfra
