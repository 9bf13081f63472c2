#pragma once

#include "vppfra/lp.hpp"

namespace vppfra {

// Convex quadratic program
//   min 0.5 v'Hv + g'v   s.t.  E v = e,  G v <= h
// solved by a Mehrotra predictor-corrector interior-point method on the
// reduced augmented system [H + G'WG, E'; E, -dI].
struct QpProblem {
  SpMat H;  // PSD
  Vec g;
  SpMat E;
  Vec e;
  SpMat G;
  Vec h;
  int n() const { return static_cast<int>(g.size()); }
};

struct QpOptions {
  int max_iters = 80;
  double tol = 1e-9;       // relative KKT tolerance
  double reg = 1e-9;       // static regularization
  double step_frac = 0.995;
};

struct QpResult {
  Vec v;
  Vec y;      // equality multipliers
  Vec mu;     // inequality multipliers >= 0
  Vec slack;  // h - Gv
  bool optimal = false;
  bool likely_infeasible = false;
  int iters = 0;
  double obj = 0.0;
  double primal_inf = 0.0;
  double dual_inf = 0.0;
  double gap = 0.0;
};

QpResult solve_qp(const QpProblem& qp, const QpOptions& opts = {}, const Vec* warm_v = nullptr);

}  // namespace vppfra
