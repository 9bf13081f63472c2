#pragma once

#include <vector>

#include "vppfra/kkt_system.hpp"
#include "vppfra/qp.hpp"
#include "vppfra/simplex.hpp"

namespace vppfra {

// One historical record restricted to one mine: the price signal it was
// dispatched under and the observed aggregates.
struct StepObservation {
  std::vector<double> price;
  std::vector<double> bc_total;
  std::vector<double> grid;
};

// The per-record inverse program (14): decision variables (xi, x, lambda, mu,
// z), objective ||bc(x)-obs||_2 + ||grid(x)-obs||_2 + (rho/2)||xi-xi_prev||^2
// (prox measured in box-normalized coordinates), constraints = KKT conditions
// of the record's LP with complementarity linearized by big-M indicators.
struct StepProgram {
  const KktSystem* kkt = nullptr;
  StepObservation obs;
  Vec xi_prev;
  double rho = 0.0;
  Vec prox_scale;  // 1 / box half-width per entry

  Vec c_rec;        // LP objective under the record's prices
  SpMat p_bc_rows;  // T x n_x, sums conveyor power columns per interval
  SpMat p_g_rows;   // T x n_x
  SpMat hook_eq;    // n_eq x n_xi
  SpMat hook_ineq;  // n_ineq x n_xi
  double obs_scale = 1.0;

  int horizon() const { return static_cast<int>(obs.bc_total.size()); }
};

StepProgram build_inverse_step(const KktSystem& kkt, const StepObservation& obs,
                               const Vec& xi_prev, double rho);

struct StepOptions {
  double mip_gap = 1e-6;
  int node_budget = 400;
  // Exact branch-and-bound runs only when the binary count is at most this;
  // larger programs return the refined incumbent with an honest root gap.
  int certify_max_binaries = 160;
  bool require_certified = false;
  int refine_loops = 5;
  int irls_iters = 25;
  double irls_tol = 1e-10;
  double big_m_multiplier = 1.0;  // soundness checks re-solve with 2.0
  bool seed_free_fit = true;
};

struct StepResult {
  Vec xi;
  double loss = 0.0;       // pure assessment error, prox excluded
  double objective = 0.0;  // loss + prox at the returned point
  double bound = 0.0;      // proven lower bound on the objective
  bool certified = false;
  int nodes = 0;
  Vec x;                          // dispatch replay behind the estimate
  std::vector<int> active_rows;   // binding inequality rows of the replay
};

// Node/time budget exhausted before the gap closed; carries the incumbent.
struct MipTimeout : Error {
  StepResult incumbent;
  MipTimeout(const std::string& msg, StepResult inc) : Error(msg), incumbent(std::move(inc)) {}
};

// Reusable per-record state across LFRA outer iterations.
struct StepCache {
  SimplexBasis basis;
  bool has_basis = false;
  std::vector<int> active;
  bool has_active = false;
};

StepResult solve_inverse_step(const StepProgram& prog, const StepOptions& opts = {},
                              StepCache* cache = nullptr);

}  // namespace vppfra
