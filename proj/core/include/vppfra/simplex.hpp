#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "vppfra/lp.hpp"

namespace vppfra {

enum class ColStatus : unsigned char { Basic, AtLower, AtUpper, FreeZero };

// Snapshot of a simplex basis, reusable across solves of the same problem
// structure (changed costs and/or rhs).
struct SimplexBasis {
  std::vector<ColStatus> status;  // one per internal column
};

struct SimplexStats {
  int phase1_iters = 0;
  int phase2_iters = 0;
  int refactorizations = 0;
  bool warm_started = false;
};

struct SimplexOptions {
  int max_iters = 500000;
  double pivot_tol = 1e-10;
  double feas_tol = 1e-9;   // scaled by (1 + |rhs|_inf)
  double dual_tol = 1e-9;   // scaled by (1 + |c|_inf)
  int refactor_every = 96;
};

// Two-phase primal simplex on the row form
//   min c'x  s.t.  A x = b,  G x + s = h,  s >= 0
// with structural variables free and per-row artificials for phase 1.
// Returns vertex-exact primal values and row duals (lambda, mu >= 0).
//
// The solver object captures the constraint matrices of one LpProblem;
// objective and rhs can then be swapped cheaply, which makes repeated solves
// (support bounds, price sweeps, inverse-step subproblems) warm-startable.
class SimplexSolver {
 public:
  explicit SimplexSolver(const LpProblem& lp, SimplexOptions opts = {});
  ~SimplexSolver();
  SimplexSolver(SimplexSolver&&) noexcept;
  SimplexSolver& operator=(SimplexSolver&&) noexcept;

  // Overrides for subsequent solve() calls; sizes must match the LpProblem.
  void set_objective(const Vec& c_structural);
  void set_rhs(const Vec& eq_rhs, const Vec& ineq_rhs);
  // Forces selected inequality rows to bind (slack fixed to zero); pass row
  // indices into the LpProblem's inequality block. Used by the inverse step.
  void set_forced_active(const std::vector<int>& ineq_rows);

  // Throws Infeasible / Unbounded with a constraint-family hint.
  PrimalDualSolution solve(const SimplexBasis* warm = nullptr, SimplexBasis* out_basis = nullptr,
                           SimplexStats* stats = nullptr);

  // Binding inequality rows (slack nonbasic at zero) of the last solve.
  std::vector<int> last_active_ineq() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// One-shot solve of the LP at its stored parameter values.
PrimalDualSolution solve_lp(const LpProblem& lp);

}  // namespace vppfra
