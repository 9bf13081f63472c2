#pragma once

#include <string>
#include <vector>

#include "vppfra/lp_builder.hpp"
#include "vppfra/simplex.hpp"

namespace vppfra {

// Named time-series view over an optimal dispatch of one mine.
struct DispatchSolution {
  std::string mine_id;
  MineLayout layout;
  std::vector<std::string> series_names;  // base names, one per per-interval column
  PrimalDualSolution sol;
  double objective = 0.0;

  std::vector<double> series(const std::string& base_name) const;
};

// Observed aggregates of one mine: total conveyor draw and DSO exchange.
struct AggregateObservables {
  std::vector<double> bc_total;  // kW per interval
  std::vector<double> grid;      // kW per interval
};

DispatchSolution dispatch(const MineScenario& mine, const ParameterVector* params = nullptr);

AggregateObservables aggregate_observables(const DispatchSolution& sol);

// CSV: one row per interval, one column per named variable.
std::string dispatch_to_csv(const DispatchSolution& sol);
void write_dispatch_csv(const DispatchSolution& sol, const std::string& path);

}  // namespace vppfra
