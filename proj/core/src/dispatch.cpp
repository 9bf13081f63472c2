#include "vppfra/dispatch.hpp"

#include <fstream>
#include <sstream>

namespace vppfra {

std::vector<double> DispatchSolution::series(const std::string& base_name) const {
  for (std::size_t k = 0; k < series_names.size(); ++k) {
    if (series_names[k] != base_name) continue;
    std::vector<double> out(layout.horizon);
    for (int t = 0; t < layout.horizon; ++t)
      out[t] = sol.primal[layout.col(static_cast<int>(k), t)];
    return out;
  }
  throw Error("unknown dispatch series: " + base_name);
}

DispatchSolution dispatch(const MineScenario& mine, const ParameterVector* params) {
  MineLp ml = build_mine_lp(mine, params);
  DispatchSolution out;
  out.mine_id = ml.mine_id;
  out.layout = ml.layout;
  out.series_names.resize(ml.layout.stride);
  for (int k = 0; k < ml.layout.stride; ++k) {
    const std::string& flat = ml.lp.col_names[k];  // "<base>@0"
    out.series_names[k] = flat.substr(0, flat.rfind('@'));
  }
  out.sol = solve_lp(ml.lp);
  out.objective = out.sol.objective;
  return out;
}

AggregateObservables aggregate_observables(const DispatchSolution& sol) {
  AggregateObservables agg;
  const auto& lay = sol.layout;
  agg.bc_total.assign(lay.horizon, 0.0);
  agg.grid.assign(lay.horizon, 0.0);
  for (int t = 0; t < lay.horizon; ++t) {
    double s = 0.0;
    for (int off : lay.p_bc) s += sol.sol.primal[lay.col(off, t)];
    agg.bc_total[t] = s;
    agg.grid[t] = sol.sol.primal[lay.col(lay.p_g, t)];
  }
  return agg;
}

std::string dispatch_to_csv(const DispatchSolution& sol) {
  std::ostringstream os;
  os.precision(17);
  os << "t";
  for (const auto& name : sol.series_names) os << "," << name;
  os << "\n";
  for (int t = 0; t < sol.layout.horizon; ++t) {
    os << t;
    for (int k = 0; k < sol.layout.stride; ++k) os << "," << sol.sol.primal[sol.layout.col(k, t)];
    os << "\n";
  }
  return os.str();
}

void write_dispatch_csv(const DispatchSolution& sol, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write dispatch CSV: " + path);
  out << dispatch_to_csv(sol);
}

}  // namespace vppfra
