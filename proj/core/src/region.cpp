#include "vppfra/region.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "vppfra/lp_builder.hpp"
#include "vppfra/parallel.hpp"
#include "vppfra/rng.hpp"
#include "vppfra/simplex.hpp"

namespace vppfra {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Per-mine solver bundle reused across many objectives (the feasible set is
// fixed, only the cost vector changes, so warm starts carry).
struct MineRegionSolver {
  MineLp ml;
  SimplexSolver solver;
  SimplexBasis basis;
  bool has_basis = false;

  MineRegionSolver(const MineScenario& mine, const ParameterVector& params)
      : ml(build_mine_lp(mine, &params)), solver(ml.lp) {}

  double optimize(const Vec& c) {
    solver.set_objective(c);
    SimplexBasis out;
    PrimalDualSolution sol = solver.solve(has_basis ? &basis : nullptr, &out);
    basis = out;
    has_basis = true;
    return sol.objective;
  }

  // support of target at interval t; Max returns the max value
  double support(RegionTarget target, int t, BoundSense sense) {
    Vec c = Vec::Zero(ml.lp.n_cols());
    double sgn = (sense == BoundSense::Max) ? -1.0 : 1.0;  // solver minimizes
    if (target == RegionTarget::BcTotal) {
      for (int off : ml.layout.p_bc) c[ml.layout.col(off, t)] = sgn;
    } else {
      c[ml.layout.col(ml.layout.p_g, t)] = sgn;
    }
    double v = optimize(c);
    return (sense == BoundSense::Max) ? -v : v;
  }
};

}  // namespace

double support_bound(const VppScenario& vpp, const ParameterVector& params, RegionTarget target,
                     int t, BoundSense sense) {
  if (t < 0 || t >= vpp.time().horizon_length) throw Error("support_bound: interval out of range");
  double total = 0.0;
  for (const auto& mine : vpp.mines) {
    MineRegionSolver mrs(mine, params);
    total += mrs.support(target, t, sense);
  }
  return total;
}

RegionBounds assess_region(const VppScenario& vpp, const ParameterVector& params,
                           const std::string& provenance, int jobs) {
  const int T = vpp.time().horizon_length;
  const int M = static_cast<int>(vpp.mines.size());
  RegionBounds rb;
  rb.provenance = provenance;
  rb.bc_max.assign(T, 0.0);
  rb.bc_min.assign(T, 0.0);
  rb.grid_max.assign(T, 0.0);
  rb.grid_min.assign(T, 0.0);

  // per-mine partial bounds, mines in parallel, intervals chained per mine
  std::vector<std::vector<double>> parts(M, std::vector<double>(4 * T, 0.0));
  parallel_for(static_cast<std::size_t>(M), jobs, [&](std::size_t i) {
    MineRegionSolver mrs(vpp.mines[i], params);
    auto& p = parts[i];
    for (int t = 0; t < T; ++t) {
      p[0 * T + t] = mrs.support(RegionTarget::BcTotal, t, BoundSense::Max);
      p[1 * T + t] = mrs.support(RegionTarget::BcTotal, t, BoundSense::Min);
      p[2 * T + t] = mrs.support(RegionTarget::Grid, t, BoundSense::Max);
      p[3 * T + t] = mrs.support(RegionTarget::Grid, t, BoundSense::Min);
    }
  });
  for (int i = 0; i < M; ++i)
    for (int t = 0; t < T; ++t) {
      rb.bc_max[t] += parts[i][0 * T + t];
      rb.bc_min[t] += parts[i][1 * T + t];
      rb.grid_max[t] += parts[i][2 * T + t];
      rb.grid_min[t] += parts[i][3 * T + t];
    }
  rb.peak_valley = *std::max_element(rb.bc_max.begin(), rb.bc_max.end()) -
                   *std::min_element(rb.bc_min.begin(), rb.bc_min.end());
  return rb;
}

DirectionSupport sampled_supports(const VppScenario& vpp, const ParameterVector& params,
                                  int directions, std::uint64_t seed, int jobs) {
  const int T = vpp.time().horizon_length;
  DirectionSupport out;
  if (directions <= 0) return out;
  Rng rng(seed, "directions");
  for (int d = 0; d < directions; ++d) {
    std::vector<double> dir(2 * T);
    double norm = 0.0;
    for (auto& v : dir) {
      v = rng.normal();
      norm += v * v;
    }
    norm = std::sqrt(std::max(norm, 1e-300));
    for (auto& v : dir) v /= norm;
    out.direction.push_back(dir);
  }
  out.value.assign(directions, 0.0);

  const int M = static_cast<int>(vpp.mines.size());
  std::vector<std::vector<double>> parts(M, std::vector<double>(directions, 0.0));
  parallel_for(static_cast<std::size_t>(M), jobs, [&](std::size_t i) {
    MineRegionSolver mrs(vpp.mines[i], params);
    for (int d = 0; d < directions; ++d) {
      Vec c = Vec::Zero(mrs.ml.lp.n_cols());
      for (int t = 0; t < T; ++t) {
        for (int off : mrs.ml.layout.p_bc)
          c[mrs.ml.layout.col(off, t)] = -out.direction[d][t];
        c[mrs.ml.layout.col(mrs.ml.layout.p_g, t)] = -out.direction[d][T + t];
      }
      parts[i][d] = -mrs.optimize(c);
    }
  });
  for (int i = 0; i < M; ++i)
    for (int d = 0; d < directions; ++d) out.value[d] += parts[i][d];
  return out;
}

SeriesMetric metric_from_rel_errors(const std::vector<double>& rel_pct) {
  SeriesMetric m;
  if (rel_pct.empty()) {
    m.nan_flagged = true;
    m.rmse_pct = kNan;
    m.mae_pct = kNan;
    return m;
  }
  double ss = 0.0, sa = 0.0;
  for (double e : rel_pct) {
    ss += e * e;
    sa += std::abs(e);
  }
  m.rmse_pct = std::sqrt(ss / static_cast<double>(rel_pct.size()));
  m.mae_pct = sa / static_cast<double>(rel_pct.size());
  return m;
}

namespace {

SeriesMetric series_metric(const std::vector<double>& est, const std::vector<double>& truth) {
  std::vector<double> rel;
  for (std::size_t t = 0; t < truth.size(); ++t) {
    if (truth[t] == 0.0) continue;  // percentage undefined, interval excluded
    rel.push_back(100.0 * (est[t] - truth[t]) / truth[t]);
  }
  return metric_from_rel_errors(rel);
}

}  // namespace

FraMetrics compare_regions(const RegionBounds& est, const RegionBounds& truth) {
  if (est.horizon() != truth.horizon())
    throw HorizonMismatch("compare_regions: region horizons differ");
  FraMetrics m;
  m.bc_max = series_metric(est.bc_max, truth.bc_max);
  m.bc_min = series_metric(est.bc_min, truth.bc_min);
  m.grid_max = series_metric(est.grid_max, truth.grid_max);
  m.grid_min = series_metric(est.grid_min, truth.grid_min);
  m.theta2.nan_flagged = true;  // not derivable from region bounds
  m.theta2.rmse_pct = kNan;
  m.theta2.mae_pct = kNan;
  return m;
}

std::vector<double> theta2_errors(const ParameterVector& est, const ParameterVector& truth) {
  std::vector<double> out;
  for (const auto& te : truth.entries) {
    if (te.name.find(".theta2.") == std::string::npos) continue;
    const ParamInfo* ee = est.find(te.name);
    if (!ee) throw Error("theta2_errors: estimate lacks entry " + te.name);
    if (te.value == 0.0) throw ZeroTruth("theta2_errors: true theta2 is zero for " + te.name);
    out.push_back(100.0 * std::abs(ee->value - te.value) / std::abs(te.value));
  }
  if (out.empty()) throw Error("theta2_errors: no theta2 entries found");
  return out;
}

std::string region_to_csv(const RegionBounds& rb) {
  std::ostringstream os;
  os.precision(17);
  os << "t,bc_max,bc_min,grid_max,grid_min\n";
  for (int t = 0; t < rb.horizon(); ++t)
    os << t << "," << rb.bc_max[t] << "," << rb.bc_min[t] << "," << rb.grid_max[t] << ","
       << rb.grid_min[t] << "\n";
  return os.str();
}

RegionBounds region_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,bc_max,bc_min,grid_max,grid_min", 0) != 0)
    throw ParseError("region CSV header mismatch");
  RegionBounds rb;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string f;
    try {
      std::getline(ls, f, ',');
      std::getline(ls, f, ',');
      rb.bc_max.push_back(std::stod(f));
      std::getline(ls, f, ',');
      rb.bc_min.push_back(std::stod(f));
      std::getline(ls, f, ',');
      rb.grid_max.push_back(std::stod(f));
      std::getline(ls, f, ',');
      rb.grid_min.push_back(std::stod(f));
    } catch (const std::exception&) {
      throw ParseError("region CSV: malformed line '" + line + "'");
    }
  }
  if (rb.bc_max.empty()) throw ParseError("region CSV has no rows");
  rb.peak_valley = *std::max_element(rb.bc_max.begin(), rb.bc_max.end()) -
                   *std::min_element(rb.bc_min.begin(), rb.bc_min.end());
  return rb;
}

void save_region(const RegionBounds& rb, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write region CSV: " + path);
  out << region_to_csv(rb);
  nlohmann::ordered_json meta;
  meta["provenance"] = rb.provenance;
  meta["peak_valley"] = rb.peak_valley;
  std::ofstream mo(path + ".meta.json");
  if (mo) mo << meta.dump(2) << "\n";
}

RegionBounds load_region(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open region CSV: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  RegionBounds rb = region_from_csv(ss.str());
  std::ifstream mi(path + ".meta.json");
  if (mi) {
    try {
      auto j = nlohmann::ordered_json::parse(mi);
      rb.provenance = j.value("provenance", "");
    } catch (const std::exception&) {
    }
  }
  return rb;
}

namespace {

nlohmann::ordered_json metric_json(const SeriesMetric& m) {
  nlohmann::ordered_json j;
  if (m.nan_flagged) {
    j["rmse_pct"] = "NaN";
    j["mae_pct"] = "NaN";
  } else {
    j["rmse_pct"] = m.rmse_pct;
    j["mae_pct"] = m.mae_pct;
  }
  j["nan_flagged"] = m.nan_flagged;
  return j;
}

}  // namespace

std::string metrics_to_json(const FraMetrics& m) {
  nlohmann::ordered_json j;
  j["bc_max"] = metric_json(m.bc_max);
  j["bc_min"] = metric_json(m.bc_min);
  j["grid_max"] = metric_json(m.grid_max);
  j["grid_min"] = metric_json(m.grid_min);
  j["theta2"] = metric_json(m.theta2);
  return j.dump(2) + "\n";
}

}  // namespace vppfra
