#pragma once

#include <string>
#include <vector>

#include "vppfra/params.hpp"
#include "vppfra/types.hpp"

namespace vppfra {

enum class RegionTarget { BcTotal, Grid };
enum class BoundSense { Max, Min };

// Per-interval support bounds of the VPP's operating region: the reachable
// extremes of aggregate conveyor draw and DSO exchange. The mines' dispatch
// sets are independent, so VPP-level supports are sums of per-mine supports.
struct RegionBounds {
  std::vector<double> bc_max, bc_min, grid_max, grid_min;
  std::string provenance;  // "true" or "surrogate"
  double peak_valley = 0.0;
  int horizon() const { return static_cast<int>(bc_max.size()); }
};

double support_bound(const VppScenario& vpp, const ParameterVector& params, RegionTarget target,
                     int t, BoundSense sense);

RegionBounds assess_region(const VppScenario& vpp, const ParameterVector& params,
                           const std::string& provenance, int jobs = 1);

// Optional sampled-direction support values over the stacked
// (bc_total[0..T), grid[0..T)) trajectory space; `directions` random unit
// vectors drawn from the seed.
struct DirectionSupport {
  std::vector<std::vector<double>> direction;  // unit vectors, length 2T
  std::vector<double> value;                   // support in that direction
};
DirectionSupport sampled_supports(const VppScenario& vpp, const ParameterVector& params,
                                  int directions, std::uint64_t seed, int jobs = 1);

struct SeriesMetric {
  double rmse_pct = 0.0;
  double mae_pct = 0.0;
  bool nan_flagged = false;  // every interval had zero truth
};

// Relative-error metrics per series; intervals with zero truth are excluded,
// and a series whose truth is identically zero is NaN-flagged.
struct FraMetrics {
  SeriesMetric bc_max, bc_min, grid_max, grid_min, theta2;
};

FraMetrics compare_regions(const RegionBounds& est, const RegionBounds& truth);

// 100 * |est - true| / true per conveyor, in global canonical entry order.
std::vector<double> theta2_errors(const ParameterVector& est, const ParameterVector& truth);

SeriesMetric metric_from_rel_errors(const std::vector<double>& rel_pct);

std::string region_to_csv(const RegionBounds& rb);
RegionBounds region_from_csv(const std::string& text);
void save_region(const RegionBounds& rb, const std::string& path);
RegionBounds load_region(const std::string& path);

std::string metrics_to_json(const FraMetrics& m);

}  // namespace vppfra
