#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vppfra/types.hpp"

namespace vppfra {

struct DataRecord {
  std::vector<double> price;                       // shared across mines
  std::vector<std::vector<double>> bc_total_obs;   // [mine][t]
  std::vector<std::vector<double>> grid_obs;       // [mine][t]
};

// Which learnable bounds were seen binding (with a positive multiplier) in at
// least one record. Bounds that never bind cannot be identified from data.
struct CoverageDiagnostic {
  std::vector<std::string> entry;   // parameter name
  std::vector<int> binding_records; // count of records where the bound binds
  bool all_covered() const;
};

struct Dataset {
  std::vector<DataRecord> records;
  std::uint64_t seed = 0;
  double spread = 0.0;
  double noise_sigma = 0.0;
  int skipped = 0;  // infeasible dispatches dropped during generation
  CoverageDiagnostic coverage;
  std::vector<std::string> mine_ids;
  int horizon = 0;
};

// n price series, each base*(1+u_t) with u_t ~ U[-spread, spread] i.i.d.;
// deterministic in seed.
std::vector<std::vector<double>> perturb_prices(const std::vector<double>& base, int n,
                                                std::uint64_t seed, double spread);

// Solves the true forward model per mine under n perturbed price series and
// records the aggregates, optionally with multiplicative observation noise.
Dataset generate_history(const VppScenario& vpp, int n, std::uint64_t seed, double spread,
                         double noise_sigma, int jobs = 1);

// CSV columns: record,t,price,mine,bc_total,grid. Metadata lands in a JSON
// sidecar next to the CSV (seed, spread, noise, coverage).
void save_dataset(const Dataset& ds, const std::string& csv_path);
Dataset load_dataset(const std::string& csv_path);
std::string dataset_to_csv(const Dataset& ds);
std::string dataset_meta_to_json(const Dataset& ds);

}  // namespace vppfra
