#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vppfra/datagen.hpp"
#include "vppfra/inverse_step.hpp"
#include "vppfra/params.hpp"
#include "vppfra/types.hpp"

namespace vppfra {

struct LfraConfig {
  double rho = 1.0;
  double eps = 1e-4;  // loss-change tolerance, relative to the initial loss
  int max_outer = 50;
  double big_m_scale = 10.0;
  int batch_size = 0;      // 0 or >= |D|: one full pass per outer iteration
  std::uint64_t seed = 0;  // mini-batch shuffling
  // Absolute stop: mean loss at or below this fraction of the observation
  // scale counts as a fixed point (first iteration included).
  double loss_floor_rel = 1e-5;
  int jobs = 1;
  StepOptions step;
};

struct LfraIteration {
  double loss = 0.0;  // mean pure per-record loss of this iteration
  std::vector<double> per_record_loss;
  std::vector<double> xi;  // averaged estimate after this iteration
  double wall_ms = 0.0;
  int uncertified_steps = 0;
};

struct LfraTrace {
  std::vector<LfraIteration> iters;
  bool converged = false;
  bool no_progress = false;  // max_outer reached without meeting the tolerance
  double loss_floor = 0.0;
  std::vector<std::string> entry_names;

  std::string to_csv() const;  // iter,loss,wall_ms,<entry...>
};

struct LfraResult {
  ParameterVector xi_final;
  LfraTrace trace;
};

// Algorithm: starting from xi0, repeatedly solve the proximal inverse step
// (14) against every record of the batch, average the per-record estimates,
// and stop when the mean loss change drops below the tolerance or the loss
// hits the floor. Per-record solves within an iteration are independent and
// run on `jobs` workers; the average is reduced in record order, so results
// do not depend on the parallelism level.
LfraResult lfra_run(const VppScenario& vpp, const Dataset& dataset, const ParameterVector& xi0,
                    const LfraConfig& cfg);

}  // namespace vppfra
