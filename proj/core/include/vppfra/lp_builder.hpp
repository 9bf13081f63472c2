#pragma once

#include <string>
#include <vector>

#include "vppfra/lp.hpp"
#include "vppfra/params.hpp"
#include "vppfra/types.hpp"

namespace vppfra {

// Column offsets inside one interval's block; column(t) = t*stride + offset.
struct MineLayout {
  int horizon = 0;
  int stride = 0;
  std::vector<int> q;      // per link
  std::vector<int> sigma;  // per link
  std::vector<int> p_bc;   // per link
  std::vector<int> m_silo;       // per silo (order of MineScenario::silos)
  int e_phs = -1, p_phsc = -1, p_phsd = -1;
  int e_tst = -1, h_tstc = -1, h_tstd = -1;
  std::vector<int> h_unit;  // per unit
  int p_pv = -1, p_wt = -1, p_g = -1;

  int col(int offset, int t) const { return t * stride + offset; }

  // inequality row ids of the hooked constraint families, per link / interval
  std::vector<std::vector<int>> row_p_lo;  // [link][t]
  std::vector<std::vector<int>> row_p_hi;
  std::vector<int> row_g_lo;  // [t]
  std::vector<int> row_g_hi;
};

struct MineLp {
  LpProblem lp;
  MineLayout layout;
  std::string mine_id;
};

// Assembles the dispatch LP of one mine. When `params` is given, its entries
// (looked up by canonical name) override the scenario's true values; search
// boxes always come from `params` when present. Throws InfeasibleStructure if
// an override empties a box.
MineLp build_mine_lp(const MineScenario& mine, const ParameterVector* params = nullptr);

LpProblem build_lp(const MineScenario& mine, const ParameterVector* params = nullptr);

}  // namespace vppfra
