#include "vppfra/lfra.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "vppfra/lp_builder.hpp"
#include "vppfra/kkt_system.hpp"
#include "vppfra/log.hpp"
#include "vppfra/parallel.hpp"
#include "vppfra/rng.hpp"

namespace vppfra {

std::string LfraTrace::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "iter,loss,wall_ms";
  for (const auto& n : entry_names) os << "," << n;
  os << "\n";
  for (std::size_t k = 0; k < iters.size(); ++k) {
    os << (k + 1) << "," << iters[k].loss << "," << iters[k].wall_ms;
    for (double v : iters[k].xi) os << "," << v;
    os << "\n";
  }
  return os.str();
}

LfraResult lfra_run(const VppScenario& vpp, const Dataset& dataset, const ParameterVector& xi0,
                    const LfraConfig& cfg) {
  if (dataset.records.empty()) throw Error("lfra_run: dataset is empty");
  if (dataset.mine_ids.size() != vpp.mines.size())
    throw HorizonMismatch("dataset mine count differs from the scenario");
  if (dataset.horizon != vpp.time().horizon_length)
    throw HorizonMismatch("dataset horizon differs from the scenario");
  if (cfg.eps <= 0.0) throw Error("lfra_run: eps must be > 0");
  if (cfg.max_outer < 1) throw Error("lfra_run: max_outer must be >= 1");
  if (cfg.rho < 0.0) throw Error("lfra_run: rho must be >= 0");

  const int M = static_cast<int>(vpp.mines.size());
  const int R = static_cast<int>(dataset.records.size());

  // per-mine templates and block offsets into the global vector
  std::vector<KktSystem> kkt;
  std::vector<int> block0(M + 1, 0);
  kkt.reserve(M);
  for (int i = 0; i < M; ++i) {
    MineLp ml = build_mine_lp(vpp.mines[i], &xi0);
    kkt.push_back(derive_kkt(ml.lp, cfg.big_m_scale));
    block0[i + 1] = block0[i] + kkt[i].n_xi();
  }
  const int n_xi = block0[M];
  if (xi0.size() != n_xi) throw Error("lfra_run: xi0 size mismatch against the scenario");
  for (int i = 0; i < M; ++i)
    for (int k = 0; k < kkt[i].n_xi(); ++k)
      if (kkt[i].lp.params[k].name != xi0.entries[block0[i] + k].name)
        throw Error("lfra_run: xi0 entry order mismatch at " + xi0.entries[block0[i] + k].name);

  Vec xi_prev(n_xi);
  for (int k = 0; k < n_xi; ++k)
    xi_prev[k] = std::clamp(xi0.entries[k].value, xi0.entries[k].box_lo, xi0.entries[k].box_hi);

  // observation scale for the loss floor
  double ss = 0.0;
  long cnt = 0;
  for (const auto& rec : dataset.records)
    for (int i = 0; i < M; ++i)
      for (int t = 0; t < dataset.horizon; ++t) {
        ss += rec.bc_total_obs[i][t] * rec.bc_total_obs[i][t] + rec.grid_obs[i][t] * rec.grid_obs[i][t];
        cnt += 2;
      }
  const double obs_scale = std::sqrt(ss / std::max(1L, cnt)) * std::sqrt(2.0 * dataset.horizon);
  const double loss_floor = cfg.loss_floor_rel * obs_scale;

  LfraResult out;
  out.trace.loss_floor = loss_floor;
  for (const auto& e : xi0.entries) out.trace.entry_names.push_back(e.name);

  std::vector<std::vector<StepCache>> cache(R, std::vector<StepCache>(M));

  const int batch = (cfg.batch_size <= 0 || cfg.batch_size >= R) ? R : cfg.batch_size;
  std::vector<int> order(R);
  std::iota(order.begin(), order.end(), 0);
  std::size_t order_pos = 0;
  Rng shuffle_rng(cfg.seed, "lfra-batch");
  auto reshuffle = [&] {
    for (int i = R - 1; i > 0; --i)
      std::swap(order[i], order[static_cast<int>(shuffle_rng.below(static_cast<std::uint64_t>(i + 1)))]);
    order_pos = 0;
  };
  if (batch < R) reshuffle();

  double best_loss = std::numeric_limits<double>::infinity();
  Vec best_xi = xi_prev;
  double prev_loss = std::numeric_limits<double>::infinity();

  for (int outer = 1; outer <= cfg.max_outer; ++outer) {
    auto tick = std::chrono::steady_clock::now();
    std::vector<int> picks;
    if (batch == R) {
      picks = order;
    } else {
      for (int k = 0; k < batch; ++k) {
        if (order_pos >= order.size()) reshuffle();
        picks.push_back(order[order_pos++]);
      }
    }

    struct TaskOut {
      Vec xi;
      double loss = 0.0;
      int uncertified = 0;
    };
    std::vector<TaskOut> touts(picks.size());
    parallel_for(picks.size(), cfg.jobs, [&](std::size_t k) {
      int s = picks[k];
      TaskOut& to = touts[k];
      to.xi = Vec(n_xi);
      for (int i = 0; i < M; ++i) {
        StepObservation obs;
        obs.price = dataset.records[s].price;
        obs.bc_total = dataset.records[s].bc_total_obs[i];
        obs.grid = dataset.records[s].grid_obs[i];
        StepProgram prog = build_inverse_step(kkt[i], obs, xi_prev.segment(block0[i], kkt[i].n_xi()),
                                              cfg.rho);
        StepResult sr = solve_inverse_step(prog, cfg.step, &cache[s][i]);
        to.xi.segment(block0[i], kkt[i].n_xi()) = sr.xi;
        to.loss += sr.loss;
        if (!sr.certified) ++to.uncertified;
      }
    });

    LfraIteration it;
    Vec xi_sum = Vec::Zero(n_xi);
    for (const auto& to : touts) {
      xi_sum += to.xi;
      it.per_record_loss.push_back(to.loss);
      it.loss += to.loss;
      it.uncertified_steps += to.uncertified;
    }
    it.loss /= static_cast<double>(picks.size());
    Vec xi_new = xi_sum / static_cast<double>(picks.size());
    it.xi.assign(xi_new.data(), xi_new.data() + n_xi);
    it.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - tick).count();
    out.trace.iters.push_back(it);
    log::info("lfra iter ", outer, ": loss=", it.loss, " (", it.uncertified_steps,
              " uncertified steps, ", it.wall_ms, " ms)");

    if (it.loss < best_loss) {
      best_loss = it.loss;
      best_xi = xi_new;
    }
    xi_prev = xi_new;

    const double eps_abs = cfg.eps * std::max(out.trace.iters.front().loss, loss_floor);
    if (it.loss <= loss_floor) {
      out.trace.converged = true;
      break;
    }
    if (outer >= 2 && std::abs(it.loss - prev_loss) < eps_abs) {
      out.trace.converged = true;
      break;
    }
    prev_loss = it.loss;
  }
  if (!out.trace.converged) {
    out.trace.no_progress = true;
    log::warn("lfra_run: max_outer reached without meeting the tolerance; returning best iterate");
    xi_prev = best_xi;
  }

  // final estimate + identification report
  out.xi_final = xi0;
  for (int k = 0; k < n_xi; ++k) out.xi_final.entries[k].value = xi_prev[k];

  // replay every record under the final estimate and count binding hooked rows
  std::vector<std::vector<int>> bind_count(M);
  for (int i = 0; i < M; ++i) bind_count[i].assign(kkt[i].n_xi(), 0);
  std::vector<std::vector<std::vector<char>>> hooked(M);
  for (int i = 0; i < M; ++i) {
    hooked[i].assign(kkt[i].n_xi(), std::vector<char>(kkt[i].lp.n_ineq(), 0));
    for (int k = 0; k < kkt[i].n_xi(); ++k)
      for (const auto& hk : kkt[i].lp.params[k].hooks)
        if (!hk.on_eq) hooked[i][k][hk.row] = 1;
  }
  std::vector<std::vector<std::vector<int>>> replay_active(R, std::vector<std::vector<int>>(M));
  parallel_for(static_cast<std::size_t>(R) * M, cfg.jobs, [&](std::size_t idx) {
    int s = static_cast<int>(idx / M);
    int i = static_cast<int>(idx % M);
    SimplexSolver fw(kkt[i].lp);
    Vec xb = xi_prev.segment(block0[i], kkt[i].n_xi());
    Vec be = kkt[i].lp.eq_rhs_for(xb);
    Vec bi = kkt[i].lp.ineq_rhs_for(xb);
    Vec c = kkt[i].lp.c;
    for (int t = 0; t < dataset.horizon; ++t)
      c[kkt[i].lp.col("p_g@" + std::to_string(t))] =
          kkt[i].lp.interval_hours * dataset.records[s].price[t];
    fw.set_rhs(be, bi);
    fw.set_objective(c);
    try {
      PrimalDualSolution sol = fw.solve(cache[s][i].has_basis ? &cache[s][i].basis : nullptr);
      for (int row : fw.last_active_ineq())
        if (sol.ineq_duals[row] > 1e-7) replay_active[s][i].push_back(row);
    } catch (const Error&) {
      // an unexplainable record leaves the counts untouched
    }
  });
  for (int s = 0; s < R; ++s)
    for (int i = 0; i < M; ++i)
      for (int row : replay_active[s][i])
        for (int k = 0; k < kkt[i].n_xi(); ++k)
          if (hooked[i][k][row]) ++bind_count[i][k];

  for (int i = 0; i < M; ++i) {
    for (int k = 0; k < kkt[i].n_xi(); ++k) {
      auto& e = out.xi_final.entries[block0[i] + k];
      double width = std::max(e.box_hi - e.box_lo, 1e-12);
      bool on_edge = std::min(e.value - e.box_lo, e.box_hi - e.value) <= 1e-6 * width;
      bool is_theta = e.name.find(".theta2.") != std::string::npos;
      if (is_theta || bind_count[i][k] > 0)
        e.identified = on_edge ? Identified::Boundary : Identified::Yes;
      else
        e.identified = on_edge ? Identified::Boundary : Identified::No;
    }
  }
  return out;
}

}  // namespace vppfra
