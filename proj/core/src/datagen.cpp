#include "vppfra/datagen.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vppfra/dispatch.hpp"
#include "vppfra/log.hpp"
#include "vppfra/parallel.hpp"
#include "vppfra/rng.hpp"

namespace vppfra {

using ordered_json = nlohmann::ordered_json;

bool CoverageDiagnostic::all_covered() const {
  for (int c : binding_records)
    if (c == 0) return false;
  return true;
}

std::vector<std::vector<double>> perturb_prices(const std::vector<double>& base, int n,
                                                std::uint64_t seed, double spread) {
  if (n < 1) throw Error("perturb_prices: n must be >= 1");
  if (spread < 0.0 || spread >= 1.0) throw Error("perturb_prices: spread must be in [0, 1)");
  std::vector<std::vector<double>> out(n);
  for (int r = 0; r < n; ++r) {
    Rng rng(seed, "price", static_cast<std::uint64_t>(r));
    out[r].resize(base.size());
    for (std::size_t t = 0; t < base.size(); ++t)
      out[r][t] = base[t] * (1.0 + rng.uniform(-spread, spread));
  }
  return out;
}

Dataset generate_history(const VppScenario& vpp, int n, std::uint64_t seed, double spread,
                         double noise_sigma, int jobs) {
  const int T = vpp.time().horizon_length;
  const int M = static_cast<int>(vpp.mines.size());

  Dataset ds;
  ds.seed = seed;
  ds.spread = spread;
  ds.noise_sigma = noise_sigma;
  ds.horizon = T;
  for (const auto& mine : vpp.mines) ds.mine_ids.push_back(mine.id);

  auto prices = perturb_prices(vpp.mines.front().profiles.price, n, seed, spread);

  // Pre-build per-mine LP templates once; per record only the price part of
  // the objective changes.
  std::vector<MineLp> templates;
  templates.reserve(M);
  for (const auto& mine : vpp.mines) templates.push_back(build_mine_lp(mine));

  struct RecOut {
    bool ok = false;
    DataRecord rec;
    std::vector<std::vector<int>> active;  // [mine] binding ineq rows with mu > 0
  };
  std::vector<RecOut> outs(n);

  // Worker-local solvers keyed by thread would break determinism of nothing:
  // outputs land in per-record slots, price order fixed.
  parallel_for(static_cast<std::size_t>(n), jobs, [&](std::size_t r) {
    RecOut& out = outs[r];
    out.rec.price = prices[r];
    out.rec.bc_total_obs.resize(M);
    out.rec.grid_obs.resize(M);
    out.active.resize(M);
    try {
      for (int i = 0; i < M; ++i) {
        const auto& mine = vpp.mines[i];
        const auto& tmpl = templates[i];
        Vec c = tmpl.lp.c;
        for (int t = 0; t < T; ++t)
          c[tmpl.layout.col(tmpl.layout.p_g, t)] +=
              mine.time.interval_hours * (prices[r][t] - mine.profiles.price[t]);
        SimplexSolver solver(tmpl.lp);
        solver.set_objective(c);
        PrimalDualSolution sol = solver.solve();
        out.rec.bc_total_obs[i].assign(T, 0.0);
        out.rec.grid_obs[i].assign(T, 0.0);
        for (int t = 0; t < T; ++t) {
          double s = 0.0;
          for (int off : tmpl.layout.p_bc) s += sol.primal[tmpl.layout.col(off, t)];
          out.rec.bc_total_obs[i][t] = s;
          out.rec.grid_obs[i][t] = sol.primal[tmpl.layout.col(tmpl.layout.p_g, t)];
        }
        const double mu_tol = 1e-7;
        for (int row : solver.last_active_ineq())
          if (sol.ineq_duals[row] > mu_tol) out.active[i].push_back(row);
      }
      if (noise_sigma > 0.0) {
        Rng rng(seed, "noise", static_cast<std::uint64_t>(r));
        for (int i = 0; i < M; ++i)
          for (int t = 0; t < T; ++t) {
            out.rec.bc_total_obs[i][t] *= 1.0 + noise_sigma * rng.normal();
            out.rec.grid_obs[i][t] *= 1.0 + noise_sigma * rng.normal();
          }
      }
      out.ok = true;
    } catch (const Infeasible& e) {
      log::warn("generate_history: record ", r, " infeasible (", e.what(), "), skipped");
      out.ok = false;
    }
  });

  // coverage over hooked bound rows
  for (int i = 0; i < M; ++i) {
    const auto& tmpl = templates[i];
    for (const auto& p : tmpl.lp.params) {
      if (p.name.find(".theta2.") != std::string::npos) continue;  // equality-hooked, always active
      ds.coverage.entry.push_back(p.name);
      ds.coverage.binding_records.push_back(0);
      std::size_t slot = ds.coverage.entry.size() - 1;
      std::vector<char> hooked(tmpl.lp.n_ineq(), 0);
      for (const auto& hk : p.hooks)
        if (!hk.on_eq) hooked[hk.row] = 1;
      for (const auto& out : outs) {
        if (!out.ok) continue;
        bool hit = false;
        for (int row : out.active[i]) hit |= (hooked[row] != 0);
        if (hit) ++ds.coverage.binding_records[slot];
      }
    }
  }

  for (auto& out : outs) {
    if (out.ok)
      ds.records.push_back(std::move(out.rec));
    else
      ++ds.skipped;
  }
  if (ds.records.empty())
    throw Infeasible("generate_history: every record was infeasible", "dispatch");
  if (!ds.coverage.all_covered())
    log::info("generate_history: some learnable bounds never bind in the data; ",
              "they will be reported as not identified");
  return ds;
}

std::string dataset_to_csv(const Dataset& ds) {
  std::ostringstream os;
  os.precision(17);
  os << "record,t,price,mine,bc_total,grid\n";
  for (std::size_t r = 0; r < ds.records.size(); ++r) {
    const auto& rec = ds.records[r];
    for (std::size_t i = 0; i < ds.mine_ids.size(); ++i)
      for (int t = 0; t < ds.horizon; ++t)
        os << r << "," << t << "," << rec.price[t] << "," << ds.mine_ids[i] << ","
           << rec.bc_total_obs[i][t] << "," << rec.grid_obs[i][t] << "\n";
  }
  return os.str();
}

std::string dataset_meta_to_json(const Dataset& ds) {
  ordered_json j;
  j["seed"] = ds.seed;
  j["spread"] = ds.spread;
  j["noise_sigma"] = ds.noise_sigma;
  j["records"] = ds.records.size();
  j["skipped"] = ds.skipped;
  j["horizon"] = ds.horizon;
  j["mines"] = ds.mine_ids;
  ordered_json cov;
  for (std::size_t k = 0; k < ds.coverage.entry.size(); ++k)
    cov[ds.coverage.entry[k]] = ds.coverage.binding_records[k];
  j["coverage_binding_records"] = cov;
  return j.dump(2) + "\n";
}

void save_dataset(const Dataset& ds, const std::string& csv_path) {
  std::ofstream out(csv_path);
  if (!out) throw Error("cannot write dataset: " + csv_path);
  out << dataset_to_csv(ds);
  std::ofstream meta(csv_path + ".meta.json");
  if (!meta) throw Error("cannot write dataset metadata: " + csv_path + ".meta.json");
  meta << dataset_meta_to_json(ds);
}

Dataset load_dataset(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw ParseError("cannot open dataset: " + csv_path);
  Dataset ds;
  std::string line;
  if (!std::getline(in, line) || line.rfind("record,t,price,mine,bc_total,grid", 0) != 0)
    throw ParseError("dataset CSV header mismatch in " + csv_path);
  struct Row {
    int rec, t;
    double price;
    std::string mine;
    double bc, grid;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Row row;
    std::istringstream ls(line);
    std::string field;
    try {
      std::getline(ls, field, ',');
      row.rec = std::stoi(field);
      std::getline(ls, field, ',');
      row.t = std::stoi(field);
      std::getline(ls, field, ',');
      row.price = std::stod(field);
      std::getline(ls, row.mine, ',');
      std::getline(ls, field, ',');
      row.bc = std::stod(field);
      std::getline(ls, field, ',');
      row.grid = std::stod(field);
    } catch (const std::exception&) {
      throw ParseError("dataset CSV: malformed line '" + line + "'");
    }
    rows.push_back(row);
  }
  if (rows.empty()) throw ParseError("dataset CSV has no data rows: " + csv_path);
  int T = 0, R = 0;
  for (const auto& row : rows) {
    T = std::max(T, row.t + 1);
    R = std::max(R, row.rec + 1);
    if (std::find(ds.mine_ids.begin(), ds.mine_ids.end(), row.mine) == ds.mine_ids.end())
      ds.mine_ids.push_back(row.mine);
  }
  ds.horizon = T;
  const int M = static_cast<int>(ds.mine_ids.size());
  ds.records.assign(R, DataRecord{});
  for (auto& rec : ds.records) {
    rec.price.assign(T, 0.0);
    rec.bc_total_obs.assign(M, std::vector<double>(T, 0.0));
    rec.grid_obs.assign(M, std::vector<double>(T, 0.0));
  }
  for (const auto& row : rows) {
    int i = static_cast<int>(std::find(ds.mine_ids.begin(), ds.mine_ids.end(), row.mine) -
                             ds.mine_ids.begin());
    auto& rec = ds.records[row.rec];
    rec.price[row.t] = row.price;
    rec.bc_total_obs[i][row.t] = row.bc;
    rec.grid_obs[i][row.t] = row.grid;
  }
  // optional metadata sidecar
  std::ifstream meta(csv_path + ".meta.json");
  if (meta) {
    try {
      ordered_json j = ordered_json::parse(meta);
      ds.seed = j.value("seed", 0ull);
      ds.spread = j.value("spread", 0.0);
      ds.noise_sigma = j.value("noise_sigma", 0.0);
      ds.skipped = j.value("skipped", 0);
    } catch (const std::exception& e) {
      log::warn("dataset metadata unreadable: ", e.what());
    }
  }
  return ds;
}

}  // namespace vppfra
