#include "storeplan/admm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <thread>

#include "storeplan/error.hpp"

namespace storeplan {

BlockScheme ParseBlockScheme(const std::string& name) {
  if (name == "hour") return BlockScheme::kHour;
  if (name == "day") return BlockScheme::kDay;
  if (name == "week") return BlockScheme::kWeek;
  if (name == "single") return BlockScheme::kSingle;
  throw Error(ErrorCode::kInvalidInput, "unknown block scheme '" + name + "'");
}

std::string BlockSchemeName(BlockScheme scheme) {
  switch (scheme) {
    case BlockScheme::kHour: return "hour";
    case BlockScheme::kDay: return "day";
    case BlockScheme::kWeek: return "week";
    case BlockScheme::kSingle: return "single";
  }
  return "unknown";
}

void AdmmConfig::Validate() const {
  if (!(beta > 0)) throw Error(ErrorCode::kInvalidInput, "beta must be positive");
  if (!(eps_primal > 0) || !(eps_dual > 0)) {
    throw Error(ErrorCode::kInvalidInput, "tolerances must be positive");
  }
  if (max_iters < 1) throw Error(ErrorCode::kInvalidInput, "max_iters must be at least 1");
  if (threads < 1) throw Error(ErrorCode::kInvalidInput, "threads must be at least 1");
  if (!(relaxation > 0 && relaxation < 2)) {
    throw Error(ErrorCode::kInvalidInput, "relaxation must lie in (0, 2)");
  }
  if (adapt_iters < 0) throw Error(ErrorCode::kInvalidInput, "adapt_iters must be nonnegative");
}

BlockStructure PartitionBlocks(const SystemInstance& inst, BlockScheme scheme) {
  const int n = inst.num_hours();
  const int m = inst.num_generators();
  BlockStructure bs;
  bs.scheme = scheme;
  if (scheme == BlockScheme::kSingle) {
    bs.chunks.push_back({0, n});
    return bs;
  }
  const int len = scheme == BlockScheme::kHour ? 1 : scheme == BlockScheme::kDay ? 24 : 168;
  if (n % len != 0) {
    throw Error(ErrorCode::kIndivisibleHorizon,
                "block length " + std::to_string(len) + " does not divide " + std::to_string(n));
  }
  for (int h = 0; h < n; h += len) bs.chunks.push_back({h, len});
  const int blocks = bs.num_dispatch_blocks();
  bs.capacity_links = m * n;
  bs.door_links = 2 * n;
  bs.room_links = n;
  bs.soc_links = blocks == 1 ? 0 : (inst.grid.cyclic ? blocks : blocks - 1);
  return bs;
}

std::string AdmmTrace::ToCsv() const {
  std::ostringstream os;
  os.precision(12);
  os << "iter,primal_residual,dual_residual,objective,seconds,beta\n";
  for (const auto& it : iterations) {
    os << it.iter << "," << it.primal_residual << "," << it.dual_residual << "," << it.objective
       << "," << it.seconds << "," << it.beta << "\n";
  }
  return os.str();
}

namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

// A linked scalar v = (A_i x_i) seen by one block; `link` indexes the
// global linking row.
struct Entry {
  int link = 0;
  int v_col = -1;      // dispatch blocks: column holding v
  double coef = 0.0;   // capacity block: v = coef * variable
  int var = -1;        // capacity block: 0..m-1 z, m t, m+1 u
};

struct DispatchBlock {
  int first = 0;
  int hours = 0;
  lp::Problem problem;
  std::vector<Entry> entries;
  std::vector<int> x_col;  // g * hours + k
  std::vector<int> r_col, s_col;
  int s_in_col = -1;
  std::vector<int> demand_row, balance_row;
  lp::Solution last;
  double seconds = 0.0;
};

constexpr double kBalance = 10.0;
constexpr double kBetaStep = 2.0;

struct Normalized {
  double qs = 1.0;
  double cs = 1.0;
};

}  // namespace

AdmmResult AdmmSolve(const SystemInstance& inst, const AdmmConfig& cfg) {
  inst.Validate();
  cfg.Validate();
  AdmmResult out;
  out.blocks = PartitionBlocks(inst, cfg.scheme);
  const auto t_start = Clock::now();

  if (cfg.scheme == BlockScheme::kSingle) {
    // Nothing is linked: one block solve is the whole method.
    out.result = SolveCore(inst);
    out.trace.iterations.push_back(
        {1, 0.0, 0.0, out.result.objective, Seconds(t_start, Clock::now()), 0.0, cfg.beta});
    out.trace.converged = true;
    return out;
  }

  const int n = inst.num_hours();
  const int m = inst.num_generators();
  const bool cyclic = inst.grid.cyclic;
  // Prices are scaled by the dearest running cost rather than by the largest
  // capacity cost: hourly terms then stay O(1) and the residual tolerance
  // translates into a tight objective gap.
  Normalized nz{inst.QuantityScale(), 1.0};
  for (const auto& g : inst.generators) nz.cs = std::max(nz.cs, g.var_cost.cwiseAbs().maxCoeff());
  double beta = cfg.beta;

  // Linking rows: [cap (g,h)] [chg h] [dis h] [room h] [soc l].
  const int cap0 = 0;
  const int chg0 = m * n;
  const int dis0 = chg0 + n;
  const int room0 = dis0 + n;
  const int soc0 = room0 + n;
  const int links = soc0 + out.blocks.soc_links;

  const int B = out.blocks.num_dispatch_blocks();
  std::vector<DispatchBlock> blocks(B);
  for (int b = 0; b < B; ++b) {
    using lp::RowSense;
    DispatchBlock& blk = blocks[b];
    blk.first = out.blocks.chunks[b].first_hour;
    blk.hours = out.blocks.chunks[b].hours;
    const int L = blk.hours;
    lp::Problem& p = blk.problem;
    blk.x_col.resize(static_cast<std::size_t>(m) * L);
    for (int g = 0; g < m; ++g) {
      for (int k = 0; k < L; ++k) {
        blk.x_col[g * L + k] = p.AddVariable(inst.generators[g].var_cost[blk.first + k] / nz.cs);
      }
    }
    blk.r_col.resize(L);
    blk.s_col.resize(L);
    for (int k = 0; k < L; ++k) blk.r_col[k] = p.AddVariable(0.0, false);
    for (int k = 0; k < L; ++k) blk.s_col[k] = p.AddVariable(0.0);
    const bool has_in = B > 1 && (cyclic || b > 0);
    const bool has_out = B > 1 && (cyclic || b + 1 < B);
    if (has_in) blk.s_in_col = p.AddVariable(0.0);

    for (int k = 0; k < L; ++k) {
      const int row = p.AddRow(RowSense::kEqual, inst.demand[blk.first + k] / nz.qs);
      blk.demand_row.push_back(row);
      for (int g = 0; g < m; ++g) p.AddCoefficient(row, blk.x_col[g * L + k], 1.0);
      p.AddCoefficient(row, blk.r_col[k], -1.0);
    }
    for (int k = 0; k < L; ++k) {
      // s_{k-1} + r_k - s_k = 0
      const int row = p.AddRow(RowSense::kEqual, 0.0);
      blk.balance_row.push_back(row);
      if (k > 0) {
        p.AddCoefficient(row, blk.s_col[k - 1], 1.0);
      } else if (has_in) {
        p.AddCoefficient(row, blk.s_in_col, 1.0);
      } else if (B == 1 && cyclic && L > 1) {
        p.AddCoefficient(row, blk.s_col[L - 1], 1.0);
      }
      p.AddCoefficient(row, blk.r_col[k], 1.0);
      if (!(B == 1 && cyclic && L == 1)) p.AddCoefficient(row, blk.s_col[k], -1.0);
    }
    // v = A_i x_i for every linked scalar, carrying the penalty beta/2 v^2.
    auto add_link = [&](int link, const std::vector<std::pair<int, double>>& terms) {
      const int v = p.AddVariable(0.0, false, beta);
      const int row = p.AddRow(RowSense::kEqual, 0.0);
      p.AddCoefficient(row, v, 1.0);
      for (const auto& [col, c] : terms) p.AddCoefficient(row, col, -c);
      blk.entries.push_back({link, v, 0.0, -1});
    };
    for (int g = 0; g < m; ++g) {
      for (int k = 0; k < L; ++k) {
        const int sigma = p.AddVariable(0.0);
        add_link(cap0 + g * n + blk.first + k, {{blk.x_col[g * L + k], 1.0}, {sigma, 1.0}});
      }
    }
    for (int k = 0; k < L; ++k) {
      const int h = blk.first + k;
      const int sc = p.AddVariable(0.0);
      add_link(chg0 + h, {{blk.r_col[k], 1.0}, {sc, 1.0}});
      const int sd = p.AddVariable(0.0);
      add_link(dis0 + h, {{blk.r_col[k], -1.0}, {sd, 1.0}});
      const int su = p.AddVariable(0.0);
      add_link(room0 + h, {{blk.s_col[k], 1.0}, {su, 1.0}});
    }
    // SOC handoff l joins block l's end to block (l + 1)'s start.
    if (has_out) add_link(soc0 + b, {{blk.s_col[L - 1], 1.0}});
    if (has_in) add_link(soc0 + (b + B - 1) % B, {{blk.s_in_col, -1.0}});
  }

  // Capacity block entries: v = -a z on cap rows, -t on door rows, -u on room rows.
  std::vector<Entry> cap_entries;
  for (int g = 0; g < m; ++g) {
    for (int h = 0; h < n; ++h) {
      cap_entries.push_back({cap0 + g * n + h, -1, -inst.generators[g].availability[h], g});
    }
  }
  for (int h = 0; h < n; ++h) {
    cap_entries.push_back({chg0 + h, -1, -1.0, m});
    cap_entries.push_back({dis0 + h, -1, -1.0, m});
    cap_entries.push_back({room0 + h, -1, -1.0, m + 1});
  }
  std::vector<double> cap_cost(m + 2);
  for (int g = 0; g < m; ++g) cap_cost[g] = inst.generators[g].cap_cost / nz.cs;
  cap_cost[m] = inst.storage.door_cost / nz.cs;
  cap_cost[m + 1] = inst.storage.room_cost / nz.cs;
  std::vector<double> cap_curv(m + 2, 0.0);
  for (const auto& e : cap_entries) cap_curv[e.var] += e.coef * e.coef;

  std::vector<int> incident(links, 0);
  for (const auto& e : cap_entries) ++incident[e.link];
  for (const auto& blk : blocks) {
    for (const auto& e : blk.entries) ++incident[e.link];
  }

  std::vector<double> alpha(links, 0.0);
  std::vector<double> cap_y(cap_entries.size(), 0.0);
  std::vector<std::vector<double>> blk_y(B);
  for (int b = 0; b < B; ++b) blk_y[b].assign(blocks[b].entries.size(), 0.0);
  std::vector<double> cap_var(m + 2, 0.0);
  std::vector<double> cap_v(cap_entries.size(), 0.0);
  std::vector<std::vector<double>> blk_v(B);
  std::vector<double> residual(links, 0.0);

  const lp::InteriorPointSolver solver;
  auto solve_block = [&](int b) {
    DispatchBlock& blk = blocks[b];
    for (std::size_t e = 0; e < blk.entries.size(); ++e) {
      const Entry& en = blk.entries[e];
      blk.problem.set_cost(en.v_col, -(beta * blk_y[b][e] + alpha[en.link]));
    }
    const auto t0 = Clock::now();
    blk.last = solver.Solve(blk.problem);
    blk.seconds = Seconds(t0, Clock::now());
    blk_v[b].resize(blk.entries.size());
    for (std::size_t e = 0; e < blk.entries.size(); ++e) {
      blk_v[b][e] = blk.last.x[blk.entries[e].v_col];
    }
  };

  const double sqrt_links = std::sqrt(static_cast<double>(std::max(1, links)));
  std::size_t total_entries = cap_entries.size();
  for (const auto& blk : blocks) total_entries += blk.entries.size();
  const double sqrt_entries = std::sqrt(static_cast<double>(std::max<std::size_t>(1, total_entries)));

  double objective = 0.0;
  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    const auto t_iter = Clock::now();
    // Capacity block in closed form, projected onto the nonnegative orthant.
    std::vector<double> num(m + 2, 0.0);
    for (std::size_t e = 0; e < cap_entries.size(); ++e) {
      const Entry& en = cap_entries[e];
      num[en.var] += en.coef * (beta * cap_y[e] + alpha[en.link]);
    }
    for (int v = 0; v < m + 2; ++v) {
      cap_var[v] = cap_curv[v] > 0 ? std::max(0.0, (num[v] - cap_cost[v]) / (beta * cap_curv[v]))
                                   : 0.0;
    }
    for (std::size_t e = 0; e < cap_entries.size(); ++e) {
      cap_v[e] = cap_entries[e].coef * cap_var[cap_entries[e].var];
    }

    // Dispatch blocks: independent given (y, alpha).
    if (cfg.threads > 1 && B > 1) {
      const int workers = std::min(cfg.threads, B);
      std::vector<std::thread> pool;
      for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          for (int b = w; b < B; b += workers) solve_block(b);
        });
      }
      for (auto& th : pool) th.join();
    } else {
      for (int b = 0; b < B; ++b) solve_block(b);
    }
    double block_seconds = 0.0;
    for (const auto& blk : blocks) {
      if (blk.last.status != lp::Status::kOptimal) {
        throw Error(ErrorCode::kNumericalFailure,
                    "dispatch block failed: " + std::string(lp::StatusName(blk.last.status)));
      }
      block_seconds += blk.seconds;
    }

    // Coordinator: residuals, target projection and dual step.
    std::fill(residual.begin(), residual.end(), 0.0);
    for (std::size_t e = 0; e < cap_entries.size(); ++e) residual[cap_entries[e].link] += cap_v[e];
    for (int b = 0; b < B; ++b) {
      for (std::size_t e = 0; e < blocks[b].entries.size(); ++e) {
        residual[blocks[b].entries[e].link] += blk_v[b][e];
      }
    }
    // Over-relaxed outputs g v + (1 - g) y; the targets sum to zero, so the
    // relaxed residual is g times the plain one.
    const double g = cfg.relaxation;
    double dy2 = 0.0;
    auto update_y = [&](double v, int link, double& y) {
      const double ny = g * v + (1.0 - g) * y - g * residual[link] / incident[link];
      dy2 += (ny - y) * (ny - y);
      y = ny;
    };
    for (std::size_t e = 0; e < cap_entries.size(); ++e) {
      update_y(cap_v[e], cap_entries[e].link, cap_y[e]);
    }
    for (int b = 0; b < B; ++b) {
      for (std::size_t e = 0; e < blocks[b].entries.size(); ++e) {
        update_y(blk_v[b][e], blocks[b].entries[e].link, blk_y[b][e]);
      }
    }
    double r2 = 0.0;
    for (int j = 0; j < links; ++j) {
      alpha[j] -= beta * g * residual[j] / incident[j];
      r2 += residual[j] * residual[j];
    }

    objective = 0.0;
    for (int v = 0; v < m + 2; ++v) objective += cap_cost[v] * cap_var[v];
    for (const auto& blk : blocks) {
      for (int g = 0; g < m; ++g) {
        for (int k = 0; k < blk.hours; ++k) {
          const int col = blk.x_col[g * blk.hours + k];
          objective += blk.problem.cost()[col] * blk.last.x[col];
        }
      }
    }
    AdmmIteration rec;
    rec.iter = iter;
    rec.primal_residual = std::sqrt(r2) / sqrt_links;
    rec.dual_residual = beta * std::sqrt(dy2) / sqrt_entries;
    rec.objective = objective * nz.qs * nz.cs;
    rec.seconds = Seconds(t_iter, Clock::now());
    rec.block_seconds = block_seconds;
    rec.beta = beta;
    out.trace.iterations.push_back(rec);
    if (rec.primal_residual <= cfg.eps_primal && rec.dual_residual <= cfg.eps_dual) {
      out.trace.converged = true;
      break;
    }
    // Residual balancing. alpha is kept unscaled, so only the block
    // penalties change with beta.
    if (cfg.adaptive_beta && iter <= cfg.adapt_iters) {
      double next = beta;
      if (rec.primal_residual > kBalance * rec.dual_residual) next = beta * kBetaStep;
      if (rec.dual_residual > kBalance * rec.primal_residual) next = beta / kBetaStep;
      if (next != beta) {
        beta = next;
        for (auto& blk : blocks) {
          for (const auto& en : blk.entries) blk.problem.set_quadratic(en.v_col, beta);
        }
      }
    }
  }

  // Assemble the hourly result in original units.
  SolveResult& res = out.result;
  res.cyclic = cyclic;
  res.x.resize(m, n);
  res.rho.resize(m, n);
  res.z.resize(m);
  res.r.resize(n);
  res.s.resize(n);
  res.lambda.resize(n);
  res.omega.resize(n);
  res.delta_c.resize(n);
  res.delta_d.resize(n);
  res.tau.resize(n);
  for (int g = 0; g < m; ++g) res.z[g] = cap_var[g] * nz.qs;
  res.t = cap_var[m] * nz.qs;
  res.u = cap_var[m + 1] * nz.qs;
  for (const auto& blk : blocks) {
    for (int k = 0; k < blk.hours; ++k) {
      const int h = blk.first + k;
      for (int g = 0; g < m; ++g) res.x(g, h) = blk.last.x[blk.x_col[g * blk.hours + k]] * nz.qs;
      res.r[h] = blk.last.x[blk.r_col[k]] * nz.qs;
      res.s[h] = blk.last.x[blk.s_col[k]] * nz.qs;
      res.lambda[h] = blk.last.row_duals[blk.demand_row[k]] * nz.cs;
      res.omega[h] = blk.last.row_duals[blk.balance_row[k]] * nz.cs;
    }
  }
  for (int g = 0; g < m; ++g) {
    for (int h = 0; h < n; ++h) res.rho(g, h) = -alpha[cap0 + g * n + h] * nz.cs;
  }
  for (int h = 0; h < n; ++h) {
    res.delta_c[h] = -alpha[chg0 + h] * nz.cs;
    res.delta_d[h] = -alpha[dis0 + h] * nz.cs;
    res.tau[h] = -alpha[room0 + h] * nz.cs;
  }
  res.objective = EvaluateObjective(inst, res);
  res.iterations = static_cast<int>(out.trace.iterations.size());
  return out;
}

}  // namespace storeplan
