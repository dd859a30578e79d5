#include "storeplan/model_core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "core_internal.hpp"
#include "storeplan/error.hpp"

namespace storeplan {

namespace {

struct CoreIndex {
  int m = 0;
  int n = 0;
  std::vector<int> x;  // g * n + h
  std::vector<int> z;
  int t = -1;
  int u = -1;
  std::vector<int> r, s;
  std::vector<int> demand_row, cap_row, balance_row, charge_row, discharge_row, room_row;
};

lp::Problem BuildCoreProblem(const SystemInstance& inst, bool with_storage, CoreIndex& ix) {
  using lp::RowSense;
  const int n = inst.num_hours();
  const int m = inst.num_generators();
  ix.m = m;
  ix.n = n;
  lp::Problem p;
  ix.x.resize(static_cast<std::size_t>(m) * n);
  for (int g = 0; g < m; ++g) {
    for (int h = 0; h < n; ++h) ix.x[g * n + h] = p.AddVariable(inst.generators[g].var_cost[h]);
  }
  ix.z.resize(m);
  for (int g = 0; g < m; ++g) ix.z[g] = p.AddVariable(inst.generators[g].cap_cost);
  if (with_storage) {
    ix.t = p.AddVariable(inst.storage.door_cost);
    ix.u = p.AddVariable(inst.storage.room_cost);
    ix.r.resize(n);
    ix.s.resize(n);
    for (int h = 0; h < n; ++h) ix.r[h] = p.AddVariable(0.0, /*nonnegative=*/false);
    for (int h = 0; h < n; ++h) ix.s[h] = p.AddVariable(0.0);
  }

  ix.demand_row.resize(n);
  for (int h = 0; h < n; ++h) {
    const int row = p.AddRow(RowSense::kEqual, inst.demand[h]);
    ix.demand_row[h] = row;
    for (int g = 0; g < m; ++g) p.AddCoefficient(row, ix.x[g * n + h], 1.0);
    if (with_storage) p.AddCoefficient(row, ix.r[h], -1.0);
  }
  ix.cap_row.resize(static_cast<std::size_t>(m) * n);
  for (int g = 0; g < m; ++g) {
    for (int h = 0; h < n; ++h) {
      const int row = p.AddRow(RowSense::kGreaterEqual, 0.0);
      ix.cap_row[g * n + h] = row;
      p.AddCoefficient(row, ix.z[g], inst.generators[g].availability[h]);
      p.AddCoefficient(row, ix.x[g * n + h], -1.0);
    }
  }
  if (!with_storage) return p;

  ix.balance_row.resize(n);
  ix.charge_row.resize(n);
  ix.discharge_row.resize(n);
  ix.room_row.resize(n);
  for (int h = 0; h < n; ++h) {
    // s_{h-1} + r_h - s_h = 0
    const int row = p.AddRow(RowSense::kEqual, 0.0);
    ix.balance_row[h] = row;
    if (h > 0) {
      p.AddCoefficient(row, ix.s[h - 1], 1.0);
    } else if (inst.grid.cyclic && n > 1) {
      p.AddCoefficient(row, ix.s[n - 1], 1.0);
    }
    p.AddCoefficient(row, ix.r[h], 1.0);
    // n == 1 cyclic: s_0 = s_0 + r_0, i.e. the s coefficient cancels.
    if (!(inst.grid.cyclic && n == 1)) p.AddCoefficient(row, ix.s[h], -1.0);
  }
  for (int h = 0; h < n; ++h) {
    ix.charge_row[h] = p.AddRow(RowSense::kGreaterEqual, 0.0);
    p.AddCoefficient(ix.charge_row[h], ix.t, 1.0);
    p.AddCoefficient(ix.charge_row[h], ix.r[h], -1.0);
    ix.discharge_row[h] = p.AddRow(RowSense::kGreaterEqual, 0.0);
    p.AddCoefficient(ix.discharge_row[h], ix.t, 1.0);
    p.AddCoefficient(ix.discharge_row[h], ix.r[h], 1.0);
    ix.room_row[h] = p.AddRow(RowSense::kGreaterEqual, 0.0);
    p.AddCoefficient(ix.room_row[h], ix.u, 1.0);
    p.AddCoefficient(ix.room_row[h], ix.s[h], -1.0);
  }
  return p;
}


SolveResult Extract(const SystemInstance& inst, const CoreIndex& ix, const lp::Solution& sol,
                    bool with_storage) {
  const int n = ix.n;
  const int m = ix.m;
  SolveResult res;
  res.cyclic = inst.grid.cyclic;
  res.x.resize(m, n);
  res.rho.resize(m, n);
  res.z.resize(m);
  for (int g = 0; g < m; ++g) {
    res.z[g] = sol.x[ix.z[g]];
    for (int h = 0; h < n; ++h) {
      res.x(g, h) = sol.x[ix.x[g * n + h]];
      res.rho(g, h) = sol.row_duals[ix.cap_row[g * n + h]];
    }
  }
  res.lambda.resize(n);
  for (int h = 0; h < n; ++h) res.lambda[h] = sol.row_duals[ix.demand_row[h]];
  res.r = Eigen::VectorXd::Zero(n);
  res.s = Eigen::VectorXd::Zero(n);
  res.omega = Eigen::VectorXd::Zero(n);
  res.delta_c = Eigen::VectorXd::Zero(n);
  res.delta_d = Eigen::VectorXd::Zero(n);
  res.tau = Eigen::VectorXd::Zero(n);
  if (with_storage) {
    res.t = sol.x[ix.t];
    res.u = sol.x[ix.u];
    for (int h = 0; h < n; ++h) {
      res.r[h] = sol.x[ix.r[h]];
      res.s[h] = sol.x[ix.s[h]];
      res.omega[h] = sol.row_duals[ix.balance_row[h]];
      res.delta_c[h] = sol.row_duals[ix.charge_row[h]];
      res.delta_d[h] = sol.row_duals[ix.discharge_row[h]];
      res.tau[h] = sol.row_duals[ix.room_row[h]];
    }
  } else {
    // Without storage the balance rows are absent; omega is the price.
    res.storage_fixed = true;
    res.omega = res.lambda;
    for (int h = 0; h < n; ++h) {
      const double next = h + 1 < n ? res.lambda[h + 1] : (res.cyclic ? res.lambda[0] : 0.0);
      res.tau[h] = std::max(0.0, next - res.lambda[h]);
    }
  }
  res.objective = sol.objective;
  res.iterations = sol.iterations;
  res.relative_gap = sol.relative_gap;
  return res;
}

SolveResult SolveImpl(const SystemInstance& inst, const SolveOptions& options, bool with_storage) {
  inst.Validate();
  detail::PrecheckSolvable(inst);
  CoreIndex ix;
  const lp::Problem problem = BuildCoreProblem(inst, with_storage, ix);
  const lp::Solver& solver = options.solver ? *options.solver : lp::DefaultSolver();
  const lp::Solution sol = solver.Solve(problem);
  detail::ThrowForStatus(sol);
  return Extract(inst, ix, sol, with_storage);
}

}  // namespace

namespace detail {

// Structural checks that let us report Infeasible/Unbounded precisely
// instead of relying on iterate divergence.
void PrecheckSolvable(const SystemInstance& inst) {
  const int n = inst.num_hours();
  auto available = [&](int h) {
    for (const auto& g : inst.generators) {
      if (g.availability[h] > 0) return true;
    }
    return false;
  };
  int first_demand = -1;
  for (int h = 0; h < n; ++h) {
    if (inst.demand[h] > 0) {
      first_demand = h;
      break;
    }
  }
  if (first_demand < 0) return;
  bool ok = false;
  const int last = inst.grid.cyclic ? n - 1 : first_demand;
  for (int h = 0; h <= last && !ok; ++h) ok = available(h);
  if (!ok) {
    throw Error(ErrorCode::kInfeasible,
                "no generator is ever available to serve demand at hour " +
                    std::to_string(first_demand));
  }
}

void ThrowForStatus(const lp::Solution& sol) {
  switch (sol.status) {
    case lp::Status::kOptimal: return;
    case lp::Status::kInfeasible:
      throw Error(ErrorCode::kInfeasible, "LP reported infeasible");
    case lp::Status::kUnbounded:
      throw Error(ErrorCode::kUnbounded, "LP reported unbounded (check for negative costs)");
    case lp::Status::kIterationLimit:
    case lp::Status::kNumericalFailure: {
      std::ostringstream os;
      os << "solver stopped (" << lp::StatusName(sol.status) << ") with primal "
         << sol.primal_infeasibility << ", dual " << sol.dual_infeasibility << ", gap "
         << sol.relative_gap;
      throw Error(ErrorCode::kNumericalFailure, os.str());
    }
  }
}

}  // namespace detail

SolveResult SolveCore(const SystemInstance& instance, const SolveOptions& options) {
  return SolveImpl(instance, options, true);
}

SolveResult SolveCoreWithoutStorage(const SystemInstance& instance, const SolveOptions& options) {
  return SolveImpl(instance, options, false);
}

void CheckDimensions(const SystemInstance& inst, const SolveResult& res) {
  const int n = inst.num_hours();
  const int m = inst.num_generators();
  auto bad = [&](const char* what) {
    throw Error(ErrorCode::kDimensionMismatch, std::string("result field '") + what +
                                                   "' does not match the instance dimensions");
  };
  if (res.x.rows() != m || res.x.cols() != n) bad("x");
  if (res.rho.rows() != m || res.rho.cols() != n) bad("rho");
  if (res.z.size() != m) bad("z");
  if (res.r.size() != n) bad("r");
  if (res.s.size() != n) bad("s");
  if (res.lambda.size() != n) bad("lambda");
  if (res.omega.size() != n) bad("omega");
  if (res.delta_c.size() != n) bad("delta_c");
  if (res.delta_d.size() != n) bad("delta_d");
  if (res.tau.size() != n) bad("tau");
}

double EvaluateObjective(const SystemInstance& inst, const SolveResult& res) {
  CheckDimensions(inst, res);
  double obj = inst.storage.door_cost * res.t + inst.storage.room_cost * res.u;
  for (int g = 0; g < inst.num_generators(); ++g) {
    obj += inst.generators[g].cap_cost * res.z[g];
    obj += inst.generators[g].var_cost.dot(res.x.row(g).transpose());
  }
  return obj;
}

double KktReport::MaxMagnitude(const std::string& prefix) const {
  double worst = 0.0;
  for (const auto& v : violations) {
    if (v.condition.rfind(prefix, 0) == 0) worst = std::max(worst, v.magnitude);
  }
  return worst;
}

std::string KktReport::Summary(std::size_t max_items) const {
  std::ostringstream os;
  os << violations.size() << " violation(s)";
  for (std::size_t i = 0; i < violations.size() && i < max_items; ++i) {
    const auto& v = violations[i];
    os << "\n  " << v.condition << " hour=" << v.hour;
    if (v.generator >= 0) os << " gen=" << v.generator;
    os << " magnitude=" << v.magnitude;
  }
  return os.str();
}

KktReport AuditKkt(const SystemInstance& inst, const SolveResult& res, double tol) {
  CheckDimensions(inst, res);
  const int n = inst.num_hours();
  const int m = inst.num_generators();
  const double qs = inst.QuantityScale();
  const double ps = inst.CostScale();
  const bool cyclic = inst.grid.cyclic;
  KktReport report;
  // `normalizer` converts the raw magnitude into normalized units.
  auto flag = [&](const char* cond, double raw, double normalizer, int hour, int gen = -1) {
    if (std::abs(raw) / normalizer > tol || !std::isfinite(raw)) {
      report.violations.push_back({cond, hour, gen, std::abs(raw)});
    }
  };
  auto prev = [&](int h) -> double {
    if (h > 0) return res.s[h - 1];
    return cyclic ? res.s[n - 1] : 0.0;
  };
  auto next_omega = [&](int h) -> double {
    if (h + 1 < n) return res.omega[h + 1];
    return cyclic ? res.omega[0] : 0.0;
  };

  // Primal feasibility.
  for (int h = 0; h < n; ++h) {
    flag("primal:demand", res.x.col(h).sum() - res.r[h] - inst.demand[h], qs, h);
    flag("primal:balance", prev(h) + res.r[h] - res.s[h], qs, h);
    flag("primal:charge", std::max(0.0, res.r[h] - res.t), qs, h);
    flag("primal:discharge", std::max(0.0, -res.r[h] - res.t), qs, h);
    flag("primal:room", std::max(0.0, res.s[h] - res.u), qs, h);
    flag("primal:s_nonneg", std::min(0.0, res.s[h]), qs, h);
    for (int g = 0; g < m; ++g) {
      flag("primal:capacity", std::max(0.0, res.x(g, h) - inst.generators[g].availability[h] * res.z[g]),
           qs, h, g);
      flag("primal:x_nonneg", std::min(0.0, res.x(g, h)), qs, h, g);
    }
  }
  for (int g = 0; g < m; ++g) flag("primal:z_nonneg", std::min(0.0, res.z[g]), qs, -1, g);
  flag("primal:t_nonneg", std::min(0.0, res.t), qs, -1);
  flag("primal:u_nonneg", std::min(0.0, res.u), qs, -1);

  // Dual sign feasibility.
  for (int h = 0; h < n; ++h) {
    flag("dual:delta_c", std::min(0.0, res.delta_c[h]), ps, h);
    flag("dual:delta_d", std::min(0.0, res.delta_d[h]), ps, h);
    flag("dual:tau", std::min(0.0, res.tau[h]), ps, h);
    for (int g = 0; g < m; ++g) flag("dual:rho", std::min(0.0, res.rho(g, h)), ps, h, g);
  }

  // Complementary slackness on inequality rows.
  const double cs_scale = qs * ps;
  for (int h = 0; h < n; ++h) {
    flag("cs:charge", res.delta_c[h] * (res.t - res.r[h]), cs_scale, h);
    flag("cs:discharge", res.delta_d[h] * (res.t + res.r[h]), cs_scale, h);
    flag("cs:room", res.tau[h] * (res.u - res.s[h]), cs_scale, h);
    for (int g = 0; g < m; ++g) {
      const double slack = inst.generators[g].availability[h] * res.z[g] - res.x(g, h);
      flag("cs:capacity", res.rho(g, h) * slack, cs_scale, h, g);
    }
  }

  // Stationarity. For nonnegative variables the implied bound multiplier
  // (reduced cost) must be >= 0 and complementary to the variable.
  auto bound_pair = [&](const char* dual_cond, const char* cs_cond, double reduced, double value,
                        double value_scale, double reduced_scale, int hour, int gen) {
    flag(dual_cond, std::min(0.0, reduced), reduced_scale, hour, gen);
    flag(cs_cond, reduced * value, value_scale * reduced_scale, hour, gen);
  };
  for (int g = 0; g < m; ++g) {
    const auto& gen = inst.generators[g];
    double zred = gen.cap_cost;
    for (int h = 0; h < n; ++h) {
      const double xred = gen.var_cost[h] - res.lambda[h] + res.rho(g, h);
      bound_pair("stationarity:x", "cs:x_bound", xred, res.x(g, h), qs, ps, h, g);
      zred -= gen.availability[h] * res.rho(g, h);
    }
    bound_pair("stationarity:z", "cs:z_bound", zred, res.z[g], qs, ps, -1, g);
  }
  const double tred = inst.storage.door_cost - res.delta_c.sum() - res.delta_d.sum();
  const double ured = inst.storage.room_cost - res.tau.sum();
  const double door_scale = std::max(ps, inst.storage.door_cost);
  const double room_scale = std::max(ps, inst.storage.room_cost);
  if (res.storage_fixed) {
    // t and u are pinned at zero; their bound multipliers are free.
    flag("primal:t_fixed", res.t, qs, -1);
    flag("primal:u_fixed", res.u, qs, -1);
  } else {
    bound_pair("stationarity:t", "cs:t_bound", tred, res.t, qs, door_scale, -1, -1);
    bound_pair("stationarity:u", "cs:u_bound", ured, res.u, qs, room_scale, -1, -1);
  }
  for (int h = 0; h < n; ++h) {
    flag("stationarity:r", res.lambda[h] - res.omega[h] + res.delta_c[h] - res.delta_d[h], ps, h);
    const double sred = res.omega[h] - next_omega(h) + res.tau[h];
    bound_pair("stationarity:s", "cs:s_bound", sred, res.s[h], qs, ps, h, -1);
  }
  return report;
}

}  // namespace storeplan
