#include "storeplan/agg_model.hpp"

#include <cmath>

#include "core_internal.hpp"
#include "storeplan/error.hpp"

namespace storeplan {

AggSolveResult SolveAggregated(const SystemInstance& inst, const Aggregation& agg,
                               const SolveOptions& options) {
  using lp::RowSense;
  inst.Validate();
  agg.Validate(inst);
  detail::PrecheckSolvable(inst);
  const int S = agg.num_states();
  const int m = inst.num_generators();
  const SparseRowMatrix pin = IncomingMatrix(agg);

  lp::Problem p;
  std::vector<int> x(static_cast<std::size_t>(m) * S), z(m), r(S), s(S);
  for (int g = 0; g < m; ++g) {
    for (int k = 0; k < S; ++k) x[g * S + k] = p.AddVariable(agg.w[k] * agg.var_cost(g, k));
  }
  for (int g = 0; g < m; ++g) z[g] = p.AddVariable(inst.generators[g].cap_cost);
  const int t = p.AddVariable(inst.storage.door_cost);
  const int u = p.AddVariable(inst.storage.room_cost);
  for (int k = 0; k < S; ++k) r[k] = p.AddVariable(0.0, /*nonnegative=*/false);
  for (int k = 0; k < S; ++k) s[k] = p.AddVariable(0.0);

  std::vector<int> demand_row(S), cap_row(static_cast<std::size_t>(m) * S), balance_row(S),
      charge_row(S), discharge_row(S), room_row(S);
  for (int k = 0; k < S; ++k) {
    demand_row[k] = p.AddRow(RowSense::kEqual, agg.demand[k]);
    for (int g = 0; g < m; ++g) p.AddCoefficient(demand_row[k], x[g * S + k], 1.0);
    p.AddCoefficient(demand_row[k], r[k], -1.0);
  }
  for (int g = 0; g < m; ++g) {
    for (int k = 0; k < S; ++k) {
      const int row = p.AddRow(RowSense::kGreaterEqual, 0.0);
      cap_row[g * S + k] = row;
      p.AddCoefficient(row, z[g], agg.availability(g, k));
      p.AddCoefficient(row, x[g * S + k], -1.0);
    }
  }
  for (int k = 0; k < S; ++k) {
    // Pin s + q r - s = 0, with the diagonal folded into one coefficient.
    const int row = p.AddRow(RowSense::kEqual, 0.0);
    balance_row[k] = row;
    double diag = -1.0;
    for (SparseRowMatrix::InnerIterator it(pin, k); it; ++it) {
      if (it.col() == k) {
        diag += it.value();
      } else {
        p.AddCoefficient(row, s[it.col()], it.value());
      }
    }
    if (std::abs(diag) > 1e-15) p.AddCoefficient(row, s[k], diag);
    p.AddCoefficient(row, r[k], agg.q[k]);
  }
  for (int k = 0; k < S; ++k) {
    charge_row[k] = p.AddRow(RowSense::kGreaterEqual, 0.0);
    p.AddCoefficient(charge_row[k], t, 1.0);
    p.AddCoefficient(charge_row[k], r[k], -1.0);
    discharge_row[k] = p.AddRow(RowSense::kGreaterEqual, 0.0);
    p.AddCoefficient(discharge_row[k], t, 1.0);
    p.AddCoefficient(discharge_row[k], r[k], 1.0);
    room_row[k] = p.AddRow(RowSense::kGreaterEqual, 0.0);
    p.AddCoefficient(room_row[k], u, 1.0);
    p.AddCoefficient(room_row[k], s[k], -1.0);
  }

  const lp::Solver& solver = options.solver ? *options.solver : lp::DefaultSolver();
  const lp::Solution sol = solver.Solve(p);
  detail::ThrowForStatus(sol);

  AggSolveResult res;
  res.cyclic = agg.cyclic;
  res.x.resize(m, S);
  res.rho.resize(m, S);
  res.z.resize(m);
  for (int g = 0; g < m; ++g) {
    res.z[g] = sol.x[z[g]];
    for (int k = 0; k < S; ++k) {
      res.x(g, k) = sol.x[x[g * S + k]];
      res.rho(g, k) = sol.row_duals[cap_row[g * S + k]];
    }
  }
  res.t = sol.x[t];
  res.u = sol.x[u];
  res.r.resize(S);
  res.s.resize(S);
  res.lambda.resize(S);
  res.omega.resize(S);
  res.delta_c.resize(S);
  res.delta_d.resize(S);
  res.tau.resize(S);
  for (int k = 0; k < S; ++k) {
    res.r[k] = sol.x[r[k]];
    res.s[k] = sol.x[s[k]];
    res.lambda[k] = sol.row_duals[demand_row[k]];
    res.omega[k] = sol.row_duals[balance_row[k]];
    res.delta_c[k] = sol.row_duals[charge_row[k]];
    res.delta_d[k] = sol.row_duals[discharge_row[k]];
    res.tau[k] = sol.row_duals[room_row[k]];
  }
  res.objective = sol.objective;
  res.iterations = sol.iterations;
  res.relative_gap = sol.relative_gap;
  return res;
}

SolveResult ExpandSolution(const AggSolveResult& ar, const Aggregation& agg) {
  agg.Validate();
  const int S = agg.num_states();
  const int n = agg.num_hours();
  const int m = static_cast<int>(ar.z.size());
  if (ar.r.size() != S || ar.s.size() != S || ar.x.cols() != S || ar.x.rows() != m ||
      ar.rho.cols() != S || ar.lambda.size() != S || ar.omega.size() != S ||
      ar.tau.size() != S || ar.delta_c.size() != S || ar.delta_d.size() != S ||
      agg.availability.rows() != m) {
    throw Error(ErrorCode::kDimensionMismatch, "aggregated result does not match aggregation");
  }
  SolveResult out;
  out.cyclic = agg.cyclic;
  out.z = ar.z;
  out.t = ar.t;
  out.u = ar.u;
  out.objective = ar.objective;
  out.iterations = ar.iterations;
  out.relative_gap = ar.relative_gap;
  out.x.resize(m, n);
  out.rho.resize(m, n);
  out.r.resize(n);
  out.lambda.resize(n);
  out.omega.resize(n);
  out.delta_c.resize(n);
  out.delta_d.resize(n);
  out.tau = Eigen::VectorXd::Zero(n);
  const Eigen::VectorXd visits = agg.w.cwiseQuotient(agg.q);
  auto next_hour = [&](int h) { return h + 1 < n ? h + 1 : (agg.cyclic ? 0 : -1); };
  auto visit_end = [&](int h) {
    const int nh = next_hour(h);
    return nh < 0 || agg.gamma[nh] != agg.gamma[h];
  };
  for (int h = 0; h < n; ++h) {
    const int k = agg.gamma[h];
    const double w = agg.w[k];
    out.x.col(h) = ar.x.col(k);
    out.rho.col(h) = ar.rho.col(k) / w;
    out.r[h] = ar.r[k];
    out.lambda[h] = ar.lambda[k] / w;
    out.delta_c[h] = ar.delta_c[k] / w;
    out.delta_d[h] = ar.delta_d[k] / w;
    out.omega[h] = ar.omega[k] / visits[k];
    if (visit_end(h)) out.tau[h] = ar.tau[k] / visits[k];
  }

  out.s.resize(n);
  if (!agg.cyclic) {
    double level = 0.0;
    for (int h = 0; h < n; ++h) {
      level += out.r[h];
      out.s[h] = level;
    }
  } else {
    int anchor = n - 1;
    for (int h = 0; h < n; ++h) {
      if (visit_end(h)) {
        anchor = h;
        break;
      }
    }
    out.s[anchor] = ar.s[agg.gamma[anchor]];
    for (int i = 1; i < n; ++i) {
      const int h = (anchor + i) % n;
      out.s[h] = out.s[(h + n - 1) % n] + out.r[h];
    }
  }
  return out;
}

}  // namespace storeplan
