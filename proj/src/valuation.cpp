#include "storeplan/valuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "storeplan/error.hpp"

namespace storeplan {

namespace {

void RequireOptimal(const SolveResult& res, const SystemInstance& inst,
                    const ValuationOptions& options) {
  CheckDimensions(inst, res);
  if (!options.require_kkt) return;
  const KktReport rep = AuditKkt(inst, res);
  if (!rep.ok()) throw Error(ErrorCode::kNotOptimal, "result fails its KKT audit: " + rep.Summary(3));
}

double NextOmega(const SolveResult& res, int h) {
  const int n = res.num_hours();
  if (h + 1 < n) return res.omega[h + 1];
  return res.cyclic ? res.omega[0] : 0.0;
}

IdentityCheck Check(std::string name, double lhs, double rhs, bool asserted, double tol) {
  IdentityCheck c{std::move(name), lhs, rhs, asserted, true};
  if (asserted) c.holds = std::abs(lhs - rhs) <= tol;
  return c;
}

void Enforce(const std::vector<IdentityCheck>& checks, const ValuationOptions& options) {
  if (!options.enforce_identities) return;
  for (const auto& c : checks) {
    if (c.asserted && !c.holds) {
      throw Error(ErrorCode::kNotOptimal, "identity '" + c.name + "' fails: " +
                                              std::to_string(c.lhs) + " vs " +
                                              std::to_string(c.rhs));
    }
  }
}

// Capacity is "deployed" when it exceeds the feasibility tolerance.
bool Deployed(double v, const SystemInstance& inst) {
  return v > kFeasibilityTol * inst.QuantityScale();
}

}  // namespace

double IdentityTolerance(const StorageSpec& storage) {
  return 1e-5 * std::max({1.0, storage.room_cost, storage.door_cost});
}

ValueReport MarginalValues(const SolveResult& res, const SystemInstance& inst,
                           const ValuationOptions& options) {
  RequireOptimal(res, inst, options);
  ValueReport rep;
  const int n = res.num_hours();
  rep.room_rent_sum = res.tau.sum();
  rep.door_rent_sum = res.delta_c.sum() + res.delta_d.sum();
  for (int h = 0; h < n; ++h) {
    rep.omega_pos_diff_sum += std::max(0.0, NextOmega(res, h) - res.omega[h]);
  }
  const double tol = IdentityTolerance(inst.storage);
  const bool room = Deployed(res.u, inst) && !res.storage_fixed;
  const bool door = Deployed(res.t, inst) && !res.storage_fixed;
  rep.checks.push_back(Check("room_rents", rep.room_rent_sum, inst.storage.room_cost, room, tol));
  rep.checks.push_back(Check("door_rents", rep.door_rent_sum, inst.storage.door_cost, door, tol));
  rep.checks.push_back(
      Check("omega_pos_diff", rep.omega_pos_diff_sum, inst.storage.room_cost, room, tol));
  Enforce(rep.checks, options);
  return rep;
}

CycleDecomposition DecomposeCycles(const SolveResult& res) {
  if (!res.cyclic) throw Error(ErrorCode::kInvalidInput, "cycle decomposition needs a cyclic grid");
  CycleDecomposition out;
  const int n = res.num_hours();
  const double zero_tol = kFeasibilityTol * std::max(1.0, res.u);
  if (!(res.u > zero_tol)) return out;
  std::vector<int> zeros;
  for (int h = 0; h < n; ++h) {
    if (res.s[h] <= zero_tol) zeros.push_back(h);
  }
  if (zeros.empty()) {
    out.no_zero_soc = true;
    out.cycles.push_back({0, n - 1, res.omega[n - 1] - res.omega[0]});
    out.value_sum = out.cycles.back().value;
    return out;
  }
  // Walk the zero hours in rotated order; each gap between two of them is
  // a cycle running from the hour after the first to the second.
  const int nz = static_cast<int>(zeros.size());
  for (int i = 0; i < nz; ++i) {
    const int from = zeros[i];
    const int to = zeros[(i + 1) % nz];
    const int a = (from + 1) % n;
    const int span = ((to - from) % n + n) % n;  // hours from `from` to `to`
    if (span <= 1 && !(nz == 1 && n > 1)) continue;
    out.cycles.push_back({a, to, res.omega[to] - res.omega[a]});
    out.value_sum += out.cycles.back().value;
  }
  return out;
}

std::vector<OmegaPriceRecord> OmegaPriceRelation(const SolveResult& res,
                                                 const SystemInstance& inst,
                                                 const ValuationOptions& options) {
  RequireOptimal(res, inst, options);
  const int n = res.num_hours();
  const double active_tol = kFeasibilityTol * inst.QuantityScale();
  const double tol = IdentityTolerance(inst.storage);
  std::vector<OmegaPriceRecord> out(n);
  for (int h = 0; h < n; ++h) {
    auto& rec = out[h];
    rec.hour = h;
    rec.omega = res.omega[h];
    rec.lambda = res.lambda[h];
    rec.delta_c = res.delta_c[h];
    rec.delta_d = res.delta_d[h];
    rec.active = std::abs(res.r[h]) > active_tol;
    rec.residual = rec.omega - (rec.lambda + rec.delta_c - rec.delta_d);
    if (rec.active && options.enforce_identities && std::abs(rec.residual) > tol) {
      throw Error(ErrorCode::kNotOptimal,
                  "omega differs from the local price at hour " + std::to_string(h));
    }
  }
  return out;
}

ValueSplit EnergyCapacitySplit(const SolveResult& res, const SystemInstance& inst,
                               const ValuationOptions& options) {
  RequireOptimal(res, inst, options);
  const int n = res.num_hours();
  const int m = inst.num_generators();
  const double dispatch_tol = kFeasibilityTol * inst.QuantityScale();
  ValueSplit out;
  out.scarcity_premium = Eigen::VectorXd::Zero(n);
  for (int h = 0; h < n; ++h) {
    double best = std::numeric_limits<double>::infinity();
    for (int g = 0; g < m; ++g) {
      if (res.x(g, h) > dispatch_tol) {
        best = std::min(best, res.lambda[h] - inst.generators[g].var_cost[h]);
      }
    }
    if (std::isinf(best)) {
      // Nothing runs: anchor on the dearest generator that has capacity.
      double anchor = -std::numeric_limits<double>::infinity();
      for (int g = 0; g < m; ++g) {
        if (res.z[g] > dispatch_tol) anchor = std::max(anchor, inst.generators[g].var_cost[h]);
      }
      best = std::isinf(anchor) ? 0.0 : res.lambda[h] - anchor;
      out.undispatched_hours.push_back(h);
    }
    out.scarcity_premium[h] = std::max(0.0, best);
  }
  const Eigen::VectorXd energy_price = res.lambda - out.scarcity_premium;
  out.energy_value = -res.r.dot(energy_price);
  out.capacity_value = -res.r.dot(out.scarcity_premium);
  return out;
}

double AggregatedOmegaPositiveDiffSum(const AggSolveResult& res, const Aggregation& agg) {
  const SparseRowMatrix pin = IncomingMatrix(agg);
  const int S = agg.num_states();
  if (res.omega.size() != S) {
    throw Error(ErrorCode::kDimensionMismatch, "result does not match aggregation");
  }
  Eigen::VectorXd successor = Eigen::VectorXd::Zero(S);
  for (int k = 0; k < S; ++k) {
    for (SparseRowMatrix::InnerIterator it(pin, k); it; ++it) {
      successor[it.col()] += it.value() * res.omega[k];
    }
  }
  double sum = 0.0;
  for (int j = 0; j < S; ++j) sum += std::max(0.0, successor[j] - res.omega[j]);
  return sum;
}

std::vector<IdentityCheck> AggregatedIdentities(const AggSolveResult& res,
                                                const Aggregation& agg,
                                                const SystemInstance& inst) {
  const double tol = IdentityTolerance(inst.storage);
  const bool room = Deployed(res.u, inst);
  const bool door = Deployed(res.t, inst);
  return {
      Check("room_rents", res.tau.sum(), inst.storage.room_cost, room, tol),
      Check("door_rents", res.delta_c.sum() + res.delta_d.sum(), inst.storage.door_cost, door,
            tol),
      Check("omega_pos_diff", AggregatedOmegaPositiveDiffSum(res, agg), inst.storage.room_cost,
            room, tol),
  };
}

ValueReport ValueStorage(const SolveResult& res, const SystemInstance& inst,
                         const ValuationOptions& options) {
  ValueReport rep = MarginalValues(res, inst, options);
  if (res.cyclic) {
    rep.cycles = DecomposeCycles(res);
    const bool room = Deployed(res.u, inst) && !res.storage_fixed;
    rep.checks.push_back(Check("cycle_sum", rep.cycles.value_sum, inst.storage.room_cost,
                               room && !rep.cycles.no_zero_soc,
                               IdentityTolerance(inst.storage)));
    Enforce(rep.checks, options);
  }
  ValuationOptions inner = options;
  inner.require_kkt = false;  // already audited above
  const ValueSplit split = EnergyCapacitySplit(res, inst, inner);
  rep.energy_value = split.energy_value;
  rep.capacity_value = split.capacity_value;
  rep.scarcity_premium = split.scarcity_premium;
  rep.undispatched_hours = split.undispatched_hours;
  return rep;
}

}  // namespace storeplan
