#pragma once

#include "storeplan/aggregation.hpp"
#include "storeplan/model_core.hpp"

namespace storeplan {

// Solution of the aggregated LP. Fields keep their SolveResult meaning but
// are indexed by state: x is generators x states, r and s are per-state net
// charge and end-of-visit state of charge, and every dual is the multiplier
// of the corresponding state-level row (so demand duals are totals over the
// w_s represented hours).
struct AggSolveResult : SolveResult {
  int num_states() const { return static_cast<int>(r.size()); }
};

// Solves
//   min  c^z z + c^t t + c^u u + sum_s w_s sum_g c^x_{g,s} x_{g,s}
//   s.t. sum_g x_{g,s} - r_s = d_s,  x_{g,s} <= a_{g,s} z_g,
//        s = Pin s + q .* r,  |r_s| <= t,  s_s <= u.
// Throws kInfeasible, kUnbounded or kNumericalFailure.
AggSolveResult SolveAggregated(const SystemInstance& instance, const Aggregation& agg,
                               const SolveOptions& options = {});

// Maps a state-level solution back to hours. Flows and capacities are
// copied; prices are divided by state weights to be per hour; the state of
// charge is rebuilt by accumulating r forward from a visit end. The result
// need not be feasible for the hourly LP when the aggregation is lossy.
SolveResult ExpandSolution(const AggSolveResult& result, const Aggregation& agg);

}  // namespace storeplan
