#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "storeplan/agg_model.hpp"
#include "storeplan/aggregation.hpp"
#include "storeplan/model_core.hpp"

namespace storeplan {

// Tolerance for the dual identities: 1e-5 * max(1, c^u, c^t).
double IdentityTolerance(const StorageSpec& storage);

// A span between consecutive zero state-of-charge hours. start and end are
// hour indices on the original clock (start may exceed end when the cycle
// wraps the horizon). value = omega[end] - omega[start].
struct Cycle {
  int start = 0;
  int end = 0;
  double value = 0.0;
};

struct CycleDecomposition {
  std::vector<Cycle> cycles;
  bool no_zero_soc = false;  // no empty hour found; the whole horizon is one cycle
  double value_sum = 0.0;
};

struct IdentityCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool asserted = false;  // false when the identity's precondition does not hold
  bool holds = true;
};

struct ValueReport {
  double room_rent_sum = 0.0;       // sum tau
  double door_rent_sum = 0.0;       // sum (delta_c + delta_d)
  double omega_pos_diff_sum = 0.0;  // sum (omega_{h+1} - omega_h)^+
  std::vector<IdentityCheck> checks;
  CycleDecomposition cycles;
  double energy_value = 0.0;
  double capacity_value = 0.0;
  Eigen::VectorXd scarcity_premium;  // gamma* per hour
  std::vector<int> undispatched_hours;  // hours where gamma* used the fallback anchor
};

struct ValuationOptions {
  // Audit the result first and refuse (kNotOptimal) if it fails. Disable to
  // value expanded solutions of lossy aggregations.
  bool require_kkt = true;
  // Throw kNotOptimal when an asserted identity fails.
  bool enforce_identities = true;
};

// Rent sums and the marginal value identities for room and door.
ValueReport MarginalValues(const SolveResult& result, const SystemInstance& instance,
                           const ValuationOptions& options = {});

// Splits the horizon at empty-storage hours. Requires a cyclic result;
// throws kInvalidInput otherwise.
CycleDecomposition DecomposeCycles(const SolveResult& result);

struct OmegaPriceRecord {
  int hour = 0;
  double omega = 0.0;
  double lambda = 0.0;
  double delta_c = 0.0;
  double delta_d = 0.0;
  bool active = false;  // |r_h| > feasibility tolerance
  double residual = 0.0;  // omega - (lambda + delta_c - delta_d)
};

// Records the storage price against the grid price hour by hour and checks
// omega = lambda + delta_c - delta_d on active hours.
std::vector<OmegaPriceRecord> OmegaPriceRelation(const SolveResult& result,
                                                 const SystemInstance& instance,
                                                 const ValuationOptions& options = {});

struct ValueSplit {
  double energy_value = 0.0;
  double capacity_value = 0.0;
  Eigen::VectorXd scarcity_premium;
  std::vector<int> undispatched_hours;
};

// gamma*_h = min over dispatched generators of (lambda_h - c^x_{g,h}); hours
// with no dispatch use the dearest generator that has capacity. Profits use
// -r so discharging earns revenue.
ValueSplit EnergyCapacitySplit(const SolveResult& result, const SystemInstance& instance,
                               const ValuationOptions& options = {});

// sum_j (sum_k Pin(k, j) omega_k - omega_j)^+ for a state-level solution;
// equals c^u at an optimum with u > 0.
double AggregatedOmegaPositiveDiffSum(const AggSolveResult& result, const Aggregation& agg);

// Aggregated analogue of MarginalValues' identities (room rents, door rents,
// the generalized omega identity).
std::vector<IdentityCheck> AggregatedIdentities(const AggSolveResult& result,
                                                const Aggregation& agg,
                                                const SystemInstance& instance);

// Full report: marginal values, cycle decomposition (cyclic grids) and split.
ValueReport ValueStorage(const SolveResult& result, const SystemInstance& instance,
                         const ValuationOptions& options = {});

}  // namespace storeplan
