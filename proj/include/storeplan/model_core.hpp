#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "storeplan/instance.hpp"
#include "storeplan/lp.hpp"

namespace storeplan {

// Tolerances shared by solves and audits; expressed in normalized units
// (quantities divided by SystemInstance::QuantityScale, prices by CostScale).
inline constexpr double kFeasibilityTol = 1e-6;
inline constexpr double kKktTol = 1e-6;
inline constexpr double kGapTol = 1e-8;

// Hourly primal/dual solution of the planning LP.
//
// Sign conventions: r > 0 is charging (storage draws from the grid), so the
// demand balance reads sum_g x_g - r = d. Duals are marginal costs: lambda is
// the hourly price, omega the value of one stored MWh at the end of an hour,
// rho/delta_c/delta_d/tau the nonnegative rents on generator capacity,
// charge limit (r <= t), discharge limit (-r <= t) and energy capacity.
struct SolveResult {
  Eigen::MatrixXd x;    // generators x hours
  Eigen::VectorXd z;    // installed generator capacity
  double t = 0.0;       // storage power capacity ("door")
  double u = 0.0;       // storage energy capacity ("room")
  Eigen::VectorXd r;    // net charge
  Eigen::VectorXd s;    // state of charge at the end of each hour

  Eigen::VectorXd lambda;
  Eigen::MatrixXd rho;  // generators x hours
  Eigen::VectorXd omega;
  Eigen::VectorXd delta_c;
  Eigen::VectorXd delta_d;
  Eigen::VectorXd tau;

  double objective = 0.0;
  bool cyclic = true;
  // Set for solves with t = u = 0 imposed (storage removed).
  bool storage_fixed = false;

  // Solver diagnostics (zero for results not produced by a solve).
  int iterations = 0;
  double relative_gap = 0.0;

  int num_hours() const { return static_cast<int>(r.size()); }
  int num_generators() const { return static_cast<int>(z.size()); }
};

struct SolveOptions {
  // Defaults to lp::DefaultSolver() when null.
  const lp::Solver* solver = nullptr;
};

// Solves the full-resolution planning LP. Throws Error with kInfeasible,
// kUnbounded or kNumericalFailure.
SolveResult SolveCore(const SystemInstance& instance, const SolveOptions& options = {});

// Same LP with storage removed (t = u = 0 forced).
SolveResult SolveCoreWithoutStorage(const SystemInstance& instance,
                                    const SolveOptions& options = {});

// Objective of a primal solution evaluated from scratch.
double EvaluateObjective(const SystemInstance& instance, const SolveResult& result);

struct KktViolation {
  std::string condition;  // e.g. "primal:balance", "dual:tau", "cs:room"
  int hour = -1;
  int generator = -1;
  double magnitude = 0.0;  // raw (unnormalized) size of the violation
};

struct KktReport {
  std::vector<KktViolation> violations;
  bool ok() const { return violations.empty(); }
  // Largest magnitude among violations whose condition starts with prefix.
  double MaxMagnitude(const std::string& prefix = "") const;
  std::string Summary(std::size_t max_items = 10) const;
};

// Checks primal feasibility, dual sign feasibility, complementary slackness
// and Lagrangian stationarity for every constraint and variable. Throws
// kDimensionMismatch when result does not match instance.
KktReport AuditKkt(const SystemInstance& instance, const SolveResult& result,
                   double tol = kKktTol);

// Verifies consistent dimensions; used by every consumer of a SolveResult.
void CheckDimensions(const SystemInstance& instance, const SolveResult& result);

}  // namespace storeplan
