#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "storeplan/instance.hpp"

namespace storeplan {

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Temporal aggregation of an hourly horizon into S states.
//
// gamma maps each hour to a 0-based state index. w_s counts member hours;
// q_s is the number of consecutive hours spent per visit (so a state is
// visited w_s / q_s times). P is a forward transition matrix: P(i, j) is the
// probability that a visit to i is followed by a visit to j. On a
// non-cyclic horizon the state holding the final hour may have an empty row.
// The per-state profiles carry the data the aggregated LP is built from.
struct Aggregation {
  Eigen::VectorXi gamma;
  Eigen::VectorXd w;
  Eigen::VectorXd q;
  SparseRowMatrix P;
  Eigen::VectorXd demand;        // per state
  Eigen::MatrixXd availability;  // generators x states
  Eigen::MatrixXd var_cost;      // generators x states
  bool cyclic = true;

  int num_states() const { return static_cast<int>(w.size()); }
  int num_hours() const { return static_cast<int>(gamma.size()); }

  // Type invariants; throws kInvalidInput or kDimensionMismatch.
  void Validate() const;
  void Validate(const SystemInstance& instance) const;
};

// Backward view of P used by the storage balance: Pin(j, i) is the share of
// visits to j whose predecessor is i, so s = Pin s + q .* r. Visits are
// counted as w / q.
SparseRowMatrix IncomingMatrix(const Aggregation& agg);

// Every hour its own state; P(h-1, h) = 1, wrapping when cyclic.
Aggregation AggregateIdentity(const SystemInstance& instance);

enum class DayLinkage { kIsolated, kChained };
enum class DaySelection { kKMeansMedoid, kPeakMedian };

DayLinkage ParseDayLinkage(const std::string& name);
DaySelection ParseDaySelection(const std::string& name);
std::string DayLinkageName(DayLinkage linkage);
std::string DaySelectionName(DaySelection selection);

struct RepresentativeDays {
  Aggregation aggregation;
  std::vector<int> representatives;  // chosen real days, chronological
  std::vector<int> day_cluster;      // day -> index into representatives
};

// Clusters whole days and keeps one real day per cluster. Throws
// kIndivisibleHorizon or kKTooLarge.
RepresentativeDays SelectRepresentativeDays(const SystemInstance& instance, int k_days,
                                            DayLinkage linkage, DaySelection selection);
Aggregation RepresentativeDaysAggregation(const SystemInstance& instance, int k_days,
                                          DayLinkage linkage, DaySelection selection);

// k-means over hourly (demand, availability) features with an empirical
// transition matrix between consecutive runs. Throws kKTooLarge or
// kEmptyCluster.
Aggregation SystemStates(const SystemInstance& instance, int k_states);

// Contiguous segmentation by greedy Ward merging. Throws kKTooLarge.
Aggregation AdjacentClusters(const SystemInstance& instance, int k_states);

struct LosslessViolation {
  int condition = 0;           // 1: profiles, 2: transitions, 3: run lengths
  std::vector<int> states;
  std::vector<int> hours;
  double magnitude = 0.0;
  std::string detail;
};

struct LosslessReport {
  std::vector<LosslessViolation> violations;
  bool lossless() const { return violations.empty(); }
  std::string Summary(std::size_t max_items = 10) const;
};

// Checks the sufficient conditions for the aggregated LP to reproduce the
// hourly LP. tol applies to profile differences normalized by each series'
// range over the horizon.
LosslessReport CheckLossless(const Aggregation& agg, const SystemInstance& instance,
                             double tol = 0.0);

// Heuristic lossless compressor: run-length tokens, then the coarsest token
// partition that is stable under successor and predecessor classes.
Aggregation CompressLossless(const SystemInstance& instance, double tol = 0.0);

// Lossless status of adjacent clustering at each requested k.
struct LosslessCurvePoint {
  int k = 0;
  bool lossless = false;
  int violations = 0;
};
std::vector<LosslessCurvePoint> AdjacentLosslessSweep(const SystemInstance& instance,
                                                      const std::vector<int>& ks,
                                                      double tol = 0.0);

// Smallest k for which adjacent clustering is lossless.
int AdjacentLosslessThreshold(const SystemInstance& instance, double tol = 0.0);

// Builds the per-state data and transition matrix from a state sequence:
// profiles are member means, w counts, q is the mean run length and P
// counts run-to-run changes (states without an outgoing change self-loop).
Aggregation AggregationFromAssignment(const SystemInstance& instance,
                                      const Eigen::VectorXi& gamma, int num_states);

}  // namespace storeplan
