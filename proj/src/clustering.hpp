#pragma once

// Internal helpers shared by the aggregation strategies.

#include <vector>

#include <Eigen/Core>

#include "storeplan/instance.hpp"

namespace storeplan::detail {

// Hourly feature rows [demand, availability_1..m], each column scaled to
// [0, 1] by its min/max over the horizon (constant columns become 0).
Eigen::MatrixXd HourFeatures(const SystemInstance& instance);

// Range (max - min) of every series: demand, then availabilities, then
// variable costs. Used to normalize profile comparisons.
Eigen::VectorXd SeriesRanges(const SystemInstance& instance);

// Hour h's raw data laid out like SeriesRanges.
Eigen::VectorXd HourProfile(const SystemInstance& instance, int h);

struct KMeansResult {
  std::vector<int> labels;
  Eigen::MatrixXd centroids;  // k x dims
};

// Lloyd's algorithm on the rows of `points` with farthest-point seeding
// starting at row `seed`. Empty clusters are re-seeded from the point
// farthest from its centroid; throws kEmptyCluster when the data has fewer
// distinct points than k.
KMeansResult KMeans(const Eigen::MatrixXd& points, int k, int seed = 0, int max_iters = 100);

struct Run {
  int start = 0;  // first hour (may wrap past n - 1 on cyclic horizons)
  int length = 0;
  int state = 0;
};

// Maximal runs of equal consecutive states; on cyclic horizons a run that
// wraps from the last hour into the first is joined.
std::vector<Run> StateRuns(const Eigen::VectorXi& gamma, bool cyclic);

}  // namespace storeplan::detail
