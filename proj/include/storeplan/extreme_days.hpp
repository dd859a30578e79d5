#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "storeplan/instance.hpp"

namespace storeplan {

// Hourly load, wind and solar series of one region.
struct RegionSeries {
  std::string name;
  Eigen::VectorXd load;
  Eigen::VectorXd wind;
  Eigen::VectorXd solar;
};

// Daily sums per (region, series), each feature scaled to [0, 1] by its
// min/max over days; a feature with zero range maps to 0.5. Columns are
// ordered region-major: load, wind, solar.
struct CumulativeDayset {
  Eigen::MatrixXd days;  // D x 3R
  std::vector<std::string> regions;
  int num_days() const { return static_cast<int>(days.rows()); }
  int num_regions() const { return static_cast<int>(regions.size()); }
};

// Throws kIndivisibleHorizon when the length is not a whole number of
// days, kDimensionMismatch on unequal series lengths.
CumulativeDayset CumulativeDays(const std::vector<RegionSeries>& regions);

// One region built from an instance: load is demand, wind and solar are
// the mean availability of generators whose names start with "wind" and
// "solar" (zero when there are none).
RegionSeries RegionFromInstance(const SystemInstance& instance);

struct CoverVertex {
  int region = 0;
  Eigen::Vector3d corner;   // (load, wind, solar) in {0, 1}^3
  int assigned_day = -1;    // nearest chosen day
  double distance = 0.0;
  bool uncoverable = false; // no day within radius; assigned its nearest day
};

struct VertexCover {
  std::vector<CoverVertex> vertices;
  double radius = 0.0;
  std::vector<int> chosen_days;  // ascending
  int num_uncoverable() const;
};

// Greedy cover of the 8 cube corners of every region. A vertex is met by
// any day within radius of it (Euclidean over that region's features);
// vertices with no such day must be met by their nearest day. Days are
// picked by most unmet vertices, ties to the lowest index. Throws
// kInvalidInput when radius <= 0.
VertexCover SelectExtremeDays(const CumulativeDayset& cds, double radius);

}  // namespace storeplan
