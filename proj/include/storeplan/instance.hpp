#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace storeplan {

struct TimeGrid {
  int n_hours = 1;
  // When true the storage balance wraps: the level before hour 0 is the
  // level at the end of the last hour. Otherwise storage starts empty.
  bool cyclic = true;
};

struct GeneratorSpec {
  std::string name;
  Eigen::VectorXd var_cost;      // currency/MWh per hour
  double cap_cost = 0.0;         // currency/MW installed
  Eigen::VectorXd availability;  // fraction of installed capacity per hour
};

struct StorageSpec {
  double door_cost = 0.0;  // power capacity, currency/MW
  double room_cost = 0.0;  // energy capacity, currency/MWh
};

struct SystemInstance {
  TimeGrid grid;
  Eigen::VectorXd demand;
  std::vector<GeneratorSpec> generators;
  StorageSpec storage;

  int num_hours() const { return grid.n_hours; }
  int num_generators() const { return static_cast<int>(generators.size()); }

  // Throws Error(kInvalidInput / kDimensionMismatch) on any broken invariant.
  void Validate() const;

  // Largest demand (at least 1); the quantity unit used for tolerances.
  double QuantityScale() const;
  // Largest cost coefficient in the instance (at least 1); the price unit
  // used for tolerances.
  double CostScale() const;
};

// Builds a generator with a constant variable cost.
GeneratorSpec MakeGenerator(std::string name, int n_hours, double var_cost,
                            double cap_cost, const Eigen::VectorXd& availability);

}  // namespace storeplan
