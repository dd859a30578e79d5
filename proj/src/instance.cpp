#include "storeplan/instance.hpp"

#include <algorithm>
#include <cmath>

#include "storeplan/error.hpp"

namespace storeplan {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "InvalidInput";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kInfeasible: return "Infeasible";
    case ErrorCode::kUnbounded: return "Unbounded";
    case ErrorCode::kNumericalFailure: return "NumericalFailure";
    case ErrorCode::kIndivisibleHorizon: return "IndivisibleHorizon";
    case ErrorCode::kKTooLarge: return "KTooLarge";
    case ErrorCode::kEmptyCluster: return "EmptyCluster";
    case ErrorCode::kNotOptimal: return "NotOptimal";
  }
  return "Unknown";
}

void SystemInstance::Validate() const {
  const int n = grid.n_hours;
  if (n < 1) throw Error(ErrorCode::kInvalidInput, "n_hours must be >= 1");
  if (demand.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "demand length != n_hours");
  }
  for (int h = 0; h < n; ++h) {
    if (!std::isfinite(demand[h]) || demand[h] < 0) {
      throw Error(ErrorCode::kInvalidInput, "demand must be finite and >= 0");
    }
  }
  for (const auto& g : generators) {
    if (g.var_cost.size() != n || g.availability.size() != n) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "generator '" + g.name + "' vectors must have length n_hours");
    }
    if (!std::isfinite(g.cap_cost) || g.cap_cost < 0) {
      throw Error(ErrorCode::kInvalidInput,
                  "generator '" + g.name + "' cap_cost must be >= 0");
    }
    for (int h = 0; h < n; ++h) {
      if (!std::isfinite(g.var_cost[h])) {
        throw Error(ErrorCode::kInvalidInput,
                    "generator '" + g.name + "' var_cost must be finite");
      }
      const double a = g.availability[h];
      if (!(a >= 0.0 && a <= 1.0)) {
        throw Error(ErrorCode::kInvalidInput,
                    "generator '" + g.name + "' availability must lie in [0,1]");
      }
    }
  }
  if (!(storage.door_cost >= 0) || !(storage.room_cost >= 0) ||
      !std::isfinite(storage.door_cost) || !std::isfinite(storage.room_cost)) {
    throw Error(ErrorCode::kInvalidInput, "storage costs must be finite and >= 0");
  }
}

double SystemInstance::QuantityScale() const {
  double scale = 1.0;
  if (demand.size() > 0) scale = std::max(scale, demand.maxCoeff());
  return scale;
}

double SystemInstance::CostScale() const {
  double scale = 1.0;
  for (const auto& g : generators) {
    if (g.var_cost.size() > 0) scale = std::max(scale, g.var_cost.cwiseAbs().maxCoeff());
    scale = std::max(scale, g.cap_cost);
  }
  // Storage costs are excluded: a prohibitive storage price would otherwise
  // shrink every tolerance expressed in price units.
  return scale;
}

GeneratorSpec MakeGenerator(std::string name, int n_hours, double var_cost,
                            double cap_cost, const Eigen::VectorXd& availability) {
  GeneratorSpec g;
  g.name = std::move(name);
  g.var_cost = Eigen::VectorXd::Constant(n_hours, var_cost);
  g.cap_cost = cap_cost;
  g.availability = availability;
  return g;
}

}  // namespace storeplan
