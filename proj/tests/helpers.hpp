#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "storeplan/instance.hpp"

namespace testing {

inline storeplan::SystemInstance TwoGeneratorPeaky() {
  using storeplan::MakeGenerator;
  storeplan::SystemInstance inst;
  inst.grid = {4, true};
  inst.demand = Eigen::Vector4d(1, 4, 1, 4);
  const Eigen::VectorXd a = Eigen::VectorXd::Ones(4);
  inst.generators = {MakeGenerator("base", 4, 1.0, 5.0, a), MakeGenerator("peak", 4, 10.0, 1.0, a)};
  inst.storage = {0.5, 0.5};
  return inst;
}

// Base, peaker and a solar-like unit with random data.
inline storeplan::SystemInstance RandomInstance(std::mt19937& rng, int n, bool cyclic = true) {
  using storeplan::MakeGenerator;
  std::uniform_real_distribution<double> U(0.0, 1.0);
  storeplan::SystemInstance inst;
  inst.grid = {n, cyclic};
  inst.demand = Eigen::VectorXd(n);
  for (int h = 0; h < n; ++h) inst.demand[h] = 0.5 + U(rng);
  Eigen::VectorXd solar(n);
  for (int h = 0; h < n; ++h) solar[h] = U(rng) < 0.5 ? U(rng) : 0.0;
  inst.generators = {
      MakeGenerator("base", n, 1.0 + U(rng), 4.0 + 4.0 * U(rng), Eigen::VectorXd::Ones(n)),
      MakeGenerator("peak", n, 8.0 + 4 * U(rng), 0.5 + U(rng), Eigen::VectorXd::Ones(n)),
      MakeGenerator("solar", n, 0.0, 1.0 + 2 * U(rng), solar)};
  inst.storage = {0.2 + U(rng), 0.2 + U(rng)};
  return inst;
}

// Days built from 24-hour demand/solar templates, repeated in the given
// order. A baseload unit and a solar unit with fixed costs.
inline storeplan::SystemInstance FromDays(const std::vector<std::vector<double>>& demand_days,
                                          const std::vector<std::vector<double>>& solar_days,
                                          const std::vector<int>& order, bool cyclic = true) {
  using storeplan::MakeGenerator;
  const int n = static_cast<int>(order.size()) * 24;
  storeplan::SystemInstance inst;
  inst.grid = {n, cyclic};
  inst.demand.resize(n);
  Eigen::VectorXd solar(n);
  for (int d = 0; d < static_cast<int>(order.size()); ++d) {
    for (int h = 0; h < 24; ++h) {
      inst.demand[d * 24 + h] = demand_days[order[d]][h];
      solar[d * 24 + h] = solar_days[order[d]][h];
    }
  }
  inst.generators = {MakeGenerator("base", n, 2.0, 6.0, Eigen::VectorXd::Ones(n)),
                     MakeGenerator("peak", n, 12.0, 1.0, Eigen::VectorXd::Ones(n)),
                     MakeGenerator("solar", n, 0.0, 2.5, solar)};
  inst.storage = {0.4, 0.3};
  return inst;
}

// A day template with 24 distinct demand levels and a solar bump.
inline void DayTemplate(double scale, double phase, std::vector<double>& demand,
                        std::vector<double>& solar) {
  demand.resize(24);
  solar.resize(24);
  for (int h = 0; h < 24; ++h) {
    demand[h] = scale * (1.0 + 0.4 * std::sin(2 * 3.14159265358979 * (h + phase) / 24.0)) +
                0.001 * h;
    const double x = (h - 12.0) / 5.0;
    solar[h] = h >= 6 && h <= 18 ? std::max(0.0, 1.0 - x * x) : 0.0;
  }
}

}  // namespace testing
