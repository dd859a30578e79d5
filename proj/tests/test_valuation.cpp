#include "doctest.h"
#include "helpers.hpp"
#include "storeplan/error.hpp"
#include "storeplan/valuation.hpp"

#include <random>

using namespace storeplan;

namespace {

SystemInstance Daily(int days, double door_cost, double room_cost) {
  std::vector<std::vector<double>> dem(1), sol(1);
  testing::DayTemplate(1.0, 0.0, dem[0], sol[0]);
  SystemInstance inst = testing::FromDays(dem, sol, std::vector<int>(days, 0));
  inst.storage = {door_cost, room_cost};
  return inst;
}

}  // namespace

TEST_CASE("priced-out storage: sums reported, identities not asserted") {
  SystemInstance inst;
  inst.grid = {2, true};
  inst.demand = Eigen::Vector2d(1, 2);
  inst.generators = {MakeGenerator("g", 2, 1.0, 10.0, Eigen::VectorXd::Ones(2))};
  inst.storage = {1e6, 1e6};
  const ValueReport rep = ValueStorage(SolveCore(inst), inst);
  for (const auto& c : rep.checks) CHECK_FALSE(c.asserted);
  CHECK(rep.cycles.cycles.empty());
  CHECK(rep.energy_value == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(rep.capacity_value == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("constant system has no arbitrage spread") {
  SystemInstance inst;
  inst.grid = {6, true};
  inst.demand = Eigen::VectorXd::Constant(6, 2.0);
  inst.generators = {MakeGenerator("g", 6, 1.0, 3.0, Eigen::VectorXd::Ones(6))};
  inst.storage = {0.1, 0.1};
  const SolveResult res = SolveCore(inst);
  CHECK(res.u < 1e-7);
  const ValueReport rep = MarginalValues(res, inst);
  CHECK(rep.omega_pos_diff_sum < 1e-9);
  CHECK((res.omega.array() - res.omega[0]).abs().maxCoeff() < 1e-9);
}

TEST_CASE("deployed storage: rents equal costs") {
  const SystemInstance inst = testing::TwoGeneratorPeaky();
  const SolveResult res = SolveCore(inst);
  const ValueReport rep = ValueStorage(res, inst);
  CHECK(rep.room_rent_sum == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(rep.door_rent_sum == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(rep.omega_pos_diff_sum == doctest::Approx(0.5).epsilon(1e-6));
  for (const auto& c : rep.checks) {
    CHECK(c.asserted);
    CHECK_MESSAGE(c.holds, c.name);
  }
  // Tampered duals no longer pass the audit.
  SolveResult bad = res;
  bad.tau *= 2.0;
  CHECK_THROWS_WITH_AS(MarginalValues(bad, inst), doctest::Contains("NotOptimal"), Error);
}

TEST_CASE("cycle decomposition") {
  SUBCASE("single daily valley and peak") {
    const SystemInstance inst = Daily(1, 0.05, 0.05);
    const SolveResult res = SolveCore(inst);
    REQUIRE(res.u > 1e-3);
    const CycleDecomposition cd = DecomposeCycles(res);
    REQUIRE(cd.cycles.size() == 1);
    CHECK(cd.cycles[0].value ==
          doctest::Approx(res.omega.maxCoeff() - res.omega.minCoeff()).epsilon(1e-6));
    CHECK(cd.value_sum == doctest::Approx(inst.storage.room_cost).epsilon(1e-5));
    // Omega never falls while the store holds energy.
    for (int h = 0; h < 24; ++h) {
      if (res.s[h] > 1e-6) CHECK(res.omega[(h + 1) % 24] >= res.omega[h] - 1e-6);
    }
  }
  SUBCASE("two identical days give two equal cycles") {
    const SystemInstance inst = Daily(2, 0.05, 0.05);
    const SolveResult res = SolveCore(inst);
    const CycleDecomposition cd = DecomposeCycles(res);
    REQUIRE(cd.cycles.size() == 2);
    CHECK(cd.cycles[0].value == doctest::Approx(cd.cycles[1].value).epsilon(1e-6));
    CHECK(cd.value_sum == doctest::Approx(inst.storage.room_cost).epsilon(1e-5));
  }
  SUBCASE("no storage means no cycles") {
    const SystemInstance inst = Daily(1, 1e4, 1e4);
    CHECK(DecomposeCycles(SolveCore(inst)).cycles.empty());
  }
  SUBCASE("non-cyclic grids are rejected") {
    SystemInstance inst = Daily(1, 0.05, 0.05);
    inst.grid.cyclic = false;
    CHECK_THROWS_AS(DecomposeCycles(SolveCore(inst)), Error);
  }
}

TEST_CASE("omega tracks the local price") {
  // Expensive door: t is small and binds while charging.
  const SystemInstance inst = Daily(1, 2.0, 0.01);
  const SolveResult res = SolveCore(inst);
  REQUIRE(res.t > 1e-3);
  const auto recs = OmegaPriceRelation(res, inst);
  bool saw_binding = false;
  for (const auto& rec : recs) {
    if (!rec.active) continue;
    CHECK(std::abs(rec.residual) < 1e-6);
    if (rec.delta_c > 1e-6) {
      saw_binding = true;
      CHECK(rec.omega - rec.lambda == doctest::Approx(rec.delta_c).epsilon(1e-6));
    }
    if (rec.delta_c < 1e-9 && rec.delta_d < 1e-9) {
      CHECK(rec.omega == doctest::Approx(rec.lambda).epsilon(1e-6));
    }
  }
  CHECK(saw_binding);
}

TEST_CASE("energy/capacity split") {
  SUBCASE("completeness on random instances") {
    std::mt19937 rng(8);
    for (int trial = 0; trial < 5; ++trial) {
      const SystemInstance inst = testing::RandomInstance(rng, 24);
      const SolveResult res = SolveCore(inst);
      const ValueSplit sp = EnergyCapacitySplit(res, inst);
      CHECK(sp.energy_value + sp.capacity_value ==
            doctest::Approx(-res.r.dot(res.lambda)).epsilon(1e-12));
    }
  }
  SUBCASE("no scarcity: price-driven arbitrage only") {
    SystemInstance inst;
    inst.grid = {4, true};
    inst.demand = Eigen::Vector4d(1, 1, 1, 1);
    Eigen::VectorXd cost(4);
    cost << 1, 5, 1, 5;
    GeneratorSpec g = MakeGenerator("g", 4, 0.0, 0.0, Eigen::VectorXd::Ones(4));
    g.var_cost = cost;
    inst.generators = {g};
    inst.storage = {0.1, 0.1};
    const SolveResult res = SolveCore(inst);
    REQUIRE(res.u > 1e-3);
    const ValueSplit sp = EnergyCapacitySplit(res, inst);
    CHECK(sp.scarcity_premium.cwiseAbs().maxCoeff() < 1e-9);
    CHECK(std::abs(sp.capacity_value) < 1e-9);
    CHECK(sp.energy_value > 0.0);
  }
  SUBCASE("binding capacity earns a premium") {
    const SystemInstance inst = testing::TwoGeneratorPeaky();
    const SolveResult res = SolveCore(inst);
    const ValueSplit sp = EnergyCapacitySplit(res, inst);
    // By hand: the base unit runs every hour, so gamma* = lambda - 1.
    double expected = 0.0;
    for (int h = 0; h < 4; ++h) {
      REQUIRE(res.x(0, h) > 1e-6);
      double g = res.lambda[h] - 1.0;
      if (res.x(1, h) > 1e-6) g = std::min(g, res.lambda[h] - 10.0);
      CHECK(sp.scarcity_premium[h] == doctest::Approx(std::max(0.0, g)).epsilon(1e-9));
      expected += -res.r[h] * std::max(0.0, g);
    }
    CHECK(sp.capacity_value == doctest::Approx(expected).epsilon(1e-9));
    CHECK(sp.capacity_value > 0.0);
  }
  SUBCASE("storage undeployed") {
    const SystemInstance inst = Daily(1, 1e4, 1e4);
    const ValueSplit sp = EnergyCapacitySplit(SolveCore(inst), inst);
    CHECK(std::abs(sp.energy_value) < 1e-6);
    CHECK(std::abs(sp.capacity_value) < 1e-6);
  }
}

TEST_CASE("value deflation: room grows as its cost falls") {
  double prev_u = -1.0;
  for (double cu : {0.4, 0.2, 0.1, 0.05, 0.02}) {
    const SolveResult res = SolveCore(Daily(2, 0.05, cu));
    CHECK(res.u >= prev_u - 1e-6);
    prev_u = res.u;
  }
}
