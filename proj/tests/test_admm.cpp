#include "doctest.h"
#include "helpers.hpp"
#include "storeplan/admm.hpp"
#include "storeplan/error.hpp"

#include <cmath>
#include <random>

using namespace storeplan;

namespace {

SystemInstance Days(int days, bool cyclic = true) {
  std::vector<std::vector<double>> dem(2), sol(2);
  testing::DayTemplate(1.0, 0.0, dem[0], sol[0]);
  testing::DayTemplate(1.3, 5.0, dem[1], sol[1]);
  std::vector<int> order(days);
  for (int d = 0; d < days; ++d) order[d] = d % 2;
  return testing::FromDays(dem, sol, order, cyclic);
}

double Rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("block counts") {
  const BlockStructure week = PartitionBlocks(Days(7), BlockScheme::kWeek);
  CHECK(week.num_dispatch_blocks() == 1);
  CHECK(week.soc_links == 0);

  const SystemInstance two = Days(2);
  const BlockStructure day = PartitionBlocks(two, BlockScheme::kDay);
  CHECK(day.num_dispatch_blocks() == 2);
  CHECK(day.soc_links == 2);
  CHECK(day.capacity_links == 3 * 48);
  CHECK(day.door_links == 96);
  CHECK(day.room_links == 48);

  const BlockStructure hour = PartitionBlocks(Days(1), BlockScheme::kHour);
  CHECK(hour.num_dispatch_blocks() == 24);
  CHECK(hour.soc_links == 24);

  CHECK(PartitionBlocks(Days(2, false), BlockScheme::kDay).soc_links == 1);
  CHECK(PartitionBlocks(two, BlockScheme::kSingle).num_links() == 0);
}

TEST_CASE("partition and config errors") {
  SystemInstance inst = testing::TwoGeneratorPeaky();
  CHECK_THROWS_AS(PartitionBlocks(inst, BlockScheme::kDay), Error);
  CHECK(ParseBlockScheme("week") == BlockScheme::kWeek);
  CHECK(BlockSchemeName(BlockScheme::kHour) == "hour");
  CHECK_THROWS_AS(ParseBlockScheme("month"), Error);
  AdmmConfig cfg;
  cfg.beta = 0;
  CHECK_THROWS_AS(cfg.Validate(), Error);
  cfg = {};
  cfg.eps_dual = -1;
  CHECK_THROWS_AS(cfg.Validate(), Error);
}

TEST_CASE("single block matches the direct solve") {
  const SystemInstance inst = Days(2);
  AdmmConfig cfg;
  cfg.scheme = BlockScheme::kSingle;
  const AdmmResult ar = AdmmSolve(inst, cfg);
  CHECK(ar.converged());
  REQUIRE(ar.trace.iterations.size() == 1);
  CHECK(ar.trace.iterations[0].primal_residual == 0.0);
  CHECK(Rel(ar.result.objective, SolveCore(inst).objective) < 1e-8);
}

TEST_CASE("hourly blocks on a peaky day") {
  const SystemInstance inst = testing::TwoGeneratorPeaky();
  AdmmConfig cfg;
  cfg.scheme = BlockScheme::kHour;
  cfg.beta = 1.0;
  const AdmmResult ar = AdmmSolve(inst, cfg);
  CHECK(ar.converged());
  CHECK(ar.blocks.num_dispatch_blocks() == 4);
  CHECK(Rel(ar.result.objective, SolveCore(inst).objective) < 1e-3);
}

TEST_CASE("per-day blocks converge to the direct objective") {
  const SystemInstance inst = Days(2);
  const double direct = SolveCore(inst).objective;
  AdmmConfig cfg;
  cfg.scheme = BlockScheme::kDay;
  cfg.beta = 1.0;
  const AdmmResult ar = AdmmSolve(inst, cfg);
  REQUIRE(ar.converged());
  CHECK(ar.trace.iterations.back().primal_residual <= 1e-4);
  CHECK(Rel(ar.result.objective, direct) < 1e-3);
  // Linking duals approach the direct rents.
  CHECK(ar.result.tau.sum() == doctest::Approx(inst.storage.room_cost).epsilon(1e-2));
}

TEST_CASE("beta sweep reaches the same objective") {
  const SystemInstance inst = Days(2);
  const double direct = SolveCore(inst).objective;
  std::vector<int> iters;
  for (double beta : {0.1, 1.0, 10.0}) {
    AdmmConfig cfg;
    cfg.beta = beta;
    const AdmmResult ar = AdmmSolve(inst, cfg);
    CHECK_MESSAGE(ar.converged(), "beta " << beta);
    CHECK(Rel(ar.result.objective, direct) < 1e-3);
    iters.push_back(static_cast<int>(ar.trace.iterations.size()));
  }
  CHECK((iters[0] != iters[1] || iters[1] != iters[2]));
}

TEST_CASE("threads give the same iterates") {
  const SystemInstance inst = Days(2);
  AdmmConfig cfg;
  cfg.max_iters = 30;
  const AdmmResult a = AdmmSolve(inst, cfg);
  cfg.threads = 2;
  const AdmmResult b = AdmmSolve(inst, cfg);
  REQUIRE(a.trace.iterations.size() == b.trace.iterations.size());
  CHECK(a.trace.iterations.back().objective == b.trace.iterations.back().objective);
}

TEST_CASE("iteration limit returns the last iterate unflagged as converged") {
  const SystemInstance inst = Days(2, false);
  AdmmConfig cfg;
  cfg.max_iters = 3;
  const AdmmResult ar = AdmmSolve(inst, cfg);
  CHECK_FALSE(ar.converged());
  CHECK(ar.trace.iterations.size() == 3);
  CHECK(ar.trace.ToCsv().rfind("iter,primal_residual,dual_residual,objective,seconds,beta\n", 0) == 0);
  for (const auto& it : ar.trace.iterations) {
    CHECK(it.primal_residual >= 0);
    CHECK(it.dual_residual >= 0);
  }
}
