#include "doctest.h"
#include "storeplan/error.hpp"
#include "storeplan/harness.hpp"
#include "storeplan/io.hpp"
#include "storeplan/model_core.hpp"

#include <cmath>
#include <set>

using namespace storeplan;

namespace {

SyntheticData Make(Profile p, int n, std::uint64_t seed = 1, int regions = 1) {
  return GenerateSynthetic({p, n, regions, seed, true});
}

// Day profiles as tuples of demand and availability, for counting distinct days.
std::set<std::vector<double>> DistinctDays(const SystemInstance& inst) {
  std::set<std::vector<double>> days;
  for (int d = 0; d < inst.num_hours() / 24; ++d) {
    std::vector<double> key;
    for (int h = d * 24; h < d * 24 + 24; ++h) {
      key.push_back(inst.demand[h]);
      for (const auto& g : inst.generators) key.push_back(g.availability[h]);
    }
    days.insert(key);
  }
  return days;
}

}  // namespace

TEST_CASE("synthetic generator shapes and determinism") {
  const SyntheticData a = Make(Profile::kSeasonal, 24 * 20, 7, 2);
  const SyntheticData b = Make(Profile::kSeasonal, 24 * 20, 7, 2);
  CHECK(a.instance.demand == b.instance.demand);
  CHECK(a.regions.size() == 2);
  CHECK(a.instance.num_generators() == 6);
  CHECK(a.instance.generators[2].availability == b.instance.generators[2].availability);
  CHECK(Make(Profile::kSeasonal, 24 * 20, 8, 2).instance.demand != a.instance.demand);
  CHECK_NOTHROW(a.instance.Validate());

  CHECK(DistinctDays(Make(Profile::kAlternatingDays, 24 * 30).instance).size() == 2);

  const SyntheticData peaky = Make(Profile::kPeaky, 24 * 30, 3);
  REQUIRE(peaky.extreme_day >= 1);
  REQUIRE(peaky.extreme_day <= 28);
  const Eigen::VectorXd& d = peaky.instance.demand;
  CHECK(d.segment(24 * peaky.extreme_day, 24).maxCoeff() == d.maxCoeff());

  CHECK_THROWS_AS(Make(Profile::kSeasonal, 100), Error);
  CHECK_NOTHROW(Make(Profile::kIid, 100));
  CHECK(ParseProfile("alternating-days") == Profile::kAlternatingDays);
  CHECK(ProfileName(Profile::kIid) == "iid");
  CHECK_THROWS_AS(ParseProfile("flat"), Error);
}

TEST_CASE("iid year has no lossless compression") {
  const SystemInstance inst = Make(Profile::kIid, 8760).instance;
  CHECK(CompressLossless(inst).num_states() == 8760);
}

TEST_CASE("carbon price shifts variable costs") {
  const SystemInstance inst = Make(Profile::kSeasonal, 48).instance;
  const SystemInstance priced = ApplyCarbonPrice(inst, {20.0, {{"base", 0.5}}});
  CHECK(priced.generators[0].name == "base");
  CHECK((priced.generators[0].var_cost.array() - inst.generators[0].var_cost.array() - 10.0)
            .abs()
            .maxCoeff() < 1e-12);
  CHECK(priced.generators[1].var_cost == inst.generators[1].var_cost);
  CHECK_THROWS_AS(ApplyCarbonPrice(inst, {1.0, {{"nuclear", 1.0}}}), Error);
}

TEST_CASE("comparison relatives and sweep") {
  Scenario sc;
  sc.name = "t";
  sc.synthetic = SyntheticSpec{Profile::kPeaky, 24 * 10, 1, 2, true};
  MethodSpec full, identity, lossless, days;
  identity.kind = MethodSpec::Kind::kIdentity;
  lossless.kind = MethodSpec::Kind::kLossless;
  days.kind = MethodSpec::Kind::kRepDays;
  days.k = 3;
  sc.methods = {full, identity, lossless, days};
  sc.sweep = {4000, 2000, 1000, 500, 250};
  sc.threads = 2;
  const ComparisonReport rep = RunComparison(sc);
  REQUIRE(rep.all_ok());
  REQUIRE(rep.baseline == 0);
  CHECK(rep.rows[3].label == "rep-days(3,kmeans-medoid,isolated)");
  for (int row : {0, 1, 2}) {
    CHECK(std::abs(rep.Relative(row, &MethodOutcome::objective) - 1.0) < 1e-7);
    CHECK(std::abs(rep.Relative(row, &MethodOutcome::room) - 1.0) < 1e-5);
  }
  CHECK(rep.rows[3].num_states == 72);
  CHECK(rep.ToCsv().find("method,") == 0);
  REQUIRE(rep.sweep.size() == 4);
  for (const auto& curve : rep.sweep) {
    for (std::size_t j = 1; j < curve.points.size(); ++j) {
      CHECK(curve.points[j].room >= curve.points[j - 1].room - 1e-6);
    }
  }

  Scenario bad = sc;
  bad.methods.clear();
  CHECK_THROWS_AS(bad.Validate(), Error);
  bad = sc;
  bad.sweep = {1.0, -1.0};
  CHECK_THROWS_AS(bad.Validate(), Error);
}

TEST_CASE("failed methods are reported, not thrown") {
  const SystemInstance inst = Make(Profile::kSeasonal, 48).instance;
  MethodSpec m;
  m.kind = MethodSpec::Kind::kRepDays;
  m.k = 5;
  const MethodOutcome o = RunMethod(inst, m);
  CHECK_FALSE(o.ok);
  REQUIRE(o.error_code.has_value());
  CHECK(*o.error_code == ErrorCode::kKTooLarge);
}

TEST_CASE("json round trips") {
  const SystemInstance inst = Make(Profile::kSeasonal, 48, 2).instance;
  const SystemInstance back = io::InstanceFromJson(io::ToJson(inst));
  CHECK(back.demand == inst.demand);
  CHECK(back.generators.size() == inst.generators.size());
  CHECK(back.generators[3].availability == inst.generators[3].availability);
  CHECK(back.storage.room_cost == inst.storage.room_cost);

  const io::Json scalar = io::Json::parse(R"({
    "cyclic": false, "demand": [1, 2, 3],
    "generators": [{"name": "g", "var_cost": 2.5, "cap_cost": 1}],
    "storage": {"door_cost": 0.1, "room_cost": 0.2}})");
  const SystemInstance s = io::InstanceFromJson(scalar);
  CHECK_FALSE(s.grid.cyclic);
  CHECK(s.generators[0].var_cost == Eigen::VectorXd::Constant(3, 2.5));
  CHECK(s.generators[0].availability == Eigen::VectorXd::Ones(3));

  io::Json wrong = scalar;
  wrong["n_hours"] = 4;
  CHECK_THROWS_AS(io::InstanceFromJson(wrong), Error);
  wrong = scalar;
  wrong["generators"][0]["availability"] = {1, 1};
  CHECK_THROWS_AS(io::InstanceFromJson(wrong), Error);

  const Aggregation agg = CompressLossless(inst);
  const Aggregation agg_back = io::AggregationFromJson(io::ToJson(agg));
  CHECK(agg_back.gamma == agg.gamma);
  CHECK(agg_back.w == agg.w);
  CHECK(Eigen::MatrixXd(agg_back.P) == Eigen::MatrixXd(agg.P));

  const SolveResult r = SolveCore(inst);
  const SolveResult r_back = io::SolveResultFromJson(io::ToJson(r));
  CHECK(r_back.x == r.x);
  CHECK(r_back.omega == r.omega);
  CHECK(r_back.objective == r.objective);

  const Scenario sc = io::ScenarioFromJson(io::Json::parse(R"({
    "name": "x", "synthetic": {"profile": "peaky", "n_hours": 72, "seed": 4},
    "methods": ["full", {"method": "system-states", "k": 12},
                {"method": "admm", "scheme": "day", "beta": 2}],
    "sweep": [3, 2, 1]})"));
  CHECK(sc.methods.size() == 3);
  CHECK(sc.methods[1].k == 12);
  CHECK(sc.methods[2].admm.scheme == BlockScheme::kDay);
  CHECK(sc.methods[2].admm.beta == 2.0);
  CHECK(sc.synthetic->seed == 4);
  CHECK_THROWS_AS(io::ScenarioFromJson(io::Json::parse(R"({"methods": [{"method": "rep-days"}],
    "synthetic": {"profile": "iid", "n_hours": 24}})")),
                  Error);
}
