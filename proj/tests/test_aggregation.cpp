#include "doctest.h"
#include "helpers.hpp"
#include "storeplan/aggregation.hpp"
#include "storeplan/error.hpp"

#include <map>
#include <random>

using namespace storeplan;

namespace {

SystemInstance FromProfiles(const std::vector<double>& demand, const std::vector<double>& avail,
                            bool cyclic = true) {
  const int n = static_cast<int>(demand.size());
  SystemInstance inst;
  inst.grid = {n, cyclic};
  inst.demand = Eigen::Map<const Eigen::VectorXd>(demand.data(), n);
  inst.generators = {
      MakeGenerator("base", n, 1.0, 5.0, Eigen::VectorXd::Ones(n)),
      MakeGenerator("wind", n, 0.0, 2.0, Eigen::Map<const Eigen::VectorXd>(avail.data(), n))};
  inst.storage = {0.5, 0.5};
  return inst;
}

Eigen::MatrixXd Dense(const SparseRowMatrix& p) { return Eigen::MatrixXd(p); }

SystemInstance Days(const std::vector<int>& order, std::vector<double> scales = {1.0, 1.6, 0.7, 1.3}) {
  std::vector<std::vector<double>> dem(scales.size()), sol(scales.size());
  for (std::size_t k = 0; k < scales.size(); ++k) {
    testing::DayTemplate(scales[k], 3.0 * k, dem[k], sol[k]);
  }
  return testing::FromDays(dem, sol, order);
}

}  // namespace

TEST_CASE("identity aggregation") {
  const SystemInstance inst = FromProfiles({1, 2, 3}, {0.1, 0.5, 0.9});
  const Aggregation agg = AggregateIdentity(inst);
  Eigen::MatrixXd expected(3, 3);
  expected << 0, 1, 0, 0, 0, 1, 1, 0, 0;
  CHECK(Dense(agg.P) == expected);
  CHECK(agg.w == Eigen::VectorXd::Ones(3));
  CHECK(agg.q == Eigen::VectorXd::Ones(3));
  CHECK(agg.demand == inst.demand);
  CHECK(CheckLossless(agg, inst, 0.0).lossless());

  const Aggregation one = AggregateIdentity(FromProfiles({2}, {1}));
  CHECK(Dense(one.P) == Eigen::MatrixXd::Ones(1, 1));

  // Non-cyclic: the last hour has no successor.
  const SystemInstance open = FromProfiles({1, 2, 3}, {0.1, 0.5, 0.9}, false);
  const Aggregation lin = AggregateIdentity(open);
  CHECK(lin.P.row(2).sum() == 0.0);
  CHECK(lin.P.coeff(0, 1) == 1.0);
  CHECK(CheckLossless(lin, open, 0.0).lossless());
}

TEST_CASE("incoming matrix reverses a deterministic chain") {
  const Aggregation agg = AggregateIdentity(FromProfiles({1, 2, 3}, {0, 0, 1}));
  const Eigen::MatrixXd pin = Dense(IncomingMatrix(agg));
  CHECK(pin == Dense(agg.P).transpose());
}

TEST_CASE("representative days") {
  SUBCASE("two identical days collapse to one cycle") {
    const SystemInstance inst = Days({0, 0});
    const Aggregation agg =
        RepresentativeDaysAggregation(inst, 1, DayLinkage::kIsolated, DaySelection::kKMeansMedoid);
    CHECK(agg.num_states() == 24);
    CHECK(agg.w == Eigen::VectorXd::Constant(24, 2.0));
    for (int s = 0; s < 24; ++s) CHECK(agg.P.coeff(s, (s + 1) % 24) == 1.0);
    CHECK_NOTHROW(agg.Validate(inst));
  }
  SUBCASE("distinct days stay separate with block-diagonal cycles") {
    const SystemInstance inst = Days({0, 1, 2, 3});
    const auto rd =
        SelectRepresentativeDays(inst, 4, DayLinkage::kIsolated, DaySelection::kKMeansMedoid);
    CHECK(rd.representatives == std::vector<int>{0, 1, 2, 3});
    const Eigen::MatrixXd p = Dense(rd.aggregation.P);
    for (int c = 0; c < 4; ++c) {
      CHECK(p(c * 24 + 23, c * 24) == 1.0);
      CHECK(p.block(c * 24, c * 24, 24, 24).sum() == 24.0);
    }
  }
  SUBCASE("chained linkage over distinct days in order is lossless") {
    const SystemInstance inst = Days({0, 1, 0, 1, 0, 1});
    const Aggregation agg =
        RepresentativeDaysAggregation(inst, 2, DayLinkage::kChained, DaySelection::kKMeansMedoid);
    CHECK(agg.P.coeff(23, 24) == 1.0);
    CHECK(agg.P.coeff(47, 0) == 1.0);
    const LosslessReport rep = CheckLossless(agg, inst, 0.0);
    CHECK_MESSAGE(rep.lossless(), rep.Summary());
  }
  SUBCASE("peak-median selection keeps the peak day") {
    const SystemInstance inst = Days({0, 2, 1, 3, 2, 0, 2, 2});
    const auto rd =
        SelectRepresentativeDays(inst, 2, DayLinkage::kIsolated, DaySelection::kPeakMedian);
    // One season: the peak-load day (scale 1.6 is day 2) and a median day.
    CHECK(std::find(rd.representatives.begin(), rd.representatives.end(), 2) !=
          rd.representatives.end());
    CHECK(rd.representatives.size() == 2);
  }
  SUBCASE("errors") {
    const SystemInstance odd = FromProfiles({1, 2, 3}, {0, 0, 0});
    CHECK_THROWS_WITH_AS(RepresentativeDaysAggregation(odd, 1, DayLinkage::kIsolated,
                                                       DaySelection::kKMeansMedoid),
                         doctest::Contains("IndivisibleHorizon"), Error);
    const SystemInstance two = Days({0, 1});
    CHECK_THROWS_WITH_AS(
        RepresentativeDaysAggregation(two, 3, DayLinkage::kIsolated, DaySelection::kKMeansMedoid),
        doctest::Contains("KTooLarge"), Error);
  }
}

TEST_CASE("system states") {
  SUBCASE("alternating profiles") {
    std::vector<double> d, a;
    for (int h = 0; h < 10; ++h) {
      d.push_back(h % 2 ? 3.0 : 1.0);
      a.push_back(h % 2 ? 0.2 : 0.8);
    }
    const Aggregation agg = SystemStates(FromProfiles(d, a), 2);
    Eigen::MatrixXd expected(2, 2);
    expected << 0, 1, 1, 0;
    CHECK(Dense(agg.P) == expected);
    CHECK(agg.q == Eigen::VectorXd::Ones(2));
    CHECK(agg.w == Eigen::VectorXd::Constant(2, 5.0));
  }
  SUBCASE("constant profile") {
    const SystemInstance inst = FromProfiles(std::vector<double>(12, 2.0), std::vector<double>(12, 0.5));
    const Aggregation agg = SystemStates(inst, 1);
    CHECK(Dense(agg.P) == Eigen::MatrixXd::Ones(1, 1));
    CHECK(agg.w[0] == 12.0);
    CHECK(agg.q[0] == 12.0);
    CHECK_THROWS_WITH_AS(SystemStates(inst, 2), doctest::Contains("EmptyCluster"), Error);
    CHECK_THROWS_WITH_AS(SystemStates(inst, 13), doctest::Contains("KTooLarge"), Error);
  }
  SUBCASE("empirical transitions match hand counts") {
    // Runs A B C A D C A D C A D C (cyclic): C is entered once from B and
    // three times from D; A leaves to B once and to D three times.
    const std::map<char, std::pair<double, double>> prof = {
        {'A', {1.0, 0.0}}, {'B', {2.0, 1.0}}, {'C', {3.0, 0.0}}, {'D', {4.0, 1.0}}};
    const std::string stream = "ABBCADDCADCAADC";
    std::vector<double> d, a;
    for (char c : stream) {
      d.push_back(prof.at(c).first);
      a.push_back(prof.at(c).second);
    }
    const Aggregation agg = SystemStates(FromProfiles(d, a), 4);
    // States are numbered by first appearance: A=0, B=1, C=2, D=3.
    const Eigen::MatrixXd p = Dense(agg.P);
    CHECK(p(0, 1) == doctest::Approx(0.25));
    CHECK(p(0, 3) == doctest::Approx(0.75));
    CHECK(p(1, 2) == 1.0);
    CHECK(p(2, 0) == 1.0);
    CHECK(p(3, 2) == 1.0);
    const Eigen::MatrixXd pin = Dense(IncomingMatrix(agg));
    CHECK(pin(2, 1) == doctest::Approx(0.25));
    CHECK(pin(2, 3) == doctest::Approx(0.75));
    // A is visited in runs of 1, 1, 1 and 2 hours; q is the mean.
    CHECK(agg.w[0] == 5.0);
    CHECK(agg.q[0] == doctest::Approx(5.0 / 4.0));
    CHECK(agg.q[1] == 2.0);
  }
}

TEST_CASE("adjacent clusters") {
  SUBCASE("piecewise-constant series recovers its runs") {
    std::vector<double> d, a;
    const std::vector<std::pair<double, int>> runs = {{1, 3}, {4, 2}, {2, 5}, {3, 2}};
    for (auto [v, len] : runs) {
      for (int i = 0; i < len; ++i) {
        d.push_back(v);
        a.push_back(v / 4);
      }
    }
    const SystemInstance inst = FromProfiles(d, a);
    const Aggregation agg = AdjacentClusters(inst, 4);
    CHECK(agg.w == Eigen::Vector4d(3, 2, 5, 2));
    CHECK(agg.q == agg.w);
    CHECK(agg.demand == Eigen::Vector4d(1, 4, 2, 3));
    CHECK(CheckLossless(agg, inst, 0.0).lossless());
    CHECK(AdjacentLosslessThreshold(inst) == 4);
  }
  SUBCASE("k = n is the identity") {
    std::mt19937 rng(3);
    const SystemInstance inst = testing::RandomInstance(rng, 30);
    const Aggregation adj = AdjacentClusters(inst, 30);
    const Aggregation id = AggregateIdentity(inst);
    CHECK(adj.gamma == id.gamma);
    CHECK(adj.w == id.w);
    CHECK(adj.q == id.q);
    CHECK(Dense(adj.P) == Dense(id.P));
    CHECK_THROWS_AS(AdjacentClusters(inst, 31), Error);
  }
}

TEST_CASE("check_lossless reports each condition") {
  const SystemInstance inst = FromProfiles({1, 2, 3, 4}, {0.5, 0.5, 0.5, 0.5});
  // Hours 0 and 1 merged although demands differ by 1.
  Eigen::VectorXi gamma(4);
  gamma << 0, 0, 1, 2;
  const Aggregation merged = AggregationFromAssignment(inst, gamma, 3);
  const LosslessReport rep = CheckLossless(merged, inst, 0.0);
  REQUIRE_FALSE(rep.lossless());
  CHECK(rep.violations[0].condition == 1);
  CHECK(rep.violations[0].magnitude == doctest::Approx(1.0));

  // Equal profiles but a state revisited with two successors.
  const SystemInstance rep_inst = FromProfiles({1, 2, 1, 3}, {0, 0, 0, 0});
  Eigen::VectorXi g2(4);
  g2 << 0, 1, 0, 2;
  const LosslessReport r2 = CheckLossless(AggregationFromAssignment(rep_inst, g2, 3), rep_inst);
  bool has2 = false;
  for (const auto& v : r2.violations) has2 = has2 || v.condition == 2;
  CHECK(has2);

  // Runs of unequal length in one state.
  const SystemInstance runs = FromProfiles({1, 1, 2, 1, 2}, {0, 0, 0, 0, 0}, false);
  Eigen::VectorXi g3(5);
  g3 << 0, 0, 1, 0, 1;
  const LosslessReport r3 = CheckLossless(AggregationFromAssignment(runs, g3, 2), runs);
  bool has3 = false;
  for (const auto& v : r3.violations) has3 = has3 || v.condition == 3;
  CHECK(has3);

  Aggregation wrong = AggregateIdentity(inst);
  wrong.gamma.conservativeResize(3);
  CHECK_THROWS_AS(CheckLossless(wrong, inst), Error);
}

TEST_CASE("compress_lossless") {
  SUBCASE("identical days") {
    std::vector<int> order(365, 0);
    const SystemInstance inst = Days(order);
    const Aggregation agg = CompressLossless(inst, 0.0);
    // Night hours with no solar still differ in demand, so 24 states remain.
    CHECK(agg.num_states() <= 24);
    CHECK(CheckLossless(agg, inst, 0.0).lossless());
  }
  SUBCASE("two alternating days") {
    std::vector<int> order;
    for (int d = 0; d < 20; ++d) order.push_back(d % 2);
    const SystemInstance inst = Days(order);
    const Aggregation agg = CompressLossless(inst, 0.0);
    CHECK(agg.num_states() <= 48);
    CHECK(agg.num_states() > 24);
    CHECK(CheckLossless(agg, inst, 0.0).lossless());
  }
  SUBCASE("constant runs shrink further") {
    const SystemInstance inst = FromProfiles({1, 1, 1, 2, 2, 1, 1, 1, 2, 2}, std::vector<double>(10, 0.3));
    const Aggregation agg = CompressLossless(inst, 0.0);
    CHECK(agg.num_states() == 2);
    CHECK(agg.q == Eigen::Vector2d(3, 2));
  }
  SUBCASE("iid data admits no merge") {
    std::mt19937 rng(5);
    const SystemInstance inst = testing::RandomInstance(rng, 96);
    const Aggregation agg = CompressLossless(inst, 0.0);
    const Aggregation id = AggregateIdentity(inst);
    CHECK(agg.gamma == id.gamma);
    CHECK(Dense(agg.P) == Dense(id.P));
    // Any merge of two distinct hours breaks condition 1.
    std::uniform_int_distribution<int> pick(0, 95);
    for (int trial = 0; trial < 20; ++trial) {
      const int a = pick(rng), b = pick(rng);
      if (a == b) continue;
      Eigen::VectorXi gamma(96);
      int next = 0;
      for (int h = 0; h < 96; ++h) gamma[h] = h == std::max(a, b) ? -1 : next++;
      gamma[std::max(a, b)] = gamma[std::min(a, b)];
      CHECK_FALSE(CheckLossless(AggregationFromAssignment(inst, gamma, 95), inst).lossless());
    }
  }
  SUBCASE("tolerance absorbs ingestion noise") {
    std::vector<int> order(10, 0);
    SystemInstance inst = Days(order);
    for (int h = 0; h < inst.num_hours(); ++h) inst.demand[h] += 1e-12 * (h % 7);
    CHECK(CompressLossless(inst, 0.0).num_states() > 24);
    const Aggregation agg = CompressLossless(inst, 1e-9);
    CHECK(agg.num_states() <= 24);
    CHECK(CheckLossless(agg, inst, 1e-9).lossless());
  }
}

TEST_CASE("produced aggregations satisfy the type invariants") {
  std::mt19937 rng(9);
  std::vector<int> order;
  for (int d = 0; d < 14; ++d) order.push_back(static_cast<int>(rng() % 4));
  const SystemInstance inst = Days(order);
  std::vector<Aggregation> all = {
      AggregateIdentity(inst),
      RepresentativeDaysAggregation(inst, 3, DayLinkage::kIsolated, DaySelection::kKMeansMedoid),
      RepresentativeDaysAggregation(inst, 3, DayLinkage::kChained, DaySelection::kPeakMedian),
      SystemStates(inst, 12),
      AdjacentClusters(inst, 40),
      CompressLossless(inst)};
  for (const auto& agg : all) {
    CHECK_NOTHROW(agg.Validate(inst));
    CHECK(agg.w.sum() == doctest::Approx(inst.num_hours()));
    CHECK(agg.q.minCoeff() >= 1.0);
  }
}
