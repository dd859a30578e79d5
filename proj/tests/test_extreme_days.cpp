#include "doctest.h"
#include "storeplan/error.hpp"
#include "storeplan/extreme_days.hpp"

#include <random>

using namespace storeplan;

namespace {

RegionSeries FromDaily(const std::string& name, const std::vector<Eigen::Vector3d>& days) {
  const int n = static_cast<int>(days.size()) * 24;
  RegionSeries r{name, Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (int d = 0; d < static_cast<int>(days.size()); ++d) {
    r.load.segment(24 * d, 24).setConstant(days[d][0]);
    r.wind.segment(24 * d, 24).setConstant(days[d][1]);
    r.solar.segment(24 * d, 24).setConstant(days[d][2]);
  }
  return r;
}

std::vector<RegionSeries> RandomRegions(int regions, int days, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<RegionSeries> out;
  for (int k = 0; k < regions; ++k) {
    std::vector<Eigen::Vector3d> d(days);
    for (auto& v : d) v = Eigen::Vector3d(U(rng), U(rng), U(rng));
    out.push_back(FromDaily("r" + std::to_string(k), d));
  }
  return out;
}

}  // namespace

TEST_CASE("two-day normalization") {
  RegionSeries r = FromDaily("a", {{1, 0, 0}, {2, 0, 0}});
  const CumulativeDayset cds = CumulativeDays({r});
  REQUIRE(cds.num_days() == 2);
  CHECK(cds.days(0, 0) == 0.0);
  CHECK(cds.days(1, 0) == 1.0);
  // Zero-range features map to the middle.
  CHECK(cds.days(0, 1) == 0.5);
  CHECK(cds.days(1, 2) == 0.5);
}

TEST_CASE("shape and errors") {
  const auto regions = RandomRegions(15, 365, 3);
  const CumulativeDayset cds = CumulativeDays(regions);
  CHECK(cds.days.rows() == 365);
  CHECK(cds.days.cols() == 45);
  CHECK(cds.days.minCoeff() >= 0.0);
  CHECK(cds.days.maxCoeff() <= 1.0);

  RegionSeries odd{"x", Eigen::VectorXd::Ones(30), Eigen::VectorXd::Ones(30),
                   Eigen::VectorXd::Ones(30)};
  CHECK_THROWS_AS(CumulativeDays({odd}), Error);
  RegionSeries bad = regions[0];
  bad.wind.conservativeResize(24);
  CHECK_THROWS_AS(CumulativeDays({bad}), Error);
  CHECK_THROWS_AS(SelectExtremeDays(cds, 0.0), Error);
}

TEST_CASE("identical days: one day serves every vertex") {
  const RegionSeries r = FromDaily("a", std::vector<Eigen::Vector3d>(10, {3, 1, 2}));
  const VertexCover cover = SelectExtremeDays(CumulativeDays({r}), 0.1);
  CHECK(cover.chosen_days.size() == 1);
  CHECK(cover.vertices.size() == 8);
  for (const auto& v : cover.vertices) {
    CHECK(v.uncoverable);
    CHECK(v.assigned_day == cover.chosen_days[0]);
  }
  // A radius reaching the cube centre from every corner covers them all.
  const VertexCover wide = SelectExtremeDays(CumulativeDays({r}), 1.0);
  CHECK(wide.num_uncoverable() == 0);
  CHECK(wide.chosen_days == std::vector<int>{0});
}

TEST_CASE("corner days are all needed") {
  std::vector<Eigen::Vector3d> days;
  for (int c = 0; c < 8; ++c) days.emplace_back(c & 1, (c >> 1) & 1, (c >> 2) & 1);
  days.emplace_back(0.5, 0.5, 0.5);
  const VertexCover cover = SelectExtremeDays(CumulativeDays({FromDaily("a", days)}), 0.2);
  CHECK(cover.chosen_days == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7});
  CHECK(cover.num_uncoverable() == 0);
  for (const auto& v : cover.vertices) CHECK(v.distance == 0.0);
}

TEST_CASE("cover feasibility and monotonicity") {
  const auto regions = RandomRegions(6, 365, 11);
  const CumulativeDayset all = CumulativeDays(regions);
  int previous = 1 << 30;
  for (double radius : {0.05, 0.1, 0.2, 0.3, 0.5, 0.8}) {
    const VertexCover cover = SelectExtremeDays(all, radius);
    for (const auto& v : cover.vertices) {
      if (!v.uncoverable) CHECK(v.distance <= radius);
      CHECK(std::find(cover.chosen_days.begin(), cover.chosen_days.end(), v.assigned_day) !=
            cover.chosen_days.end());
    }
    CHECK(static_cast<int>(cover.chosen_days.size()) <= previous);
    previous = static_cast<int>(cover.chosen_days.size());
  }
  int last = 0;
  for (int k = 1; k <= 6; ++k) {
    const std::vector<RegionSeries> sub(regions.begin(), regions.begin() + k);
    const int count = static_cast<int>(SelectExtremeDays(CumulativeDays(sub), 0.2).chosen_days.size());
    CHECK(count >= last);
    last = count;
  }
}
