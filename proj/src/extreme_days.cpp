#include "storeplan/extreme_days.hpp"

#include <algorithm>
#include <limits>

#include "storeplan/error.hpp"

namespace storeplan {

CumulativeDayset CumulativeDays(const std::vector<RegionSeries>& regions) {
  if (regions.empty()) throw Error(ErrorCode::kInvalidInput, "no regions given");
  const Eigen::Index n = regions[0].load.size();
  for (const auto& r : regions) {
    if (r.load.size() != n || r.wind.size() != n || r.solar.size() != n) {
      throw Error(ErrorCode::kDimensionMismatch, "region series lengths differ");
    }
  }
  if (n == 0 || n % 24 != 0) {
    throw Error(ErrorCode::kIndivisibleHorizon, "cumulative days need whole days");
  }
  const int days = static_cast<int>(n / 24);
  CumulativeDayset cds;
  cds.days.resize(days, 3 * static_cast<Eigen::Index>(regions.size()));
  for (std::size_t k = 0; k < regions.size(); ++k) {
    cds.regions.push_back(regions[k].name);
    const Eigen::VectorXd* series[3] = {&regions[k].load, &regions[k].wind, &regions[k].solar};
    for (int f = 0; f < 3; ++f) {
      for (int d = 0; d < days; ++d) {
        cds.days(d, 3 * k + f) = series[f]->segment(24 * d, 24).sum();
      }
    }
  }
  for (Eigen::Index j = 0; j < cds.days.cols(); ++j) {
    const double lo = cds.days.col(j).minCoeff();
    const double span = cds.days.col(j).maxCoeff() - lo;
    if (span > 0) {
      cds.days.col(j) = (cds.days.col(j).array() - lo) / span;
    } else {
      cds.days.col(j).setConstant(0.5);
    }
  }
  return cds;
}

RegionSeries RegionFromInstance(const SystemInstance& inst) {
  const int n = inst.num_hours();
  RegionSeries r{"system", inst.demand, Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
  int wind = 0, solar = 0;
  for (const auto& g : inst.generators) {
    if (g.name.rfind("wind", 0) == 0) {
      r.wind += g.availability;
      ++wind;
    } else if (g.name.rfind("solar", 0) == 0) {
      r.solar += g.availability;
      ++solar;
    }
  }
  if (wind > 0) r.wind /= wind;
  if (solar > 0) r.solar /= solar;
  return r;
}

int VertexCover::num_uncoverable() const {
  return static_cast<int>(std::count_if(vertices.begin(), vertices.end(),
                                        [](const CoverVertex& v) { return v.uncoverable; }));
}

VertexCover SelectExtremeDays(const CumulativeDayset& cds, double radius) {
  if (!(radius > 0)) throw Error(ErrorCode::kInvalidInput, "radius must be positive");
  const int days = cds.num_days();
  const int regions = cds.num_regions();
  VertexCover cover;
  cover.radius = radius;
  if (days == 0) return cover;

  // dist[v][d] for every vertex v and day d.
  std::vector<std::vector<double>> dist;
  for (int r = 0; r < regions; ++r) {
    for (int corner = 0; corner < 8; ++corner) {
      CoverVertex v;
      v.region = r;
      v.corner = Eigen::Vector3d(corner & 1, (corner >> 1) & 1, (corner >> 2) & 1);
      std::vector<double> dv(days);
      for (int d = 0; d < days; ++d) {
        dv[d] = (cds.days.block<1, 3>(d, 3 * r).transpose() - v.corner).norm();
      }
      cover.vertices.push_back(v);
      dist.push_back(std::move(dv));
    }
  }
  const int nv = static_cast<int>(cover.vertices.size());
  std::vector<std::vector<char>> meets(nv, std::vector<char>(days, 0));
  for (int v = 0; v < nv; ++v) {
    int nearest = 0;
    bool any = false;
    for (int d = 0; d < days; ++d) {
      if (dist[v][d] < dist[v][nearest]) nearest = d;
      if (dist[v][d] <= radius) {
        meets[v][d] = 1;
        any = true;
      }
    }
    if (!any) {
      cover.vertices[v].uncoverable = true;
      meets[v][nearest] = 1;
    }
  }

  std::vector<char> met(nv, 0), chosen(days, 0);
  int unmet = nv;
  while (unmet > 0) {
    int best = -1, best_gain = 0;
    for (int d = 0; d < days; ++d) {
      if (chosen[d]) continue;
      int gain = 0;
      for (int v = 0; v < nv; ++v) gain += !met[v] && meets[v][d];
      if (gain > best_gain) {
        best_gain = gain;
        best = d;
      }
    }
    if (best < 0) break;
    chosen[best] = 1;
    for (int v = 0; v < nv; ++v) {
      if (!met[v] && meets[v][best]) {
        met[v] = 1;
        --unmet;
      }
    }
  }
  for (int d = 0; d < days; ++d) {
    if (chosen[d]) cover.chosen_days.push_back(d);
  }
  for (int v = 0; v < nv; ++v) {
    auto& vert = cover.vertices[v];
    vert.distance = std::numeric_limits<double>::infinity();
    for (int d : cover.chosen_days) {
      if (meets[v][d] && dist[v][d] < vert.distance) {
        vert.distance = dist[v][d];
        vert.assigned_day = d;
      }
    }
  }
  return cover;
}

}  // namespace storeplan
