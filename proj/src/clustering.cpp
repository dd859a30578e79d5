#include "clustering.hpp"

#include <algorithm>
#include <limits>

#include "storeplan/error.hpp"

namespace storeplan::detail {

Eigen::MatrixXd HourFeatures(const SystemInstance& inst) {
  const int n = inst.num_hours();
  const int m = inst.num_generators();
  Eigen::MatrixXd f(n, 1 + m);
  f.col(0) = inst.demand;
  for (int g = 0; g < m; ++g) f.col(1 + g) = inst.generators[g].availability;
  for (int j = 0; j < f.cols(); ++j) {
    const double lo = f.col(j).minCoeff();
    const double span = f.col(j).maxCoeff() - lo;
    if (span > 0) {
      f.col(j) = (f.col(j).array() - lo) / span;
    } else {
      f.col(j).setZero();
    }
  }
  return f;
}

Eigen::VectorXd SeriesRanges(const SystemInstance& inst) {
  const int m = inst.num_generators();
  Eigen::VectorXd r(1 + 2 * m);
  auto span = [](const Eigen::VectorXd& v) { return v.maxCoeff() - v.minCoeff(); };
  r[0] = span(inst.demand);
  for (int g = 0; g < m; ++g) {
    r[1 + g] = span(inst.generators[g].availability);
    r[1 + m + g] = span(inst.generators[g].var_cost);
  }
  return r;
}

Eigen::VectorXd HourProfile(const SystemInstance& inst, int h) {
  const int m = inst.num_generators();
  Eigen::VectorXd p(1 + 2 * m);
  p[0] = inst.demand[h];
  for (int g = 0; g < m; ++g) {
    p[1 + g] = inst.generators[g].availability[h];
    p[1 + m + g] = inst.generators[g].var_cost[h];
  }
  return p;
}

KMeansResult KMeans(const Eigen::MatrixXd& points, int k, int seed, int max_iters) {
  const int n = static_cast<int>(points.rows());
  if (k < 1 || k > n) throw Error(ErrorCode::kKTooLarge, "k-means needs 1 <= k <= points");
  KMeansResult res;
  res.centroids.resize(k, points.cols());
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  int next = seed;
  for (int c = 0; c < k; ++c) {
    res.centroids.row(c) = points.row(next);
    double far = -1.0;
    int far_idx = -1;
    for (int i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], (points.row(i) - res.centroids.row(c)).squaredNorm());
      if (nearest[i] > far) {
        far = nearest[i];
        far_idx = i;
      }
    }
    if (c + 1 < k && far <= 0.0) {
      throw Error(ErrorCode::kEmptyCluster, "fewer distinct points than clusters");
    }
    next = far_idx;
  }

  res.labels.assign(n, 0);
  std::vector<double> dist(n, 0.0);
  int reseeds = 0;
  for (int iter = 0; iter < max_iters; ++iter) {
    bool changed = iter == 0;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = (points.row(i) - res.centroids.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (best != res.labels[i]) changed = true;
      res.labels[i] = best;
      dist[i] = best_d;
    }
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
    std::vector<int> count(k, 0);
    for (int i = 0; i < n; ++i) {
      sums.row(res.labels[i]) += points.row(i);
      ++count[res.labels[i]];
    }
    bool reseeded = false;
    for (int c = 0; c < k; ++c) {
      if (count[c] > 0) continue;
      // Steal the worst-fitting point from a cluster that can spare it.
      int steal = -1;
      for (int i = 0; i < n; ++i) {
        if (count[res.labels[i]] > 1 && dist[i] > 0 && (steal < 0 || dist[i] > dist[steal])) {
          steal = i;
        }
      }
      if (steal < 0 || ++reseeds > 10 * k) {
        throw Error(ErrorCode::kEmptyCluster, "k-means could not fill every cluster");
      }
      sums.row(res.labels[steal]) -= points.row(steal);
      --count[res.labels[steal]];
      res.labels[steal] = c;
      sums.row(c) = points.row(steal);
      count[c] = 1;
      dist[steal] = 0.0;
      reseeded = true;
    }
    for (int c = 0; c < k; ++c) res.centroids.row(c) = sums.row(c) / count[c];
    if (!changed && !reseeded) break;
  }
  return res;
}

std::vector<Run> StateRuns(const Eigen::VectorXi& gamma, bool cyclic) {
  const int n = static_cast<int>(gamma.size());
  std::vector<Run> runs;
  for (int h = 0; h < n; ++h) {
    if (!runs.empty() && gamma[h] == runs.back().state) {
      ++runs.back().length;
    } else {
      runs.push_back({h, 1, gamma[h]});
    }
  }
  if (cyclic && runs.size() > 1 && runs.front().state == runs.back().state) {
    runs.back().length += runs.front().length;
    runs.erase(runs.begin());
  }
  return runs;
}

}  // namespace storeplan::detail
