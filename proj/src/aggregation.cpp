#include "storeplan/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>
#include <tuple>

#include "clustering.hpp"
#include "storeplan/error.hpp"

namespace storeplan {

namespace {

constexpr int kHoursPerDay = 24;

SparseRowMatrix FromTriplets(int size, const std::vector<Eigen::Triplet<double>>& trip) {
  SparseRowMatrix p(size, size);
  p.setFromTriplets(trip.begin(), trip.end());
  p.makeCompressed();
  return p;
}

// Mean of member values; exact when all members agree so that lossless
// aggregations reproduce the hourly data bit for bit.
double MemberMean(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  if (*lo == *hi) return *lo;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void FillProfiles(const SystemInstance& inst, const std::vector<std::vector<int>>& members,
                  Aggregation& agg) {
  const int m = inst.num_generators();
  const int s_count = static_cast<int>(members.size());
  agg.demand.resize(s_count);
  agg.availability.resize(m, s_count);
  agg.var_cost.resize(m, s_count);
  std::vector<double> buf;
  for (int s = 0; s < s_count; ++s) {
    auto mean_of = [&](const Eigen::VectorXd& series) {
      buf.clear();
      for (int h : members[s]) buf.push_back(series[h]);
      return MemberMean(buf);
    };
    agg.demand[s] = mean_of(inst.demand);
    for (int g = 0; g < m; ++g) {
      agg.availability(g, s) = mean_of(inst.generators[g].availability);
      agg.var_cost(g, s) = mean_of(inst.generators[g].var_cost);
    }
  }
}

}  // namespace

void Aggregation::Validate() const {
  const int s_count = num_states();
  const int n = num_hours();
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kInvalidInput, msg); };
  if (s_count < 1 || n < 1) fail("aggregation needs at least one state and one hour");
  if (q.size() != s_count || demand.size() != s_count || availability.cols() != s_count ||
      var_cost.cols() != s_count || P.rows() != s_count || P.cols() != s_count) {
    throw Error(ErrorCode::kDimensionMismatch, "aggregation fields disagree on the state count");
  }
  std::vector<int> count(s_count, 0);
  for (int h = 0; h < n; ++h) {
    if (gamma[h] < 0 || gamma[h] >= s_count) fail("gamma maps an hour outside the state range");
    ++count[gamma[h]];
  }
  for (int s = 0; s < s_count; ++s) {
    if (std::abs(w[s] - count[s]) > 1e-9) fail("w must count the hours mapped to each state");
    if (!(q[s] >= 1.0 - 1e-12)) fail("q must be at least 1");
  }
  for (int i = 0; i < s_count; ++i) {
    double sum = 0.0;
    for (SparseRowMatrix::InnerIterator it(P, i); it; ++it) {
      if (it.value() < 0 || !std::isfinite(it.value())) fail("P entries must be nonnegative");
      sum += it.value();
    }
    const bool terminal = !cyclic && sum == 0.0 && gamma[n - 1] == i;
    if (std::abs(sum - 1.0) > 1e-9 && !terminal) fail("P rows must sum to 1");
  }
}

void Aggregation::Validate(const SystemInstance& inst) const {
  Validate();
  if (num_hours() != inst.num_hours() || availability.rows() != inst.num_generators() ||
      var_cost.rows() != inst.num_generators()) {
    throw Error(ErrorCode::kDimensionMismatch, "aggregation does not match the instance");
  }
}

SparseRowMatrix IncomingMatrix(const Aggregation& agg) {
  const int s_count = agg.num_states();
  const Eigen::VectorXd visits = agg.w.cwiseQuotient(agg.q);
  Eigen::VectorXd inflow = Eigen::VectorXd::Zero(s_count);
  for (int i = 0; i < s_count; ++i) {
    for (SparseRowMatrix::InnerIterator it(agg.P, i); it; ++it) {
      inflow[it.col()] += visits[i] * it.value();
    }
  }
  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < s_count; ++i) {
    for (SparseRowMatrix::InnerIterator it(agg.P, i); it; ++it) {
      const int j = static_cast<int>(it.col());
      if (inflow[j] > 0 && it.value() > 0) {
        trip.emplace_back(j, i, visits[i] * it.value() / inflow[j]);
      }
    }
  }
  return FromTriplets(s_count, trip);
}

Aggregation AggregateIdentity(const SystemInstance& inst) {
  const int n = inst.num_hours();
  Eigen::VectorXi gamma(n);
  std::iota(gamma.data(), gamma.data() + n, 0);
  return AggregationFromAssignment(inst, gamma, n);
}

Aggregation AggregationFromAssignment(const SystemInstance& inst, const Eigen::VectorXi& gamma,
                                      int num_states) {
  const int n = inst.num_hours();
  if (gamma.size() != n) throw Error(ErrorCode::kDimensionMismatch, "gamma length != hours");
  const bool cyclic = inst.grid.cyclic;
  Aggregation agg;
  agg.gamma = gamma;
  agg.cyclic = cyclic;
  agg.w = Eigen::VectorXd::Zero(num_states);
  std::vector<std::vector<int>> members(num_states);
  for (int h = 0; h < n; ++h) {
    if (gamma[h] < 0 || gamma[h] >= num_states) {
      throw Error(ErrorCode::kInvalidInput, "gamma maps an hour outside the state range");
    }
    members[gamma[h]].push_back(h);
    agg.w[gamma[h]] += 1.0;
  }
  for (int s = 0; s < num_states; ++s) {
    if (members[s].empty()) throw Error(ErrorCode::kEmptyCluster, "state without member hours");
  }
  const std::vector<detail::Run> runs = detail::StateRuns(gamma, cyclic);
  std::vector<int> run_count(num_states, 0);
  for (const auto& run : runs) ++run_count[run.state];
  agg.q.resize(num_states);
  for (int s = 0; s < num_states; ++s) agg.q[s] = agg.w[s] / run_count[s];

  std::vector<std::map<int, double>> counts(num_states);
  const int nr = static_cast<int>(runs.size());
  for (int k = 0; k < nr; ++k) {
    if (k + 1 < nr) {
      counts[runs[k].state][runs[k + 1].state] += 1.0;
    } else if (cyclic && nr > 1) {
      counts[runs[k].state][runs[0].state] += 1.0;
    }
  }
  std::vector<Eigen::Triplet<double>> trip;
  for (int s = 0; s < num_states; ++s) {
    double total = 0.0;
    for (const auto& [j, c] : counts[s]) total += c;
    if (total == 0.0) {
      // Only the final state of a non-cyclic horizon may end without a successor.
      if (!cyclic && gamma[n - 1] == s) continue;
      trip.emplace_back(s, s, 1.0);
      continue;
    }
    for (const auto& [j, c] : counts[s]) trip.emplace_back(s, j, c / total);
  }
  agg.P = FromTriplets(num_states, trip);
  FillProfiles(inst, members, agg);
  return agg;
}

DayLinkage ParseDayLinkage(const std::string& name) {
  if (name == "isolated") return DayLinkage::kIsolated;
  if (name == "chained") return DayLinkage::kChained;
  throw Error(ErrorCode::kInvalidInput, "unknown day linkage '" + name + "'");
}

DaySelection ParseDaySelection(const std::string& name) {
  if (name == "kmeans-medoid") return DaySelection::kKMeansMedoid;
  if (name == "peak-median") return DaySelection::kPeakMedian;
  throw Error(ErrorCode::kInvalidInput, "unknown day selection '" + name + "'");
}

std::string DayLinkageName(DayLinkage linkage) {
  return linkage == DayLinkage::kIsolated ? "isolated" : "chained";
}

std::string DaySelectionName(DaySelection selection) {
  return selection == DaySelection::kKMeansMedoid ? "kmeans-medoid" : "peak-median";
}

namespace {

// One row per day: the day's normalized hourly features, concatenated.
Eigen::MatrixXd DayFeatures(const SystemInstance& inst) {
  const Eigen::MatrixXd hf = detail::HourFeatures(inst);
  const int days = inst.num_hours() / kHoursPerDay;
  const int f = static_cast<int>(hf.cols());
  Eigen::MatrixXd out(days, kHoursPerDay * f);
  for (int d = 0; d < days; ++d) {
    for (int h = 0; h < kHoursPerDay; ++h) {
      out.block(d, h * f, 1, f) = hf.row(d * kHoursPerDay + h);
    }
  }
  return out;
}

std::vector<int> PeakMedianDays(const SystemInstance& inst, int k) {
  const int days = inst.num_hours() / kHoursPerDay;
  const int seasons = (k + 1) / 2;
  std::vector<int> chosen;
  std::vector<char> taken(days, 0);
  std::vector<std::vector<int>> by_total(seasons);
  for (int sn = 0; sn < seasons; ++sn) {
    const int first = sn * days / seasons;
    const int last = (sn + 1) * days / seasons;
    int peak = first;
    double peak_load = -1.0;
    std::vector<std::pair<double, int>> totals;
    for (int d = first; d < last; ++d) {
      const auto seg = inst.demand.segment(d * kHoursPerDay, kHoursPerDay);
      if (seg.maxCoeff() > peak_load) {
        peak_load = seg.maxCoeff();
        peak = d;
      }
      totals.emplace_back(seg.sum(), d);
    }
    std::sort(totals.begin(), totals.end());
    // Days ordered by distance from the median position, nearest first.
    const int mid = (static_cast<int>(totals.size()) - 1) / 2;
    std::vector<int> order;
    for (int off = 0; off < static_cast<int>(totals.size()); ++off) {
      if (mid + off < static_cast<int>(totals.size())) order.push_back(totals[mid + off].second);
      if (off > 0 && mid - off >= 0) order.push_back(totals[mid - off].second);
    }
    by_total[sn] = order;
    if (!taken[peak]) {
      taken[peak] = 1;
      chosen.push_back(peak);
    }
  }
  for (int sn = 0; sn < seasons && static_cast<int>(chosen.size()) < k; ++sn) {
    for (int d : by_total[sn]) {
      if (!taken[d]) {
        taken[d] = 1;
        chosen.push_back(d);
        break;
      }
    }
  }
  for (int d = 0; d < days && static_cast<int>(chosen.size()) < k; ++d) {
    if (!taken[d]) {
      taken[d] = 1;
      chosen.push_back(d);
    }
  }
  return chosen;
}

}  // namespace

RepresentativeDays SelectRepresentativeDays(const SystemInstance& inst, int k_days,
                                            DayLinkage linkage, DaySelection selection) {
  inst.Validate();
  const int n = inst.num_hours();
  if (n % kHoursPerDay != 0) {
    throw Error(ErrorCode::kIndivisibleHorizon, "representative days need whole days");
  }
  const int days = n / kHoursPerDay;
  if (k_days < 1 || k_days > days) {
    throw Error(ErrorCode::kKTooLarge, "k_days must be between 1 and the number of days");
  }
  const Eigen::MatrixXd feat = DayFeatures(inst);

  std::vector<int> reps;
  if (selection == DaySelection::kKMeansMedoid) {
    const detail::KMeansResult km = detail::KMeans(feat, k_days, 0);
    for (int c = 0; c < k_days; ++c) {
      int best = -1;
      double best_d = 0.0;
      for (int d = 0; d < days; ++d) {
        if (km.labels[d] != c) continue;
        const double dist = (feat.row(d) - km.centroids.row(c)).squaredNorm();
        if (best < 0 || dist < best_d) {
          best = d;
          best_d = dist;
        }
      }
      reps.push_back(best);
    }
  } else {
    reps = PeakMedianDays(inst, k_days);
  }
  std::sort(reps.begin(), reps.end());

  RepresentativeDays out;
  out.representatives = reps;
  out.day_cluster.assign(days, -1);
  for (int c = 0; c < k_days; ++c) out.day_cluster[reps[c]] = c;
  for (int d = 0; d < days; ++d) {
    if (out.day_cluster[d] >= 0) continue;
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k_days; ++c) {
      const double dist = (feat.row(d) - feat.row(reps[c])).squaredNorm();
      if (dist < best_d) {
        best_d = dist;
        best = c;
      }
    }
    out.day_cluster[d] = best;
  }

  Aggregation& agg = out.aggregation;
  const int s_count = k_days * kHoursPerDay;
  const int m = inst.num_generators();
  agg.cyclic = inst.grid.cyclic;
  agg.gamma.resize(n);
  agg.w = Eigen::VectorXd::Zero(s_count);
  agg.q = Eigen::VectorXd::Ones(s_count);
  for (int h = 0; h < n; ++h) {
    agg.gamma[h] = out.day_cluster[h / kHoursPerDay] * kHoursPerDay + h % kHoursPerDay;
    agg.w[agg.gamma[h]] += 1.0;
  }
  agg.demand.resize(s_count);
  agg.availability.resize(m, s_count);
  agg.var_cost.resize(m, s_count);
  std::vector<Eigen::Triplet<double>> trip;
  for (int c = 0; c < k_days; ++c) {
    for (int h = 0; h < kHoursPerDay; ++h) {
      const int s = c * kHoursPerDay + h;
      const int src = reps[c] * kHoursPerDay + h;
      agg.demand[s] = inst.demand[src];
      for (int g = 0; g < m; ++g) {
        agg.availability(g, s) = inst.generators[g].availability[src];
        agg.var_cost(g, s) = inst.generators[g].var_cost[src];
      }
      if (h + 1 < kHoursPerDay) {
        trip.emplace_back(s, s + 1, 1.0);
      } else if (linkage == DayLinkage::kIsolated) {
        trip.emplace_back(s, c * kHoursPerDay, 1.0);
      } else if (c + 1 < k_days) {
        trip.emplace_back(s, (c + 1) * kHoursPerDay, 1.0);
      } else if (agg.cyclic) {
        trip.emplace_back(s, 0, 1.0);
      } else if (agg.gamma[n - 1] != s) {
        // The chain's end is not where the horizon ends; close it on itself
        // so the row stays stochastic.
        trip.emplace_back(s, c * kHoursPerDay, 1.0);
      }
    }
  }
  agg.P = FromTriplets(s_count, trip);
  return out;
}

Aggregation RepresentativeDaysAggregation(const SystemInstance& inst, int k_days,
                                          DayLinkage linkage, DaySelection selection) {
  return SelectRepresentativeDays(inst, k_days, linkage, selection).aggregation;
}

Aggregation SystemStates(const SystemInstance& inst, int k_states) {
  inst.Validate();
  const int n = inst.num_hours();
  if (k_states < 1 || k_states > n) {
    throw Error(ErrorCode::kKTooLarge, "k_states must be between 1 and the number of hours");
  }
  const Eigen::MatrixXd feat = detail::HourFeatures(inst);
  constexpr int kAttempts = 4;
  for (int attempt = 0;; ++attempt) {
    try {
      const int seed = attempt * n / kAttempts;
      const detail::KMeansResult km = detail::KMeans(feat, k_states, seed);
      // Number states by first appearance for stable output.
      std::vector<int> relabel(k_states, -1);
      int next = 0;
      Eigen::VectorXi gamma(n);
      for (int h = 0; h < n; ++h) {
        int& id = relabel[km.labels[h]];
        if (id < 0) id = next++;
        gamma[h] = id;
      }
      return AggregationFromAssignment(inst, gamma, k_states);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEmptyCluster || attempt + 1 >= kAttempts) throw;
    }
  }
}

namespace {

// Greedy Ward merging of adjacent segments. Returns the boundary removed by
// each merge, in order; boundary b separates hours b-1 and b.
std::vector<int> AdjacentMergeOrder(const SystemInstance& inst) {
  const int n = inst.num_hours();
  const int m = inst.num_generators();
  Eigen::MatrixXd f(n, 1 + 2 * m);
  f.leftCols(1 + m) = detail::HourFeatures(inst);
  for (int g = 0; g < m; ++g) {
    const Eigen::VectorXd& c = inst.generators[g].var_cost;
    const double lo = c.minCoeff(), span = c.maxCoeff() - lo;
    f.col(1 + m + g) = span > 0 ? Eigen::VectorXd((c.array() - lo) / span)
                                : Eigen::VectorXd::Zero(n);
  }
  // Segments are identified by their first hour.
  std::vector<int> next(n), prev(n), size(n, 1), version(n, 0);
  std::vector<Eigen::VectorXd> mean(n);
  for (int h = 0; h < n; ++h) {
    next[h] = h + 1 < n ? h + 1 : -1;
    prev[h] = h - 1;
    mean[h] = f.row(h).transpose();
  }
  auto cost = [&](int a, int b) {
    const double na = size[a], nb = size[b];
    return na * nb / (na + nb) * (mean[a] - mean[b]).squaredNorm();
  };
  struct Cand {
    double cost;
    int left;
    int left_version;
    int right_version;
    bool operator>(const Cand& o) const {
      return cost > o.cost || (cost == o.cost && left > o.left);
    }
  };
  std::priority_queue<Cand, std::vector<Cand>, std::greater<Cand>> pq;
  for (int h = 0; h + 1 < n; ++h) pq.push({cost(h, h + 1), h, 0, 0});
  std::vector<int> order;
  order.reserve(n > 0 ? n - 1 : 0);
  while (!pq.empty()) {
    const Cand c = pq.top();
    pq.pop();
    const int a = c.left;
    const int b = next[a];
    if (b < 0 || version[a] != c.left_version || version[b] != c.right_version) continue;
    order.push_back(b);
    mean[a] = (size[a] * mean[a] + size[b] * mean[b]) / (size[a] + size[b]);
    size[a] += size[b];
    next[a] = next[b];
    if (next[a] >= 0) prev[next[a]] = a;
    ++version[a];
    ++version[b];
    if (prev[a] >= 0) pq.push({cost(prev[a], a), prev[a], version[prev[a]], version[a]});
    if (next[a] >= 0) pq.push({cost(a, next[a]), a, version[a], version[next[a]]});
  }
  return order;
}

Eigen::VectorXi SegmentsAfterMerges(int n, const std::vector<int>& order, int merges) {
  std::vector<char> cut(n, 1);
  for (int i = 0; i < merges; ++i) cut[order[i]] = 0;
  Eigen::VectorXi gamma(n);
  int s = -1;
  for (int h = 0; h < n; ++h) {
    if (h == 0 || cut[h]) ++s;
    gamma[h] = s;
  }
  return gamma;
}

}  // namespace

Aggregation AdjacentClusters(const SystemInstance& inst, int k_states) {
  inst.Validate();
  const int n = inst.num_hours();
  if (k_states < 1 || k_states > n) {
    throw Error(ErrorCode::kKTooLarge, "k_states must be between 1 and the number of hours");
  }
  const std::vector<int> order = AdjacentMergeOrder(inst);
  return AggregationFromAssignment(inst, SegmentsAfterMerges(n, order, n - k_states), k_states);
}

std::vector<LosslessCurvePoint> AdjacentLosslessSweep(const SystemInstance& inst,
                                                      const std::vector<int>& ks, double tol) {
  inst.Validate();
  const int n = inst.num_hours();
  const std::vector<int> order = AdjacentMergeOrder(inst);
  std::vector<LosslessCurvePoint> out;
  for (int k : ks) {
    if (k < 1 || k > n) throw Error(ErrorCode::kKTooLarge, "sweep k outside [1, n]");
    const Aggregation agg =
        AggregationFromAssignment(inst, SegmentsAfterMerges(n, order, n - k), k);
    const LosslessReport rep = CheckLossless(agg, inst, tol);
    out.push_back({k, rep.lossless(), static_cast<int>(rep.violations.size())});
  }
  return out;
}

int AdjacentLosslessThreshold(const SystemInstance& inst, double tol) {
  inst.Validate();
  const int n = inst.num_hours();
  const std::vector<int> order = AdjacentMergeOrder(inst);
  // Merged segments never become constant again, so losslessness is
  // monotone in k and a bisection finds the threshold.
  auto ok = [&](int k) {
    const Aggregation agg =
        AggregationFromAssignment(inst, SegmentsAfterMerges(n, order, n - k), k);
    return CheckLossless(agg, inst, tol).lossless();
  };
  int lo = 1, hi = n;
  while (lo < hi) {
    const int mid = lo + (hi - lo) / 2;
    if (ok(mid)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

std::string LosslessReport::Summary(std::size_t max_items) const {
  std::ostringstream os;
  os << violations.size() << " violation(s)";
  for (std::size_t i = 0; i < violations.size() && i < max_items; ++i) {
    const auto& v = violations[i];
    os << "\n  condition " << v.condition << ": " << v.detail << " magnitude=" << v.magnitude;
  }
  return os.str();
}

LosslessReport CheckLossless(const Aggregation& agg, const SystemInstance& inst, double tol) {
  agg.Validate(inst);
  const int n = inst.num_hours();
  const int m = inst.num_generators();
  const int s_count = agg.num_states();
  LosslessReport report;

  // (1) Every member hour carries the state's data.
  const Eigen::VectorXd ranges = detail::SeriesRanges(inst);
  Eigen::VectorXd worst_norm = Eigen::VectorXd::Zero(s_count);
  Eigen::VectorXd worst_raw = Eigen::VectorXd::Zero(s_count);
  std::vector<int> worst_hour(s_count, -1);
  std::vector<int> worst_series(s_count, -1);
  for (int h = 0; h < n; ++h) {
    const int s = agg.gamma[h];
    const Eigen::VectorXd hp = detail::HourProfile(inst, h);
    Eigen::VectorXd sp(1 + 2 * m);
    sp[0] = agg.demand[s];
    sp.segment(1, m) = agg.availability.col(s);
    sp.segment(1 + m, m) = agg.var_cost.col(s);
    for (int k = 0; k < hp.size(); ++k) {
      const double raw = std::abs(hp[k] - sp[k]);
      const double norm = raw / (ranges[k] > 0 ? ranges[k] : 1.0);
      if (norm > worst_norm[s]) {
        worst_norm[s] = norm;
        worst_raw[s] = raw;
        worst_hour[s] = h;
        worst_series[s] = k;
      }
    }
  }
  // Report the within-state spread, which is what makes members unequal.
  for (int s = 0; s < s_count; ++s) {
    if (!(worst_norm[s] > tol)) continue;
    const int k = worst_series[s];
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    std::vector<int> hours;
    for (int h = 0; h < n; ++h) {
      if (agg.gamma[h] != s) continue;
      const double v = detail::HourProfile(inst, h)[k];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      if (hours.size() < 8) hours.push_back(h);
    }
    std::string series = k == 0 ? "demand"
                         : k <= m ? "availability[" + inst.generators[k - 1].name + "]"
                                  : "var_cost[" + inst.generators[k - 1 - m].name + "]";
    const double spread = hi - lo;
    report.violations.push_back({1, {s}, hours, spread > 0 ? spread : worst_raw[s],
                                 "state " + std::to_string(s) + " " + series + " differs"});
  }

  // (2) P is a permutation consistent with the hour sequence.
  const std::vector<detail::Run> runs = detail::StateRuns(agg.gamma, agg.cyclic);
  std::vector<int> col_ones(s_count, 0);
  const int first_state = agg.gamma[0];
  const int last_state = agg.gamma[n - 1];
  for (int i = 0; i < s_count; ++i) {
    int ones = 0;
    bool other = false;
    for (SparseRowMatrix::InnerIterator it(agg.P, i); it; ++it) {
      if (it.value() == 1.0) {
        ++ones;
        ++col_ones[it.col()];
      } else if (it.value() != 0.0) {
        other = true;
      }
    }
    const bool terminal_ok = !agg.cyclic && i == last_state && ones == 0 && !other;
    if ((ones != 1 || other) && !terminal_ok) {
      report.violations.push_back({2, {i}, {}, other ? 1.0 : std::abs(ones - 1.0),
                                   "row " + std::to_string(i) + " is not a single successor"});
    }
  }
  for (int j = 0; j < s_count; ++j) {
    const bool initial_ok = !agg.cyclic && j == first_state && col_ones[j] == 0;
    if (col_ones[j] != 1 && !initial_ok) {
      report.violations.push_back({2, {j}, {}, std::abs(col_ones[j] - 1.0),
                                   "column " + std::to_string(j) + " is not a single predecessor"});
    }
  }
  const int nr = static_cast<int>(runs.size());
  for (int k = 0; k < nr; ++k) {
    int to = -1;
    if (k + 1 < nr) {
      to = runs[k + 1].state;
    } else if (agg.cyclic) {
      to = runs[0].state;
    }
    if (to < 0) continue;
    const double p = agg.P.coeff(runs[k].state, to);
    if (p != 1.0) {
      report.violations.push_back({2, {runs[k].state, to}, {runs[k].start}, 1.0 - p,
                                   "observed transition " + std::to_string(runs[k].state) +
                                       "->" + std::to_string(to) + " not certain in P"});
    }
  }

  // (3) Every visit lasts exactly q hours.
  for (const auto& run : runs) {
    const double dev = std::abs(run.length - agg.q[run.state]);
    if (dev > 0.0) {
      report.violations.push_back({3, {run.state}, {run.start}, dev,
                                   "run at hour " + std::to_string(run.start) + " lasts " +
                                       std::to_string(run.length) + " hours"});
    }
  }
  return report;
}

Aggregation CompressLossless(const SystemInstance& inst, double tol) {
  inst.Validate();
  const int n = inst.num_hours();
  const bool cyclic = inst.grid.cyclic;
  const Eigen::VectorXd ranges = detail::SeriesRanges(inst);
  Eigen::MatrixXd prof(n, ranges.size());
  for (int h = 0; h < n; ++h) {
    const Eigen::VectorXd p = detail::HourProfile(inst, h);
    for (int k = 0; k < p.size(); ++k) prof(h, k) = ranges[k] > 0 ? p[k] / ranges[k] : p[k];
  }
  auto close = [&](int a, int b) {
    return (prof.row(a) - prof.row(b)).lpNorm<Eigen::Infinity>() <= tol;
  };

  // (a) Run-length tokens. On a cyclic horizon start at a profile change so
  // the wrap-around run is one token.
  int start = 0;
  if (cyclic) {
    for (int h = 0; h < n; ++h) {
      if (!close(h, (h + n - 1) % n)) {
        start = h;
        break;
      }
    }
  }
  struct Token {
    int first;   // hour index of the leader (0..n-1)
    int length;
  };
  std::vector<Token> tokens;
  for (int i = 0; i < n; ++i) {
    const int h = (start + i) % n;
    if (!tokens.empty() && close(tokens.back().first, h)) {
      ++tokens.back().length;
    } else {
      tokens.push_back({h, 1});
    }
  }
  const int nt = static_cast<int>(tokens.size());

  // (b) Group tokens by profile (leader rule) and length, then refine by the
  // classes of neighbouring tokens until nothing splits.
  std::vector<int> leaders;
  std::vector<int> prof_class(nt);
  std::map<std::vector<double>, int> exact;
  for (int t = 0; t < nt; ++t) {
    const int h = tokens[t].first;
    if (tol == 0.0) {
      std::vector<double> key(prof.cols());
      for (int k = 0; k < prof.cols(); ++k) key[k] = prof(h, k);
      auto [it, inserted] = exact.emplace(key, static_cast<int>(leaders.size()));
      if (inserted) leaders.push_back(h);
      prof_class[t] = it->second;
      continue;
    }
    int found = -1;
    for (int c = 0; c < static_cast<int>(leaders.size()); ++c) {
      if (close(leaders[c], h)) {
        found = c;
        break;
      }
    }
    if (found < 0) {
      found = static_cast<int>(leaders.size());
      leaders.push_back(h);
    }
    prof_class[t] = found;
  }
  std::vector<int> cls(nt);
  int num_classes = 0;
  {
    std::map<std::pair<int, int>, int> ids;
    for (int t = 0; t < nt; ++t) {
      auto [it, inserted] = ids.emplace(std::make_pair(prof_class[t], tokens[t].length),
                                        static_cast<int>(ids.size()));
      cls[t] = it->second;
    }
    num_classes = static_cast<int>(ids.size());
  }
  while (true) {
    std::map<std::tuple<int, int, int>, int> ids;
    std::vector<int> refined(nt);
    for (int t = 0; t < nt; ++t) {
      int succ = t + 1 < nt ? cls[t + 1] : (cyclic ? cls[0] : -1);
      int pred = t > 0 ? cls[t - 1] : (cyclic ? cls[nt - 1] : -1);
      auto [it, inserted] =
          ids.emplace(std::make_tuple(cls[t], succ, pred), static_cast<int>(ids.size()));
      refined[t] = it->second;
    }
    const int count = static_cast<int>(ids.size());
    cls.swap(refined);
    if (count == num_classes) break;
    num_classes = count;
  }

  // States numbered by first appearance in chronological order.
  Eigen::VectorXi token_of_hour(n);
  for (int t = 0; t < nt; ++t) {
    for (int i = 0; i < tokens[t].length; ++i) token_of_hour[(tokens[t].first + i) % n] = t;
  }
  std::vector<int> state_of_class(num_classes, -1);
  int next = 0;
  Eigen::VectorXi gamma(n);
  for (int h = 0; h < n; ++h) {
    int& s = state_of_class[cls[token_of_hour[h]]];
    if (s < 0) s = next++;
    gamma[h] = s;
  }
  Aggregation agg = AggregationFromAssignment(inst, gamma, next);
  if (CheckLossless(agg, inst, tol).lossless()) return agg;
  return AggregateIdentity(inst);
}

}  // namespace storeplan
