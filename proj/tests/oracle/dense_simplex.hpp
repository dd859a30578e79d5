#pragma once

// Test-only oracle: a textbook two-phase dense tableau simplex with Bland's
// rule, plus an independent construction of the planning LP. Nothing here
// shares code with the production LP builder or interior-point solver.

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "storeplan/instance.hpp"

namespace oracle {

enum class Sense { kEq, kLe, kGe };

struct DenseLp {
  std::vector<std::vector<double>> a;  // rows
  std::vector<Sense> sense;
  std::vector<double> b;
  std::vector<double> c;
  std::vector<bool> free_var;

  int AddVar(double cost, bool is_free = false) {
    c.push_back(cost);
    free_var.push_back(is_free);
    for (auto& row : a) row.push_back(0.0);
    return static_cast<int>(c.size()) - 1;
  }
  int AddRow(Sense s, double rhs) {
    a.emplace_back(c.size(), 0.0);
    sense.push_back(s);
    b.push_back(rhs);
    return static_cast<int>(b.size()) - 1;
  }
};

struct DenseResult {
  bool optimal = false;
  double objective = 0.0;
  std::vector<double> x;
};

// Two-phase simplex on min c x, A x (sense) b, x >= 0 except free columns.
inline DenseResult SolveDense(const DenseLp& lp) {
  const double eps = 1e-10;
  const int m = static_cast<int>(lp.b.size());
  const int n0 = static_cast<int>(lp.c.size());
  // Column layout: for each original var one (or two, if free) columns,
  // then slacks, then artificials.
  std::vector<int> pos(n0), neg(n0, -1);
  int cols = 0;
  for (int j = 0; j < n0; ++j) {
    pos[j] = cols++;
    if (lp.free_var[j]) neg[j] = cols++;
  }
  std::vector<int> slack(m, -1);
  for (int i = 0; i < m; ++i) {
    if (lp.sense[i] != Sense::kEq) slack[i] = cols++;
  }
  const int art0 = cols;
  cols += m;
  // Tableau rows 0..m-1; row m = objective (phase-specific).
  std::vector<std::vector<double>> t(m + 1, std::vector<double>(cols + 1, 0.0));
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) {
    double sign = lp.b[i] < 0 ? -1.0 : 1.0;
    for (int j = 0; j < n0; ++j) {
      t[i][pos[j]] = sign * lp.a[i][j];
      if (neg[j] >= 0) t[i][neg[j]] = -sign * lp.a[i][j];
    }
    if (slack[i] >= 0) t[i][slack[i]] = sign * (lp.sense[i] == Sense::kLe ? 1.0 : -1.0);
    t[i][art0 + i] = 1.0;
    t[i][cols] = sign * lp.b[i];
    basis[i] = art0 + i;
  }
  auto pivot = [&](int r, int col) {
    const double pv = t[r][col];
    for (double& v : t[r]) v /= pv;
    for (int i = 0; i <= m; ++i) {
      if (i == r || std::abs(t[i][col]) < 1e-15) continue;
      const double f = t[i][col];
      for (int j = 0; j <= cols; ++j) t[i][j] -= f * t[r][j];
    }
    basis[r] = col;
  };
  auto run = [&](const std::vector<double>& cost, int allowed_cols) -> bool {
    // Objective row: reduced costs c_j - c_B B^-1 A_j; rhs holds -c_B x_B.
    for (int j = 0; j <= cols; ++j) t[m][j] = j < cols ? cost[j] : 0.0;
    for (int i = 0; i < m; ++i) {
      const double cb = cost[basis[i]];
      if (cb == 0.0) continue;
      for (int j = 0; j <= cols; ++j) t[m][j] -= cb * t[i][j];
    }
    for (int iter = 0; iter < 100000; ++iter) {
      int enter = -1;
      for (int j = 0; j < allowed_cols; ++j) {
        if (t[m][j] < -eps) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        if (t[i][enter] > eps) {
          const double ratio = t[i][cols] / t[i][enter];
          if (ratio < best - 1e-12 || (std::abs(ratio - best) <= 1e-12 && basis[i] < basis[leave])) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) return false;  // unbounded
      pivot(leave, enter);
    }
    throw std::runtime_error("dense simplex iteration limit");
  };
  std::vector<double> phase1(cols, 0.0);
  for (int i = 0; i < m; ++i) phase1[art0 + i] = 1.0;
  run(phase1, cols);
  if (-t[m][cols] > 1e-7) return {};  // infeasible
  // Drive remaining artificials out of the basis where possible.
  for (int i = 0; i < m; ++i) {
    if (basis[i] < art0) continue;
    for (int j = 0; j < art0; ++j) {
      if (std::abs(t[i][j]) > 1e-9) {
        pivot(i, j);
        break;
      }
    }
  }
  std::vector<double> phase2(cols, 0.0);
  for (int j = 0; j < n0; ++j) {
    phase2[pos[j]] = lp.c[j];
    if (neg[j] >= 0) phase2[neg[j]] = -lp.c[j];
  }
  if (!run(phase2, art0)) return {};
  DenseResult res;
  res.optimal = true;
  std::vector<double> col_val(cols, 0.0);
  for (int i = 0; i < m; ++i) col_val[basis[i]] = t[i][cols];
  res.x.resize(n0);
  for (int j = 0; j < n0; ++j) {
    res.x[j] = col_val[pos[j]] - (neg[j] >= 0 ? col_val[neg[j]] : 0.0);
    res.objective += lp.c[j] * res.x[j];
  }
  return res;
}

// Independent statement of the planning LP: rows are listed directly from
// the model (demand, capacity, balance, |r| <= t, s <= u).
inline DenseResult SolvePlanningLp(const storeplan::SystemInstance& inst, bool with_storage) {
  const int n = inst.num_hours();
  const int m = inst.num_generators();
  DenseLp lp;
  std::vector<std::vector<int>> x(m, std::vector<int>(n));
  std::vector<int> z(m), r(n), s(n);
  for (int g = 0; g < m; ++g) {
    for (int h = 0; h < n; ++h) x[g][h] = lp.AddVar(inst.generators[g].var_cost[h]);
    z[g] = lp.AddVar(inst.generators[g].cap_cost);
  }
  int t = -1, u = -1;
  if (with_storage) {
    t = lp.AddVar(inst.storage.door_cost);
    u = lp.AddVar(inst.storage.room_cost);
    for (int h = 0; h < n; ++h) r[h] = lp.AddVar(0.0, /*is_free=*/true);
    for (int h = 0; h < n; ++h) s[h] = lp.AddVar(0.0);
  }
  for (int h = 0; h < n; ++h) {
    // generation = demand + charging
    const int row = lp.AddRow(Sense::kEq, inst.demand[h]);
    for (int g = 0; g < m; ++g) lp.a[row][x[g][h]] = 1.0;
    if (with_storage) lp.a[row][r[h]] = -1.0;
    for (int g = 0; g < m; ++g) {
      const int cap = lp.AddRow(Sense::kLe, 0.0);
      lp.a[cap][x[g][h]] = 1.0;
      lp.a[cap][z[g]] = -inst.generators[g].availability[h];
    }
    if (!with_storage) continue;
    // s_h - s_{h-1} - r_h = 0
    const int bal = lp.AddRow(Sense::kEq, 0.0);
    lp.a[bal][s[h]] += 1.0;
    lp.a[bal][r[h]] = -1.0;
    if (h > 0) {
      lp.a[bal][s[h - 1]] -= 1.0;
    } else if (inst.grid.cyclic) {
      lp.a[bal][s[n - 1]] -= 1.0;
    }
    const int up = lp.AddRow(Sense::kLe, 0.0);
    lp.a[up][r[h]] = 1.0;
    lp.a[up][t] = -1.0;
    const int down = lp.AddRow(Sense::kGe, 0.0);
    lp.a[down][r[h]] = 1.0;
    lp.a[down][t] = 1.0;
    const int room = lp.AddRow(Sense::kLe, 0.0);
    lp.a[room][s[h]] = 1.0;
    lp.a[room][u] = -1.0;
  }
  return SolveDense(lp);
}

}  // namespace oracle
