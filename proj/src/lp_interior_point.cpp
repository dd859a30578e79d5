#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <Eigen/SparseCholesky>

#include "storeplan/lp.hpp"

namespace storeplan::lp {

using Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

int Problem::AddVariable(double cost, bool nonnegative, double quadratic) {
  cost_.push_back(cost);
  quad_.push_back(quadratic);
  nonneg_.push_back(nonnegative ? 1 : 0);
  return static_cast<int>(cost_.size()) - 1;
}

int Problem::AddRow(RowSense sense, double rhs) {
  sense_.push_back(sense);
  rhs_.push_back(rhs);
  return static_cast<int>(rhs_.size()) - 1;
}

void Problem::AddCoefficient(int row, int col, double value) {
  if (value != 0.0) entries_.emplace_back(row, col, value);
}

double Problem::Objective(const VectorXd& x) const {
  double obj = 0.0;
  for (int j = 0; j < num_variables(); ++j) {
    obj += cost_[j] * x[j] + 0.5 * quad_[j] * x[j] * x[j];
  }
  return obj;
}

std::string_view StatusName(Status status) {
  switch (status) {
    case Status::kOptimal: return "optimal";
    case Status::kInfeasible: return "infeasible";
    case Status::kUnbounded: return "unbounded";
    case Status::kIterationLimit: return "iteration-limit";
    case Status::kNumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

const Solver& DefaultSolver() {
  static const InteriorPointSolver solver;
  return solver;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double MaxNorm(const VectorXd& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

// Standard form: A x = b with x_j >= 0 on `bounded` columns.
struct StandardForm {
  int rows = 0;
  int cols = 0;
  int original_cols = 0;
  SpMat a;
  VectorXd b, c, q;
  std::vector<char> bounded;
  bool has_quadratic = false;
};

StandardForm ToStandardForm(const Problem& p) {
  StandardForm sf;
  sf.rows = p.num_rows();
  sf.original_cols = p.num_variables();
  std::vector<Eigen::Triplet<double>> trip = p.entries();
  int col = sf.original_cols;
  std::vector<double> c = p.cost();
  std::vector<double> q = p.quadratic();
  std::vector<char> bounded = p.nonnegative();
  for (int i = 0; i < sf.rows; ++i) {
    if (p.sense()[i] == RowSense::kEqual) continue;
    trip.emplace_back(i, col, p.sense()[i] == RowSense::kLessEqual ? 1.0 : -1.0);
    c.push_back(0.0);
    q.push_back(0.0);
    bounded.push_back(1);
    ++col;
  }
  sf.cols = col;
  sf.a.resize(sf.rows, sf.cols);
  sf.a.setFromTriplets(trip.begin(), trip.end());
  sf.a.makeCompressed();
  sf.b = Eigen::Map<const VectorXd>(p.rhs().data(), sf.rows);
  sf.c = Eigen::Map<const VectorXd>(c.data(), sf.cols);
  sf.q = Eigen::Map<const VectorXd>(q.data(), sf.cols);
  sf.bounded = std::move(bounded);
  sf.has_quadratic = (sf.q.array() > 0).any();
  return sf;
}

// Ruiz equilibration of A; returns row and column scale vectors so that the
// scaled matrix is diag(row) * A * diag(col).
void Equilibrate(const SpMat& a, VectorXd& row, VectorXd& col) {
  row = VectorXd::Ones(a.rows());
  col = VectorXd::Ones(a.cols());
  SpMat work = a;
  for (int pass = 0; pass < 12; ++pass) {
    VectorXd rmax = VectorXd::Zero(a.rows());
    VectorXd cmax = VectorXd::Zero(a.cols());
    for (int j = 0; j < work.outerSize(); ++j) {
      for (SpMat::InnerIterator it(work, j); it; ++it) {
        const double v = std::abs(it.value());
        rmax[it.row()] = std::max(rmax[it.row()], v);
        cmax[j] = std::max(cmax[j], v);
      }
    }
    double worst = 0.0;
    for (int i = 0; i < rmax.size(); ++i) {
      if (rmax[i] > 0) {
        worst = std::max(worst, std::abs(1.0 - rmax[i]));
        rmax[i] = 1.0 / std::sqrt(rmax[i]);
      } else {
        rmax[i] = 1.0;
      }
    }
    for (int j = 0; j < cmax.size(); ++j) {
      if (cmax[j] > 0) {
        worst = std::max(worst, std::abs(1.0 - cmax[j]));
        cmax[j] = 1.0 / std::sqrt(cmax[j]);
      } else {
        cmax[j] = 1.0;
      }
    }
    for (int j = 0; j < work.outerSize(); ++j) {
      for (SpMat::InnerIterator it(work, j); it; ++it) {
        it.valueRef() *= rmax[it.row()] * cmax[j];
      }
    }
    row.array() *= rmax.array();
    col.array() *= cmax.array();
    if (worst < 1e-3) break;
  }
}

// Longest step in [0, 1] keeping v + step * dv >= 0 on bounded entries.
double MaxStep(const VectorXd& v, const VectorXd& dv, const std::vector<char>& bounded) {
  double step = 1.0;
  for (int j = 0; j < v.size(); ++j) {
    if (bounded[j] && dv[j] < 0) step = std::min(step, -v[j] / dv[j]);
  }
  return step;
}

class KktSystem {
 public:
  KktSystem(const SpMat& a, const VectorXd& q) : a_(a), q_(q) {
    const int n = static_cast<int>(a.cols());
    const int m = static_cast<int>(a.rows());
    dim_ = n + m;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(a.nonZeros() + dim_);
    for (int j = 0; j < n; ++j) trip.emplace_back(j, j, -1.0);
    for (int i = 0; i < m; ++i) trip.emplace_back(n + i, n + i, 1.0);
    for (int j = 0; j < a.outerSize(); ++j) {
      for (SpMat::InnerIterator it(a, j); it; ++it) {
        trip.emplace_back(n + static_cast<int>(it.row()), j, it.value());
      }
    }
    k_.resize(dim_, dim_);
    k_.setFromTriplets(trip.begin(), trip.end());
    k_.makeCompressed();
    diag_pos_.resize(dim_);
    for (int j = 0; j < dim_; ++j) {
      for (int p = k_.outerIndexPtr()[j]; p < k_.outerIndexPtr()[j + 1]; ++p) {
        if (k_.innerIndexPtr()[p] == j) {
          diag_pos_[j] = p;
          break;
        }
      }
    }
    ldlt_.analyzePattern(k_);
  }

  // Factorizes [-(Q + D + reg_p) A^T; A reg_d].
  bool Factorize(const VectorXd& d, double reg_p, double reg_d) {
    const int n = static_cast<int>(a_.cols());
    d_ = d;
    for (int j = 0; j < n; ++j) k_.valuePtr()[diag_pos_[j]] = -(q_[j] + d[j] + reg_p);
    for (int i = n; i < dim_; ++i) k_.valuePtr()[diag_pos_[i]] = reg_d;
    ldlt_.factorize(k_);
    if (ldlt_.info() != Eigen::Success) return false;
    const VectorXd& piv = ldlt_.vectorD();
    return piv.allFinite() && (piv.array() != 0.0).all();
  }

  // Solves the unregularized system with iterative refinement.
  VectorXd Solve(const VectorXd& rhs) const {
    VectorXd sol = ldlt_.solve(rhs);
    const double scale = 1.0 + MaxNorm(rhs);
    for (int k = 0; k < 4; ++k) {
      VectorXd res = rhs - Apply(sol);
      if (MaxNorm(res) <= 1e-15 * scale) break;
      sol += ldlt_.solve(res);
    }
    last_residual_ = MaxNorm(rhs - Apply(sol)) / scale;
    return sol;
  }

 private:
  VectorXd Apply(const VectorXd& v) const {
    const int n = static_cast<int>(a_.cols());
    const int m = static_cast<int>(a_.rows());
    VectorXd out(dim_);
    out.head(n) = -(q_ + d_).cwiseProduct(v.head(n)) + a_.transpose() * v.tail(m);
    out.tail(m) = a_ * v.head(n);
    return out;
  }

  mutable double last_residual_ = 0.0;

 public:
  double last_residual() const { return last_residual_; }

 private:
  const SpMat& a_;
  const VectorXd& q_;
  VectorXd d_;
  int dim_ = 0;
  SpMat k_;
  std::vector<int> diag_pos_;
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
};

}  // namespace

Solution InteriorPointSolver::Solve(const Problem& problem) const {
  StandardForm sf = ToStandardForm(problem);
  const int m = sf.rows;
  const int n = sf.cols;
  const std::vector<char>& bounded = sf.bounded;
  int n_bounded = 0;
  for (char b : bounded) n_bounded += b ? 1 : 0;

  Solution out;
  if (m == 0) {
    // No constraints: minimize each coordinate independently.
    out.x = VectorXd::Zero(n);
    for (int j = 0; j < n; ++j) {
      if (sf.q[j] > 0) {
        out.x[j] = -sf.c[j] / sf.q[j];
        if (bounded[j]) out.x[j] = std::max(0.0, out.x[j]);
      } else if (sf.c[j] < 0 || (!bounded[j] && sf.c[j] != 0)) {
        out.status = Status::kUnbounded;
        return out;
      }
    }
    out.x.conservativeResize(sf.original_cols);
    out.row_duals.resize(0);
    out.reduced_costs = Eigen::Map<const VectorXd>(problem.cost().data(), sf.original_cols) +
                        Eigen::Map<const VectorXd>(problem.quadratic().data(), sf.original_cols)
                            .cwiseProduct(out.x);
    out.objective = problem.Objective(out.x);
    out.status = Status::kOptimal;
    return out;
  }

  VectorXd row_scale, col_scale;
  Equilibrate(sf.a, row_scale, col_scale);
  SpMat a = row_scale.asDiagonal() * sf.a * col_scale.asDiagonal();
  a.makeCompressed();
  VectorXd b = row_scale.cwiseProduct(sf.b);
  VectorXd c = col_scale.cwiseProduct(sf.c);
  const double b_scale = std::max(1.0, MaxNorm(b));
  const double c_scale = std::max(1.0, MaxNorm(c));
  b /= b_scale;
  c /= c_scale;
  VectorXd q = col_scale.cwiseProduct(col_scale).cwiseProduct(sf.q) * (b_scale / c_scale);

  KktSystem kkt(a, q);
  double reg_p = 1e-10;
  double reg_d = 1e-10;
  auto factorize = [&](const VectorXd& d) {
    for (int attempt = 0; attempt < 6; ++attempt) {
      if (kkt.Factorize(d, reg_p, reg_d)) return true;
      reg_p *= 100.0;
      reg_d *= 100.0;
    }
    return false;
  };

  // Mehrotra's starting point.
  VectorXd x(n), y(m), z(n);
  {
    if (!factorize(VectorXd::Ones(n))) {
      out.status = Status::kNumericalFailure;
      return out;
    }
    VectorXd rhs = VectorXd::Zero(n + m);
    rhs.tail(m) = b;
    x = kkt.Solve(rhs).head(n);
    rhs.head(n) = c;
    rhs.tail(m).setZero();
    VectorXd sol = kkt.Solve(rhs);
    y = sol.tail(m);
    z = c + q.cwiseProduct(x) - a.transpose() * y;
    double min_x = kInf, min_z = kInf;
    for (int j = 0; j < n; ++j) {
      if (!bounded[j]) continue;
      min_x = std::min(min_x, x[j]);
      min_z = std::min(min_z, z[j]);
    }
    if (n_bounded > 0) {
      const double shift_x = std::max(-1.5 * min_x, 0.0);
      const double shift_z = std::max(-1.5 * min_z, 0.0);
      double xz = 0.0, sx = 0.0, sz = 0.0;
      for (int j = 0; j < n; ++j) {
        if (!bounded[j]) continue;
        x[j] += shift_x;
        z[j] += shift_z;
        xz += x[j] * z[j];
        sx += x[j];
        sz += z[j];
      }
      const double dx = sz > 0 ? 0.5 * xz / sz : 1.0;
      const double dz = sx > 0 ? 0.5 * xz / sx : 1.0;
      for (int j = 0; j < n; ++j) {
        if (!bounded[j]) {
          z[j] = 0.0;
          continue;
        }
        x[j] = std::max(x[j] + dx, 1e-4);
        z[j] = std::max(z[j] + dz, 1e-4);
      }
    }
  }

  const double b_norm = MaxNorm(b);
  const double c_norm = MaxNorm(c);
  VectorXd best_x = x, best_y = y, best_z = z;
  double best_merit = kInf;
  int stall = 0;
  int iter = 0;
  Status status = Status::kIterationLimit;
  VectorXd dx(n), dy(m), dz(n), d(n), rc(n);

  auto measure = [&](const VectorXd& xv, const VectorXd& yv, const VectorXd& zv, double& pinf,
                     double& dinf, double& gap) {
    const VectorXd rp = b - a * xv;
    const VectorXd rd = c + q.cwiseProduct(xv) - a.transpose() * yv - zv;
    pinf = MaxNorm(rp) / (1.0 + b_norm);
    dinf = MaxNorm(rd) / (1.0 + c_norm);
    const double quad = 0.5 * xv.dot(q.cwiseProduct(xv));
    const double pobj = c.dot(xv) + quad;
    const double dobj = b.dot(yv) - quad;
    gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));
  };

  for (iter = 0; iter < options_.max_iterations; ++iter) {
    const VectorXd rp = b - a * x;
    const VectorXd rd = c + q.cwiseProduct(x) - a.transpose() * y - z;
    double pinf, dinf, gap;
    measure(x, y, z, pinf, dinf, gap);
    double mu = 0.0;
    for (int j = 0; j < n; ++j) {
      if (bounded[j]) mu += x[j] * z[j];
    }
    mu = n_bounded > 0 ? mu / n_bounded : 0.0;
    const double merit = std::max({pinf, dinf, gap});
    if (options_.verbose) {
      std::fprintf(stderr, "ipm %3d pinf %.2e dinf %.2e gap %.2e mu %.2e\n", iter, pinf, dinf,
                   gap, mu);
    }
    if (!std::isfinite(merit)) {
      status = Status::kNumericalFailure;
      break;
    }
    if (merit < best_merit) {
      stall = merit < 0.9 * best_merit ? 0 : stall + 1;
      best_merit = merit;
      best_x = x;
      best_y = y;
      best_z = z;
    } else {
      ++stall;
    }
    if (merit <= options_.tolerance) {
      status = Status::kOptimal;
      break;
    }
    if (stall >= 40) break;
    if (MaxNorm(x) > 1e14) {
      status = Status::kUnbounded;
      break;
    }
    if (MaxNorm(y) > 1e14 || MaxNorm(z) > 1e14) {
      status = Status::kInfeasible;
      break;
    }

    for (int j = 0; j < n; ++j) d[j] = bounded[j] ? z[j] / x[j] : 0.0;
    if (!factorize(d)) {
      status = Status::kNumericalFailure;
      break;
    }

    auto direction = [&](const VectorXd& rcomp) {
      VectorXd rhs(n + m);
      for (int j = 0; j < n; ++j) {
        rhs[j] = rd[j] - (bounded[j] ? rcomp[j] / x[j] : 0.0);
      }
      rhs.tail(m) = rp;
      const VectorXd sol = kkt.Solve(rhs);
      dx = sol.head(n);
      dy = sol.tail(m);
      for (int j = 0; j < n; ++j) {
        dz[j] = bounded[j] ? (rcomp[j] - z[j] * dx[j]) / x[j] : 0.0;
      }
    };

    // Predictor.
    for (int j = 0; j < n; ++j) rc[j] = bounded[j] ? -x[j] * z[j] : 0.0;
    direction(rc);
    double ap = MaxStep(x, dx, bounded);
    double ad = MaxStep(z, dz, bounded);
    if (sf.has_quadratic) ap = ad = std::min(ap, ad);
    double mu_aff = 0.0;
    for (int j = 0; j < n; ++j) {
      if (bounded[j]) mu_aff += (x[j] + ap * dx[j]) * (z[j] + ad * dz[j]);
    }
    mu_aff = n_bounded > 0 ? mu_aff / n_bounded : 0.0;
    const double sigma = mu > 0 ? std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3) : 0.0;

    // Corrector.
    for (int j = 0; j < n; ++j) {
      rc[j] = bounded[j] ? sigma * mu - x[j] * z[j] - dx[j] * dz[j] : 0.0;
    }
    direction(rc);
    ap = MaxStep(x, dx, bounded);
    ad = MaxStep(z, dz, bounded);
    const double eta = std::max(0.95, 1.0 - 10.0 * mu);
    ap = std::min(1.0, eta * ap);
    ad = std::min(1.0, eta * ad);
    if (sf.has_quadratic) ap = ad = std::min(ap, ad);
    if (options_.verbose) std::fprintf(stderr, "    step p %.3e d %.3e sigma %.2e res %.2e reg %.1e\n", ap, ad, sigma, kkt.last_residual(), reg_p);
    x += ap * dx;
    y += ad * dy;
    z += ad * dz;
  }

  if (status == Status::kIterationLimit || (status == Status::kNumericalFailure && best_merit < kInf)) {
    x = best_x;
    y = best_y;
    z = best_z;
    status = best_merit <= options_.fallback_tolerance ? Status::kOptimal
             : iter >= options_.max_iterations          ? Status::kIterationLimit
                                                        : Status::kNumericalFailure;
  }

  // Unscale: x = b_scale * C x~, y = c_scale * R y~.
  VectorXd x_full = b_scale * col_scale.cwiseProduct(x);
  VectorXd y_full = c_scale * row_scale.cwiseProduct(y);
  out.status = status;
  out.iterations = iter;
  out.x = x_full.head(sf.original_cols);
  out.row_duals = y_full;
  const VectorXd red = sf.c + sf.q.cwiseProduct(x_full) - sf.a.transpose() * y_full;
  out.reduced_costs = red.head(sf.original_cols);
  out.objective = problem.Objective(out.x);
  {
    double pinf, dinf, gap;
    measure(x, y, z, pinf, dinf, gap);
    out.primal_infeasibility = pinf;
    out.dual_infeasibility = dinf;
    out.relative_gap = gap;
  }
  return out;
}

}  // namespace storeplan::lp
