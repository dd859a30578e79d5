#pragma once

#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace storeplan::lp {

enum class RowSense { kEqual, kLessEqual, kGreaterEqual };

// A convex separable-quadratic program held in sparse triplet form:
//
//   minimize    sum_j c_j x_j + 1/2 sum_j q_j x_j^2
//   subject to  a_i x  (=, <=, >=)  b_i
//               x_j >= 0 for nonnegative columns, free otherwise.
//
// q_j >= 0 is required; q = 0 everywhere gives an LP.
class Problem {
 public:
  int AddVariable(double cost, bool nonnegative = true, double quadratic = 0.0);
  int AddRow(RowSense sense, double rhs);
  void AddCoefficient(int row, int col, double value);

  int num_variables() const { return static_cast<int>(cost_.size()); }
  int num_rows() const { return static_cast<int>(rhs_.size()); }

  const std::vector<double>& cost() const { return cost_; }
  const std::vector<double>& quadratic() const { return quad_; }
  const std::vector<char>& nonnegative() const { return nonneg_; }
  const std::vector<RowSense>& sense() const { return sense_; }
  const std::vector<double>& rhs() const { return rhs_; }
  const std::vector<Eigen::Triplet<double>>& entries() const { return entries_; }

  void set_cost(int col, double cost) { cost_[col] = cost; }
  void set_rhs(int row, double rhs) { rhs_[row] = rhs; }
  void set_quadratic(int col, double q) { quad_[col] = q; }

  // Objective value of x (linear plus quadratic part).
  double Objective(const Eigen::VectorXd& x) const;

 private:
  std::vector<double> cost_;
  std::vector<double> quad_;
  std::vector<char> nonneg_;
  std::vector<RowSense> sense_;
  std::vector<double> rhs_;
  std::vector<Eigen::Triplet<double>> entries_;
};

enum class Status {
  kOptimal,
  kInfeasible,
  kUnbounded,
  kIterationLimit,
  kNumericalFailure,
};

std::string_view StatusName(Status status);

struct Solution {
  Status status = Status::kNumericalFailure;
  Eigen::VectorXd x;
  // Row duals in sensitivity form: d(objective)/d(rhs_i). Nonnegative on
  // >= rows, nonpositive on <= rows at optimality.
  Eigen::VectorXd row_duals;
  // c + Qx - A^T y; nonnegative on nonnegative columns, ~0 on free columns.
  Eigen::VectorXd reduced_costs;
  double objective = 0.0;
  int iterations = 0;
  double primal_infeasibility = 0.0;  // relative, max-norm
  double dual_infeasibility = 0.0;    // relative, max-norm
  double relative_gap = 0.0;
};

// Solvers are stateless with respect to Solve(); one instance may serve
// concurrent callers.
class Solver {
 public:
  virtual ~Solver() = default;
  virtual Solution Solve(const Problem& problem) const = 0;
};

struct InteriorPointOptions {
  double tolerance = 1e-10;
  // Tolerance accepted when the iterates stall before reaching `tolerance`.
  double fallback_tolerance = 1e-7;
  int max_iterations = 200;
  bool verbose = false;
};

// Mehrotra predictor-corrector on the regularized augmented system,
// factorized with a sparse LDL^T (AMD ordering) and improved by iterative
// refinement against the unregularized system. Ruiz equilibration is
// applied before solving.
class InteriorPointSolver final : public Solver {
 public:
  InteriorPointSolver() = default;
  explicit InteriorPointSolver(InteriorPointOptions options) : options_(options) {}

  Solution Solve(const Problem& problem) const override;

  const InteriorPointOptions& options() const { return options_; }

 private:
  InteriorPointOptions options_;
};

// Process-wide default solver.
const Solver& DefaultSolver();

}  // namespace storeplan::lp
