#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace gridres::qp {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Vector = Eigen::VectorXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// minimize ½xᵀPx + qᵀx  subject to  Ax = b,  Gx ≤ h,  lb ≤ x ≤ ub.
///
/// P is stored with both triangles. Infinite bounds are ignored; a variable with
/// lb == ub is pinned by an equality row.
struct Problem {
  SparseMatrix P;
  Vector q;
  SparseMatrix A;
  Vector b;
  SparseMatrix G;
  Vector h;
  Vector lb;
  Vector ub;
  double objective_constant = 0.0;

  int num_variables() const { return int(q.size()); }
  double objective(const Vector& x) const;
};

using Terms = std::vector<std::pair<int, double>>;

/// Incremental assembly of a Problem from scalar rows.
class Builder {
 public:
  int add_variable(double lb, double ub, double cost = 0.0);
  void set_bounds(int var, double lb, double ub);
  void add_cost(int var, double cost);
  /// Adds weight·(Σ a_k x_k)² to the objective.
  void add_square(const Terms& terms, double weight = 1.0);
  void add_equality(const Terms& terms, double rhs);
  /// Σ a_k x_k ≤ rhs.
  void add_inequality(const Terms& terms, double rhs);
  void add_constant(double c) { constant_ += c; }

  int num_variables() const { return int(lb_.size()); }
  int num_equalities() const { return int(eq_rhs_.size()); }
  int num_inequalities() const { return int(in_rhs_.size()); }

  Problem build() const;

 private:
  std::vector<double> lb_, ub_, cost_;
  std::vector<Eigen::Triplet<double>> p_, a_, g_;
  std::vector<double> eq_rhs_, in_rhs_;
  double constant_ = 0.0;
};

struct Settings {
  /// Relative tolerance on primal/dual residuals and on the complementarity gap.
  double tolerance = 1e-8;
  /// Accepted for the best iterate when progress stops before `tolerance` is met.
  double inaccurate_tolerance = 1e-6;
  int max_iterations = 200;
  /// Static regularisation of the KKT system, removed again by iterative refinement.
  double regularization = 1e-9;
  int refinement_steps = 10;
};

enum class Status { Solved, SolvedInaccurate, MaxIterations, NumericalError };

inline bool usable(Status s) { return s == Status::Solved || s == Status::SolvedInaccurate; }

struct Solution {
  Vector x;
  Vector y;  ///< equality multipliers (including pinned variables)
  Vector z;  ///< inequality multipliers (including finite bounds)
  double objective = 0.0;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  Status status = Status::NumericalError;
};

/// Primal-dual interior-point method with Mehrotra predictor-corrector steps.
/// The Newton systems are solved with a sparse LDLᵀ of the regularised
/// quasi-definite KKT matrix.
Solution solve(const Problem& problem, const Settings& settings = {});

std::string to_string(Status s);

}  // namespace gridres::qp
