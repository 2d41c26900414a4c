#pragma once

#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "gridflex/error.hpp"

namespace gridflex::lp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Sense { LessEqual, Equal, GreaterEqual };
enum class Status { Optimal, Infeasible, Unbounded };

const char* to_string(Status status);

class LpProblem;

/// Dense variable index, tagged with the problem that issued it.
class VarId {
 public:
  int index() const { return index_; }
  bool operator==(const VarId&) const = default;

 private:
  friend class LpProblem;
  VarId(int index, std::uint32_t owner) : index_(index), owner_(owner) {}
  int index_;
  std::uint32_t owner_;
};

class ConstraintId {
 public:
  int index() const { return index_; }
  bool operator==(const ConstraintId&) const = default;

 private:
  friend class LpProblem;
  ConstraintId(int index, std::uint32_t owner) : index_(index), owner_(owner) {}
  int index_;
  std::uint32_t owner_;
};

/// Sum of coefficient * variable plus a constant. Repeated variables are
/// merged, so each VarId appears at most once.
class LinearExpr {
 public:
  LinearExpr() = default;
  LinearExpr(std::initializer_list<std::pair<VarId, double>> terms, double constant = 0.0);

  LinearExpr& add(VarId var, double coeff);
  LinearExpr& add_constant(double value) {
    constant_ += value;
    return *this;
  }

  const std::vector<std::pair<VarId, double>>& terms() const { return terms_; }
  double constant() const { return constant_; }

 private:
  std::vector<std::pair<VarId, double>> terms_;
  double constant_ = 0.0;
};

/// Linear program `min c'x  s.t.  lo <= Ax (sense rhs), lb <= x <= ub`,
/// built incrementally. Single owner while under construction.
class LpProblem {
 public:
  LpProblem();

  /// Throws Error when lb > ub, either bound is NaN, or obj_coeff is not finite.
  VarId add_variable(double lb, double ub, double obj_coeff, std::string name = {});
  /// The expression's constant is moved to the right-hand side. Throws Error
  /// on a VarId issued by another problem.
  ConstraintId add_constraint(const LinearExpr& expr, Sense sense, double rhs,
                              std::string name = {});
  void set_objective(VarId var, double coeff);

  int num_variables() const { return static_cast<int>(lower_.size()); }
  int num_constraints() const { return static_cast<int>(sense_.size()); }

  double lower(int j) const { return lower_[j]; }
  double upper(int j) const { return upper_[j]; }
  double objective(int j) const { return objective_[j]; }
  Sense sense(int i) const { return sense_[i]; }
  double rhs(int i) const { return rhs_[i]; }
  const std::string& variable_name(int j) const { return var_names_[j]; }
  const std::string& constraint_name(int i) const { return row_names_[i]; }

  /// Constraint matrix (rows = constraints), column-major.
  Eigen::SparseMatrix<double> matrix() const;
  /// Row i as (column, coefficient) pairs in insertion order.
  const std::vector<std::pair<int, double>>& row(int i) const { return rows_[i]; }

  bool owns(VarId v) const { return v.owner_ == id_ && v.index_ < num_variables(); }
  bool owns(ConstraintId c) const { return c.owner_ == id_ && c.index_ < num_constraints(); }

 private:
  void check(VarId v) const;

  std::uint32_t id_;
  std::vector<double> lower_, upper_, objective_;
  std::vector<std::string> var_names_;
  std::vector<std::vector<std::pair<int, double>>> rows_;
  std::vector<Sense> sense_;
  std::vector<double> rhs_;
  std::vector<std::string> row_names_;
};

/// Primal/dual solution. Duals follow one convention throughout: dual[i] is
/// the change in the optimal objective per unit increase of rhs[i]. For a
/// minimization this makes binding <= rows non-positive, binding >= rows
/// non-negative, and the dual of a nodal balance row the nodal price.
struct LpSolution {
  Status status = Status::Infeasible;
  double objective = 0.0;
  Eigen::VectorXd primal;        // per variable
  Eigen::VectorXd dual;          // per constraint
  Eigen::VectorXd reduced_cost;  // per variable
  Eigen::VectorXd row_activity;  // per constraint, A x
  int iterations = 0;

  double value(VarId v) const { return primal[v.index()]; }
  double dual_of(ConstraintId c) const { return dual[c.index()]; }
  bool optimal() const { return status == Status::Optimal; }
};

struct SimplexOptions {
  double feasibility_tol = 1e-7;
  double optimality_tol = 1e-7;
  double pivot_tol = 1e-10;
  int refactor_interval = 100;
  int bland_stall_threshold = 50;  // consecutive degenerate pivots before Bland's rule
  int iteration_limit = 0;         // 0 = automatic, scaled with problem size
};

class IterationLimitError : public Error {
 public:
  IterationLimitError(int iterations)
      : Error("simplex iteration limit reached after " + std::to_string(iterations) +
              " iterations"),
        iterations_(iterations) {}
  int iterations() const { return iterations_; }

 private:
  int iterations_;
};

class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double pivot)
      : Error(what + " (pivot magnitude " + std::to_string(pivot) + ")"), pivot_(pivot) {}
  double pivot_magnitude() const { return pivot_; }

 private:
  double pivot_;
};

/// Bounded-variable revised primal simplex (two-phase). Deterministic for a
/// given problem. Throws IterationLimitError or NumericalError; infeasible and
/// unbounded problems are reported through `status`, not exceptions.
LpSolution solve(const LpProblem& problem, const SimplexOptions& options = {});

/// Objective of the dual solution: sum_i dual_i * rhs_i plus reduced costs
/// times the bounds at which non-basic variables rest.
double dual_objective(const LpProblem& problem, const LpSolution& solution);

/// Largest bound or row violation of `primal`, with rows scaled by their
/// largest absolute coefficient.
double max_primal_violation(const LpProblem& problem, const Eigen::VectorXd& primal);

/// Writes the problem in CPLEX LP text format.
void write_lp(const LpProblem& problem, std::ostream& out);

}  // namespace gridflex::lp
