#include <atomic>
#include <cmath>

#include <fmt/format.h>

#include "gridflex/lp.hpp"

namespace gridflex::lp {

const char* to_string(Status status) {
  switch (status) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
  }
  return "?";
}

LinearExpr::LinearExpr(std::initializer_list<std::pair<VarId, double>> terms, double constant)
    : constant_(constant) {
  for (const auto& [var, coeff] : terms) add(var, coeff);
}

LinearExpr& LinearExpr::add(VarId var, double coeff) {
  for (auto& term : terms_) {
    if (term.first == var) {
      term.second += coeff;
      return *this;
    }
  }
  terms_.emplace_back(var, coeff);
  return *this;
}

namespace {
std::atomic<std::uint32_t> next_problem_id{1};
}

LpProblem::LpProblem() : id_(next_problem_id.fetch_add(1)) {}

VarId LpProblem::add_variable(double lb, double ub, double obj_coeff, std::string name) {
  if (std::isnan(lb) || std::isnan(ub)) throw Error("variable bound is NaN");
  if (lb > ub) throw Error(fmt::format("variable bounds inverted: lb {} > ub {}", lb, ub));
  if (lb == kInfinity || ub == -kInfinity) throw Error("variable bounds exclude every value");
  if (!std::isfinite(obj_coeff)) throw Error("objective coefficient must be finite");
  lower_.push_back(lb);
  upper_.push_back(ub);
  objective_.push_back(obj_coeff);
  var_names_.push_back(std::move(name));
  return VarId(num_variables() - 1, id_);
}

void LpProblem::check(VarId v) const {
  if (!owns(v)) throw Error(fmt::format("variable {} was not issued by this problem", v.index()));
}

ConstraintId LpProblem::add_constraint(const LinearExpr& expr, Sense sense, double rhs,
                                       std::string name) {
  if (!std::isfinite(rhs)) throw Error("constraint right-hand side must be finite");
  std::vector<std::pair<int, double>> row;
  row.reserve(expr.terms().size());
  for (const auto& [var, coeff] : expr.terms()) {
    check(var);
    if (!std::isfinite(coeff)) throw Error("constraint coefficient must be finite");
    if (coeff != 0.0) row.emplace_back(var.index(), coeff);
  }
  rows_.push_back(std::move(row));
  sense_.push_back(sense);
  rhs_.push_back(rhs - expr.constant());
  row_names_.push_back(std::move(name));
  return ConstraintId(num_constraints() - 1, id_);
}

void LpProblem::set_objective(VarId var, double coeff) {
  check(var);
  if (!std::isfinite(coeff)) throw Error("objective coefficient must be finite");
  objective_[var.index()] = coeff;
}

Eigen::SparseMatrix<double> LpProblem::matrix() const {
  std::vector<Eigen::Triplet<double>> triplets;
  for (int i = 0; i < num_constraints(); ++i) {
    for (const auto& [j, a] : rows_[i]) triplets.emplace_back(i, j, a);
  }
  Eigen::SparseMatrix<double> a(num_constraints(), num_variables());
  a.setFromTriplets(triplets.begin(), triplets.end());
  return a;
}

double max_primal_violation(const LpProblem& problem, const Eigen::VectorXd& x) {
  double worst = 0.0;
  for (int j = 0; j < problem.num_variables(); ++j) {
    worst = std::max(worst, problem.lower(j) - x[j]);
    worst = std::max(worst, x[j] - problem.upper(j));
  }
  for (int i = 0; i < problem.num_constraints(); ++i) {
    double activity = 0.0, norm = 0.0;
    for (const auto& [j, a] : problem.row(i)) {
      activity += a * x[j];
      norm = std::max(norm, std::abs(a));
    }
    if (norm == 0.0) norm = 1.0;
    double r = activity - problem.rhs(i);
    double v = 0.0;
    switch (problem.sense(i)) {
      case Sense::LessEqual: v = r; break;
      case Sense::GreaterEqual: v = -r; break;
      case Sense::Equal: v = std::abs(r); break;
    }
    worst = std::max(worst, v / norm);
  }
  return worst;
}

double dual_objective(const LpProblem& problem, const LpSolution& s) {
  double total = 0.0;
  for (int i = 0; i < problem.num_constraints(); ++i) total += s.dual[i] * problem.rhs(i);
  for (int j = 0; j < problem.num_variables(); ++j) {
    double d = s.reduced_cost[j];
    if (d == 0.0) continue;
    // A non-zero reduced cost only occurs at an active bound.
    double lb = problem.lower(j), ub = problem.upper(j);
    double bound = std::abs(s.primal[j] - lb) <= std::abs(s.primal[j] - ub) ? lb : ub;
    if (!std::isfinite(bound)) bound = s.primal[j];
    total += d * bound;
  }
  return total;
}

}  // namespace gridflex::lp
