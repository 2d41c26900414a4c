#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gridflex/case_model.hpp"
#include "gridflex/lp.hpp"

namespace gridflex {

/// Handles of every OPF variable and row, indexed like the entities of the
/// case (generators, buses, branches, solar sites, data centers).
struct OpfVariables {
  std::vector<lp::VarId> dispatch;     // MW
  std::vector<lp::VarId> reserve;      // MW; empty when the reserve block is omitted
  std::vector<lp::VarId> angle;        // rad
  std::vector<lp::VarId> flow;         // MW, positive from -> to
  std::vector<lp::VarId> curtailment;  // MW per solar site
  std::vector<lp::VarId> dc_load;      // MW; empty in NoDc mode
  std::vector<lp::VarId> alpha;        // MW; empty unless relaxed

  std::vector<lp::ConstraintId> flow_definition;
  std::vector<lp::ConstraintId> balance;
  std::vector<lp::ConstraintId> thermal_upper;
  std::vector<lp::ConstraintId> thermal_lower;
  std::vector<lp::ConstraintId> reserve_capacity;  // P_g + r_g <= P_max
  std::vector<lp::ConstraintId> reserve_cover;     // sum_m r_m >= P_g + r_g
  std::optional<lp::ConstraintId> reference_angle;
  std::optional<lp::ConstraintId> dc_conservation;
};

struct OpfModel {
  lp::LpProblem problem;
  OpfVariables vars;
};

/// Builds the dispatch LP for `instance`. Flows are in MW:
/// P_k = base_mva * (theta_f - theta_t) / x_k.
OpfModel build_opf(const Instance& instance);

/// Physical solution. Per-entity vectors are empty unless status is Optimal.
struct DispatchResult {
  lp::Status status = lp::Status::Infeasible;
  double total_cost = 0.0;    // $/h, generation only
  double penalty_cost = 0.0;  // alpha penalty, 0 unless relaxed
  Eigen::VectorXd dispatch;
  Eigen::VectorXd reserves;
  Eigen::VectorXd angles;
  Eigen::VectorXd flows;
  Eigen::VectorXd curtailment;
  Eigen::VectorXd solar_dispatch;
  Eigen::VectorXd dc_loads;  // zeros in NoDc mode
  Eigen::VectorXd alphas;    // zeros unless relaxed
  Eigen::VectorXd lmp;       // $/MWh per bus
  int iterations = 0;

  bool optimal() const { return status == lp::Status::Optimal; }
  double sum_alpha() const { return alphas.sum(); }
  double total_curtailment() const { return curtailment.sum(); }
  /// Indices of branches with alpha above `tol`.
  std::vector<int> violated_branches(double tol = 1e-6) const;
};

/// An LP failure (iteration limit, numerical trouble) annotated with the
/// case and scenario being solved.
class SolveError : public Error {
 public:
  using Error::Error;
};

/// One-line description such as "peak/flexible beta=0.5 relaxed".
std::string describe(const ScenarioSpec& scenario);

DispatchResult solve_opf(const Instance& instance, const lp::SimplexOptions& options = {});

/// Solves with every branch limit relaxed by a penalized virtual capacity.
DispatchResult diagnose_infeasibility(const Instance& instance,
                                      const lp::SimplexOptions& options = {});

struct LmpSummary {
  Eigen::VectorXd per_bus;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;                // unweighted over buses
  double load_weighted_mean = 0.0;  // weighted by inelastic plus data-center load
};

/// Throws Error when `result` is not Optimal.
LmpSummary extract_lmp(const DispatchResult& result, const Instance& instance);

/// Checks the physical invariants of an Optimal result; returns one message
/// per violation.
std::vector<std::string> check_invariants(const DispatchResult& result, const Instance& instance);

}  // namespace gridflex
