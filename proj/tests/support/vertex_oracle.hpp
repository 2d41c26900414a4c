#pragma once

#include "gridflex/lp.hpp"

namespace gridflex::testing {

struct OracleResult {
  lp::Status status = lp::Status::Infeasible;
  double objective = 0.0;
  Eigen::VectorXd point;
};

/// Brute-force LP solver for tiny problems: enumerates every basic solution
/// (n active constraints among rows and finite bounds) and every extreme ray
/// of the recession cone. Requires a finite lower bound on every variable so
/// the feasible region has vertices.
OracleResult enumerate_vertices(const lp::LpProblem& problem, double tol = 1e-9);

}  // namespace gridflex::testing
