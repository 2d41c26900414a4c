#include <doctest.h>

#include <random>
#include <sstream>

#include "gridflex/lp.hpp"
#include "support/random_lp.hpp"
#include "support/vertex_oracle.hpp"

using namespace gridflex;
using namespace gridflex::lp;
using gridflex::testing::random_small_lp;

namespace {

// Complementary slackness scaled by the row's magnitude.
double worst_slackness(const LpProblem& p, const LpSolution& s) {
  double worst = 0.0;
  for (int i = 0; i < p.num_constraints(); ++i) {
    double slack = s.row_activity[i] - p.rhs(i);
    worst = std::max(worst, std::abs(s.dual[i] * slack) / (1.0 + std::abs(p.rhs(i))));
  }
  for (int j = 0; j < p.num_variables(); ++j) {
    double d = s.reduced_cost[j];
    double gap = std::min(std::abs(s.primal[j] - p.lower(j)), std::abs(s.primal[j] - p.upper(j)));
    worst = std::max(worst, std::abs(d) * gap);
  }
  return worst;
}

// Dual feasibility of the reported multipliers.
double worst_dual_sign(const LpProblem& p, const LpSolution& s) {
  double worst = 0.0;
  for (int i = 0; i < p.num_constraints(); ++i) {
    if (p.sense(i) == Sense::LessEqual) worst = std::max(worst, s.dual[i]);
    if (p.sense(i) == Sense::GreaterEqual) worst = std::max(worst, -s.dual[i]);
  }
  for (int j = 0; j < p.num_variables(); ++j) {
    double d = s.reduced_cost[j];
    bool at_lb = std::abs(s.primal[j] - p.lower(j)) <= 1e-9;
    bool at_ub = std::abs(s.primal[j] - p.upper(j)) <= 1e-9;
    if (at_lb && at_ub) continue;
    if (at_lb) worst = std::max(worst, -d);
    else if (at_ub) worst = std::max(worst, d);
    else worst = std::max(worst, std::abs(d));
  }
  return worst;
}

}  // namespace

TEST_CASE("single variable at its cheaper bound") {
  LpProblem p;
  auto x = p.add_variable(0, 10, 1);
  auto s = solve(p);
  CHECK(s.status == Status::Optimal);
  CHECK(s.value(x) == 0.0);
}

TEST_CASE("unconstrained improving ray is unbounded") {
  LpProblem p;
  p.add_variable(0, kInfinity, -1);
  CHECK(solve(p).status == Status::Unbounded);
}

TEST_CASE("fixed variable takes its value exactly") {
  LpProblem p;
  auto x = p.add_variable(5, 5, 3);
  auto s = solve(p);
  CHECK(s.value(x) == 5.0);
  CHECK(s.objective == 15.0);
}

TEST_CASE("equality over a box") {
  LpProblem p;
  auto x = p.add_variable(0, 1, 1);
  auto y = p.add_variable(0, 1, 0);
  p.add_constraint({{x, 1}, {y, 1}}, Sense::Equal, 1);
  auto s = solve(p);
  CHECK(s.value(x) == doctest::Approx(0.0));
  CHECK(s.value(y) == doctest::Approx(1.0));
}

TEST_CASE("contradictory rows are infeasible") {
  LpProblem p;
  auto x = p.add_variable(-kInfinity, kInfinity, 0);
  p.add_constraint({{x, 1}}, Sense::LessEqual, 2);
  p.add_constraint({{x, 1}}, Sense::GreaterEqual, 3);
  CHECK(solve(p).status == Status::Infeasible);
}

TEST_CASE("scaled equality") {
  LpProblem p;
  auto x = p.add_variable(0, 10, 0);
  p.add_constraint({{x, 2}}, Sense::Equal, 4);
  CHECK(solve(p).value(x) == doctest::Approx(2.0));
}

TEST_CASE("textbook LP and the sign of its dual") {
  LpProblem p;
  auto x = p.add_variable(0, kInfinity, -1);
  auto y = p.add_variable(0, kInfinity, -1);
  auto c = p.add_constraint({{x, 1}, {y, 1}}, Sense::LessEqual, 1);
  auto s = solve(p);
  CHECK(s.objective == doctest::Approx(-1.0));
  // Relaxing a binding <= row of a minimization lowers the objective.
  CHECK(s.dual_of(c) == doctest::Approx(-1.0));
}

TEST_CASE("binding >= row has a non-negative dual") {
  LpProblem p;
  auto x = p.add_variable(0, kInfinity, 3);
  auto c = p.add_constraint({{x, 2}}, Sense::GreaterEqual, 4);
  auto s = solve(p);
  CHECK(s.value(x) == doctest::Approx(2.0));
  CHECK(s.dual_of(c) == doctest::Approx(1.5));
}

TEST_CASE("duplicated degenerate rows terminate") {
  LpProblem p;
  auto x = p.add_variable(-kInfinity, kInfinity, 1);
  p.add_constraint({{x, 1}}, Sense::GreaterEqual, 0);
  p.add_constraint({{x, 1}}, Sense::GreaterEqual, 0);
  auto s = solve(p);
  CHECK(s.status == Status::Optimal);
  CHECK(s.objective == doctest::Approx(0.0));
}

TEST_CASE("cycling example terminates with Bland's rule") {
  // Classic instance on which Dantzig pricing with naive ties cycles.
  for (int threshold : {0, 1, 50}) {
    LpProblem p;
    auto x4 = p.add_variable(0, kInfinity, -0.75);
    auto x5 = p.add_variable(0, kInfinity, 20);
    auto x6 = p.add_variable(0, kInfinity, -0.5);
    auto x7 = p.add_variable(0, kInfinity, 6);
    p.add_constraint({{x4, 0.25}, {x5, -8}, {x6, -1}, {x7, 9}}, Sense::LessEqual, 0);
    p.add_constraint({{x4, 0.5}, {x5, -12}, {x6, -0.5}, {x7, 3}}, Sense::LessEqual, 0);
    p.add_constraint({{x6, 1}}, Sense::LessEqual, 1);
    SimplexOptions opt;
    opt.bland_stall_threshold = threshold;
    auto s = solve(p, opt);
    CHECK(s.status == Status::Optimal);
    CHECK(s.objective == doctest::Approx(-1.25));
  }
}

TEST_CASE("Klee-Minty cube") {
  const int n = 6;
  LpProblem p;
  std::vector<VarId> x;
  for (int j = 0; j < n; ++j) x.push_back(p.add_variable(0, kInfinity, -std::pow(2.0, n - 1 - j)));
  for (int i = 0; i < n; ++i) {
    LinearExpr e;
    for (int j = 0; j < i; ++j) e.add(x[j], std::pow(2.0, i - j + 1));
    e.add(x[i], 1);
    p.add_constraint(e, Sense::LessEqual, std::pow(5.0, i + 1));
  }
  auto s = solve(p);
  CHECK(s.objective == doctest::Approx(-std::pow(5.0, n)));
}

TEST_CASE("iteration limit is reported distinctly") {
  LpProblem p;
  std::vector<VarId> x;
  for (int j = 0; j < 4; ++j) x.push_back(p.add_variable(0, kInfinity, -1.0 - j));
  for (int i = 0; i < 4; ++i) {
    LinearExpr e;
    for (int j = 0; j < 4; ++j) e.add(x[j], 1.0 + ((i + j) % 3));
    p.add_constraint(e, Sense::LessEqual, 10);
  }
  SimplexOptions opt;
  opt.iteration_limit = 1;
  CHECK_THROWS_AS(solve(p, opt), IterationLimitError);
}

TEST_CASE("input errors") {
  LpProblem p, q;
  CHECK_THROWS_AS(p.add_variable(2, 1, 0), Error);
  CHECK_THROWS_AS(p.add_variable(0, 1, std::nan("")), Error);
  auto foreign = q.add_variable(0, 1, 0);
  CHECK_THROWS_AS(p.add_constraint({{foreign, 1}}, Sense::LessEqual, 1), Error);
  CHECK_THROWS_AS(solve(LpProblem{}), Error);
}

TEST_CASE("expression constants move to the right-hand side") {
  LpProblem p;
  auto x = p.add_variable(0, 10, 1);
  LinearExpr e({{x, 1}}, 3.0);
  e.add(x, 1);  // merged: 2x + 3 >= 7
  p.add_constraint(e, Sense::GreaterEqual, 7);
  CHECK(p.row(0).size() == 1);
  CHECK(solve(p).value(x) == doctest::Approx(2.0));
}

TEST_CASE("random LPs agree with vertex enumeration") {
  std::mt19937_64 rng(20240611);
  int counts[3] = {0, 0, 0};
  for (int trial = 0; trial < 1000; ++trial) {
    LpProblem p = random_small_lp(rng);
    auto expected = testing::enumerate_vertices(p);
    auto s = solve(p);
    CAPTURE(trial);
    REQUIRE(s.status == expected.status);
    ++counts[static_cast<int>(s.status)];
    if (s.status != Status::Optimal) continue;
    CHECK(s.objective == doctest::Approx(expected.objective).epsilon(1e-6).scale(1.0));
    CHECK(max_primal_violation(p, s.primal) <= 1e-7);
    double dual = dual_objective(p, s);
    CHECK(std::abs(dual - s.objective) <= 1e-6 * (1 + std::abs(s.objective)));
    CHECK(worst_slackness(p, s) <= 1e-6);
    CHECK(worst_dual_sign(p, s) <= 1e-7);
  }
  // The generator should exercise every outcome.
  CHECK(counts[0] > 100);
  CHECK(counts[1] > 50);
  CHECK(counts[2] > 20);
}

TEST_CASE("identical problems give bit-identical solutions") {
  std::mt19937_64 a(7), b(7);
  for (int t = 0; t < 50; ++t) {
    auto s1 = solve(random_small_lp(a));
    auto s2 = solve(random_small_lp(b));
    CHECK(s1.status == s2.status);
    CHECK(s1.primal == s2.primal);
    CHECK(s1.dual == s2.dual);
  }
}

TEST_CASE("LP export") {
  LpProblem p;
  auto x = p.add_variable(0, 4, 2, "pg[1]");
  auto y = p.add_variable(-kInfinity, kInfinity, 0, "theta 2");
  p.add_constraint({{x, 1}, {y, -1}}, Sense::Equal, 3, "balance_1");
  std::ostringstream out;
  write_lp(p, out);
  const std::string text = out.str();
  CHECK(text.find("Minimize\n obj: 2 pg[1]") != std::string::npos);
  CHECK(text.find("balance_1: 1 pg[1] - 1 theta_2 = 3") != std::string::npos);
  CHECK(text.find("theta_2 free") != std::string::npos);
  CHECK(text.find("0 <= pg[1] <= 4") != std::string::npos);
  CHECK(text.rfind("End\n") == text.size() - 4);
}

TEST_CASE("KKT conditions on medium random LPs") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0), cost(0.0, 10.0);
  std::bernoulli_distribution dense(0.3);
  for (int trial = 0; trial < 40; ++trial) {
    // Feasible by construction: rows are built around a known interior point.
    LpProblem p;
    const int n = 60, m = 45;
    std::vector<VarId> x;
    Eigen::VectorXd x0(n);
    for (int j = 0; j < n; ++j) {
      x0[j] = 5.0 * (u(rng) + 1.0);
      x.push_back(p.add_variable(0.0, trial % 2 ? 20.0 : kInfinity, cost(rng) - 3.0));
    }
    for (int i = 0; i < m; ++i) {
      LinearExpr e;
      double act = 0.0;
      for (int j = 0; j < n; ++j) {
        if (!dense(rng)) continue;
        double a = 100.0 * u(rng);
        e.add(x[j], a);
        act += a * x0[j];
      }
      Sense sense = i % 3 == 0 ? Sense::Equal : Sense::LessEqual;
      p.add_constraint(e, sense, sense == Sense::Equal ? act : act + 50.0);
    }
    // Keep the odd trials bounded through the box, the even ones through a budget row.
    LinearExpr budget;
    for (auto v : x) budget.add(v, 1.0);
    p.add_constraint(budget, Sense::LessEqual, 20.0 * n);
    auto s = solve(p);
    CAPTURE(trial);
    REQUIRE(s.status == Status::Optimal);
    CHECK(max_primal_violation(p, s.primal) <= 1e-7);
    CHECK(worst_dual_sign(p, s) <= 1e-7);
    CHECK(std::abs(dual_objective(p, s) - s.objective) <= 1e-6 * (1 + std::abs(s.objective)));
  }
}
