// Bounded-variable revised primal simplex.
//
// Every row i gets a logical variable r_i with column -e_i, so the working
// system is  A x - r = 0  with all restrictions expressed as bounds on (x, r).
// The all-logical basis is the starting point; phase 1 minimizes the sum of
// bound violations of basic variables, phase 2 the true objective. Rows are
// scaled by their largest coefficient before solving.

#include <algorithm>
#include <cmath>

#include <Eigen/SparseLU>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "gridflex/lp.hpp"

namespace gridflex::lp {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

enum class State : unsigned char { Basic, AtLower, AtUpper, AtZero };

/// LU of the basis plus a product-form eta file of the pivots since the last
/// refactorization.
class BasisFactor {
 public:
  BasisFactor(const SpMat& a) : a_(a), m_(static_cast<int>(a.rows())), n_(static_cast<int>(a.cols())) {}

  void refactor(const std::vector<int>& head) {
    etas_.clear();
    if (m_ == 0) return;
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(a_.nonZeros() + m_);
    for (int p = 0; p < m_; ++p) {
      int j = head[p];
      if (j < n_) {
        for (SpMat::InnerIterator it(a_, j); it; ++it) t.emplace_back(it.row(), p, it.value());
      } else {
        t.emplace_back(j - n_, p, -1.0);
      }
    }
    SpMat b(m_, m_);
    b.setFromTriplets(t.begin(), t.end());
    b.makeCompressed();
    lu_.analyzePattern(b);
    lu_.factorize(b);
    if (lu_.info() != Eigen::Success) {
      throw NumericalError("basis factorization failed: " + lu_.lastErrorMessage(), 0.0);
    }
  }

  void ftran(Vec& v) {
    if (m_ == 0) return;
    v = lu_.solve(v);
    for (const auto& eta : etas_) {
      double zp = v[eta.pos] / eta.pivot;
      if (zp != 0.0) {
        for (const auto& [i, w] : eta.entries) v[i] -= w * zp;
      }
      v[eta.pos] = zp;
    }
  }

  void btran(Vec& v) {
    if (m_ == 0) return;
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double s = v[it->pos];
      for (const auto& [i, w] : it->entries) s -= v[i] * w;
      v[it->pos] = s / it->pivot;
    }
    Vec rhs = v;
    v = lu_.transpose().solve(rhs);
  }

  void push_eta(int pos, const Vec& alpha) {
    Eta eta;
    eta.pos = pos;
    eta.pivot = alpha[pos];
    for (int i = 0; i < alpha.size(); ++i) {
      if (i != pos && alpha[i] != 0.0) eta.entries.emplace_back(i, alpha[i]);
    }
    etas_.push_back(std::move(eta));
  }

  int eta_count() const { return static_cast<int>(etas_.size()); }

 private:
  struct Eta {
    int pos = 0;
    double pivot = 1.0;
    std::vector<std::pair<int, double>> entries;  // off-pivot entries of the column
  };

  const SpMat& a_;
  int m_, n_;
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
  std::vector<Eta> etas_;
};

class Simplex {
 public:
  Simplex(const LpProblem& problem, const SimplexOptions& options)
      : problem_(problem),
        opt_(options),
        m_(problem.num_constraints()),
        n_(problem.num_variables()),
        a_(problem.matrix()),
        factor_(a_) {
    Vec row_max = Vec::Zero(m_);
    for (int j = 0; j < n_; ++j) {
      for (SpMat::InnerIterator it(a_, j); it; ++it) {
        row_max[it.row()] = std::max(row_max[it.row()], std::abs(it.value()));
      }
    }
    row_scale_ = Vec::Ones(m_);
    for (int i = 0; i < m_; ++i) {
      if (row_max[i] > 0.0) row_scale_[i] = 1.0 / row_max[i];
    }
    a_ = row_scale_.asDiagonal() * a_;
    a_.makeCompressed();

    const int total = n_ + m_;
    lb_.resize(total);
    ub_.resize(total);
    cost_ = Vec::Zero(total);
    for (int j = 0; j < n_; ++j) {
      lb_[j] = problem.lower(j);
      ub_[j] = problem.upper(j);
      cost_[j] = problem.objective(j);
    }
    for (int i = 0; i < m_; ++i) {
      double r = problem.rhs(i) * row_scale_[i];
      switch (problem.sense(i)) {
        case Sense::LessEqual: lb_[n_ + i] = -kInfinity; ub_[n_ + i] = r; break;
        case Sense::GreaterEqual: lb_[n_ + i] = r; ub_[n_ + i] = kInfinity; break;
        case Sense::Equal: lb_[n_ + i] = r; ub_[n_ + i] = r; break;
      }
    }
    limit_ = opt_.iteration_limit > 0 ? opt_.iteration_limit : std::max(10000, 50 * (n_ + m_));
  }

  LpSolution run() {
    initialize();
    int phase = 1;
    int degenerate_run = 0;
    int cleanups = 0;
    int pivot_retries = 0;
    for (;;) {
      if (iterations_ >= limit_) throw IterationLimitError(iterations_);
      if (factor_.eta_count() >= opt_.refactor_interval) refresh();

      Vec cb(m_);
      if (phase == 1) {
        bool infeasible = false;
        for (int p = 0; p < m_; ++p) {
          cb[p] = phase1_cost(head_[p]);
          infeasible = infeasible || cb[p] != 0.0;
        }
        if (!infeasible) phase = 2;
      }
      if (phase == 2) {
        for (int p = 0; p < m_; ++p) cb[p] = cost_[head_[p]];
      }
      Vec y = cb;
      factor_.btran(y);

      const bool bland = degenerate_run >= opt_.bland_stall_threshold;
      auto [q, dir] = price(y, phase, bland);
      if (q < 0) {
        if (phase == 1) return finish(Status::Infeasible);
        // Confirm on a fresh factorization before declaring optimality.
        refresh();
        if (++cleanups <= 3 && !basics_feasible()) {
          phase = 1;
          continue;
        }
        Vec y2(m_);
        for (int p = 0; p < m_; ++p) y2[p] = cost_[head_[p]];
        factor_.btran(y2);
        if (cleanups <= 3 && price(y2, 2, false).first >= 0) continue;
        return finish(Status::Optimal);
      }

      Vec alpha = column(q);
      factor_.ftran(alpha);

      Ratio r = ratio_test(alpha, q, dir, phase, bland);
      if (r.pos < 0 && !std::isfinite(r.step)) {
        if (phase == 2) return finish(Status::Unbounded);
        throw NumericalError("phase 1 found an unblocked improving ray", 0.0);
      }
      if (r.pos >= 0 && std::abs(alpha[r.pos]) < opt_.pivot_tol) {
        if (factor_.eta_count() > 0 && pivot_retries++ < 3) {
          refresh();
          continue;
        }
        throw NumericalError("pivot element below tolerance", std::abs(alpha[r.pos]));
      }
      pivot_retries = 0;

      const double t = std::max(r.step, 0.0);
      for (int p = 0; p < m_; ++p) {
        if (alpha[p] != 0.0) x_[head_[p]] -= dir * t * alpha[p];
      }
      x_[q] += dir * t;

      if (r.pos < 0) {
        // Entering variable runs into its own opposite bound.
        state_[q] = dir > 0 ? State::AtUpper : State::AtLower;
        x_[q] = dir > 0 ? ub_[q] : lb_[q];
      } else {
        int leaving = head_[r.pos];
        x_[leaving] = r.to_upper ? ub_[leaving] : lb_[leaving];
        state_[leaving] = r.to_upper ? State::AtUpper : State::AtLower;
        head_[r.pos] = q;
        state_[q] = State::Basic;
        factor_.push_eta(r.pos, alpha);
      }
      degenerate_run = t <= 1e-12 ? degenerate_run + 1 : 0;
      ++iterations_;
    }
  }

 private:
  struct Ratio {
    int pos = -1;  // basis position of the leaving variable, -1 for a bound flip / none
    double step = kInfinity;
    bool to_upper = false;
  };

  void initialize() {
    const int total = n_ + m_;
    x_ = Vec::Zero(total);
    state_.assign(total, State::Basic);
    for (int j = 0; j < n_; ++j) {
      if (std::isfinite(lb_[j])) {
        x_[j] = lb_[j];
        state_[j] = State::AtLower;
      } else if (std::isfinite(ub_[j])) {
        x_[j] = ub_[j];
        state_[j] = State::AtUpper;
      } else {
        state_[j] = State::AtZero;
      }
    }
    head_.resize(m_);
    for (int i = 0; i < m_; ++i) head_[i] = n_ + i;
    refresh();
  }

  /// Refactorize and recompute basic values from the non-basic ones.
  void refresh() {
    factor_.refactor(head_);
    Vec b = Vec::Zero(m_);
    for (int j = 0; j < n_; ++j) {
      if (state_[j] == State::Basic || x_[j] == 0.0) continue;
      for (SpMat::InnerIterator it(a_, j); it; ++it) b[it.row()] -= it.value() * x_[j];
    }
    for (int i = 0; i < m_; ++i) {
      int j = n_ + i;
      if (state_[j] != State::Basic) b[i] += x_[j];
    }
    factor_.ftran(b);
    for (int p = 0; p < m_; ++p) x_[head_[p]] = b[p];
  }

  Vec column(int j) const {
    Vec col = Vec::Zero(m_);
    if (j < n_) {
      for (SpMat::InnerIterator it(a_, j); it; ++it) col[it.row()] = it.value();
    } else {
      col[j - n_] = -1.0;
    }
    return col;
  }

  double dot_column(int j, const Vec& y) const {
    if (j >= n_) return -y[j - n_];
    double s = 0.0;
    for (SpMat::InnerIterator it(a_, j); it; ++it) s += it.value() * y[it.row()];
    return s;
  }

  double tol_for(double bound) const { return opt_.feasibility_tol * (1.0 + std::abs(bound)); }

  double phase1_cost(int j) const {
    if (x_[j] < lb_[j] - tol_for(lb_[j])) return -1.0;
    if (x_[j] > ub_[j] + tol_for(ub_[j])) return 1.0;
    return 0.0;
  }

  bool basics_feasible() const {
    for (int p = 0; p < m_; ++p) {
      if (phase1_cost(head_[p]) != 0.0) return false;
    }
    return true;
  }

  /// Entering variable and direction (+1 increase, -1 decrease); q = -1 if none.
  std::pair<int, int> price(const Vec& y, int phase, bool bland) const {
    int best_q = -1, best_dir = 0;
    double best = 0.0;
    const int total = n_ + m_;
    for (int j = 0; j < total; ++j) {
      if (state_[j] == State::Basic || lb_[j] == ub_[j]) continue;
      double d = (phase == 2 ? cost_[j] : 0.0) - dot_column(j, y);
      int dir = 0;
      switch (state_[j]) {
        case State::AtLower: dir = d < -opt_.optimality_tol ? 1 : 0; break;
        case State::AtUpper: dir = d > opt_.optimality_tol ? -1 : 0; break;
        case State::AtZero:
          dir = std::abs(d) > opt_.optimality_tol ? (d < 0 ? 1 : -1) : 0;
          break;
        case State::Basic: break;
      }
      if (dir == 0) continue;
      if (bland) return {j, dir};
      if (std::abs(d) > best) {
        best = std::abs(d);
        best_q = j;
        best_dir = dir;
      }
    }
    return {best_q, best_dir};
  }

  Ratio ratio_test(const Vec& alpha, int q, int dir, int phase, bool bland) const {
    Ratio out;
    const double flip = ub_[q] - lb_[q];  // inf unless both bounds are finite

    // Candidate blocking bound for basis position p, or nothing.
    struct Block {
      bool valid = false;
      double bound = 0.0;
      double delta = 0.0;
      bool upper = false;
    };
    auto block_for = [&](int p) {
      Block b;
      if (std::abs(alpha[p]) <= opt_.pivot_tol) return b;
      const int j = head_[p];
      const double v = x_[j];
      b.delta = -dir * alpha[p];
      if (b.delta > 0) {
        if (phase == 1 && v < lb_[j] - tol_for(lb_[j])) {
          b.bound = lb_[j];
        } else if (v > ub_[j] + tol_for(ub_[j])) {
          return b;
        } else {
          b.bound = ub_[j];
          b.upper = true;
        }
      } else {
        if (phase == 1 && v > ub_[j] + tol_for(ub_[j])) {
          b.bound = ub_[j];
          b.upper = true;
        } else if (v < lb_[j] - tol_for(lb_[j])) {
          return b;
        } else {
          b.bound = lb_[j];
        }
      }
      b.valid = std::isfinite(b.bound);
      return b;
    };

    if (bland) {
      double best = kInfinity;
      int best_j = -1;
      for (int p = 0; p < m_; ++p) {
        Block b = block_for(p);
        if (!b.valid) continue;
        double theta = std::max((b.bound - x_[head_[p]]) / b.delta, 0.0);
        bool better = theta < best - 1e-12 ||
                      (theta <= best + 1e-12 && (best_j < 0 || head_[p] < best_j));
        if (better) {
          best = std::min(best, theta);
          best_j = head_[p];
          out.pos = p;
          out.step = theta;
          out.to_upper = b.upper;
        }
      }
    } else {
      // Harris two-pass: relax bounds by the tolerance to find the step
      // limit, then take the largest pivot among candidates within it.
      double limit = kInfinity;
      for (int p = 0; p < m_; ++p) {
        Block b = block_for(p);
        if (!b.valid) continue;
        double slack = tol_for(b.bound);
        double relaxed = b.delta > 0 ? (b.bound + slack - x_[head_[p]]) / b.delta
                                     : (b.bound - slack - x_[head_[p]]) / b.delta;
        limit = std::min(limit, relaxed);
      }
      double best_pivot = 0.0;
      for (int p = 0; p < m_; ++p) {
        Block b = block_for(p);
        if (!b.valid) continue;
        double theta = (b.bound - x_[head_[p]]) / b.delta;
        if (theta <= limit && std::abs(alpha[p]) > best_pivot) {
          best_pivot = std::abs(alpha[p]);
          out.pos = p;
          out.step = std::max(theta, 0.0);
          out.to_upper = b.upper;
        }
      }
    }

    if (flip <= out.step) {
      out.pos = -1;
      out.step = flip;
    }
    return out;
  }

  LpSolution finish(Status status) {
    LpSolution s;
    s.status = status;
    s.iterations = iterations_;
    s.primal = x_.head(n_);
    s.row_activity.resize(m_);
    for (int i = 0; i < m_; ++i) s.row_activity[i] = x_[n_ + i] / row_scale_[i];
    s.objective = 0.0;
    for (int j = 0; j < n_; ++j) s.objective += cost_[j] * s.primal[j];
    s.dual = Vec::Zero(m_);
    s.reduced_cost = Vec::Zero(n_);
    if (status == Status::Optimal) {
      Vec y(m_);
      for (int p = 0; p < m_; ++p) y[p] = cost_[head_[p]];
      factor_.btran(y);
      for (int i = 0; i < m_; ++i) {
        s.dual[i] = state_[n_ + i] == State::Basic ? 0.0 : y[i] * row_scale_[i];
      }
      for (int j = 0; j < n_; ++j) {
        s.reduced_cost[j] = state_[j] == State::Basic ? 0.0 : cost_[j] - dot_column(j, y);
      }
    }
    spdlog::debug("simplex: {} after {} iterations ({} rows, {} cols)", to_string(status),
                  iterations_, m_, n_);
    return s;
  }

  const LpProblem& problem_;
  SimplexOptions opt_;
  int m_, n_;
  SpMat a_;
  Vec row_scale_;
  Vec lb_, ub_, cost_;
  Vec x_;
  std::vector<int> head_;
  std::vector<State> state_;
  BasisFactor factor_;
  int iterations_ = 0;
  int limit_ = 0;
};

}  // namespace

LpSolution solve(const LpProblem& problem, const SimplexOptions& options) {
  if (problem.num_variables() == 0) throw Error("cannot solve a problem with no variables");
  Simplex simplex(problem, options);
  return simplex.run();
}

}  // namespace gridflex::lp
