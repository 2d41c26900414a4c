#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "gridflex/analysis.hpp"

namespace gridflex {

namespace {

// Runs job(i) for i in [0, n) on up to `threads` workers. Exceptions are
// rethrown in job order, so the outcome does not depend on scheduling.
template <typename Job>
void run_jobs(int n, int threads, Job&& job) {
  std::vector<std::exception_ptr> errors(n);
  auto guarded = [&](int i) {
    try {
      job(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const int workers = std::min(threads, n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) guarded(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int i = next++; i < n; i = next++) guarded(i);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Solves one configuration; non-solver errors gain the sweep context.
DispatchResult solve_spec(const std::shared_ptr<const Case>& c, const std::string& label,
                          DcMode mode, double beta, bool relaxed, const AnalysisOptions& opt) {
  try {
    ScenarioSpec spec = make_scenario(*c, label, mode, beta, relaxed);
    spec.alpha_penalty = opt.alpha_penalty;
    return solve_opf(apply_scenario(c, spec), opt.simplex);
  } catch (const SolveError&) {
    throw;
  } catch (const Error& e) {
    throw Error(fmt::format("{} ({} mode, beta={}): {}", label, to_string(mode), beta, e.what()));
  }
}

double mean_lmp(const DispatchResult& r) { return r.optimal() ? r.lmp.mean() : 0.0; }

}  // namespace

LineLoadingReport line_loading(const DispatchResult& result, const Case& c) {
  if (!result.optimal()) {
    throw Error(fmt::format("line loading needs an optimal result, got {}",
                            lp::to_string(result.status)));
  }
  LineLoadingReport report;
  for (std::size_t k = 0; k < c.branches.size(); ++k) {
    const auto& br = c.branches[k];
    auto i = static_cast<Eigen::Index>(k);
    report.rows.push_back({br.id, br.from_bus, br.to_bus, result.flows[i], br.rate_a,
                           100.0 * std::abs(result.flows[i]) / br.rate_a, result.alphas[i]});
  }
  std::stable_sort(report.rows.begin(), report.rows.end(), [](const auto& a, const auto& b) {
    if (a.util_pct != b.util_pct) return a.util_pct > b.util_pct;
    return a.branch < b.branch;
  });
  return report;
}

BetaSweepReport beta_sweep(const std::shared_ptr<const Case>& c,
                           const std::vector<std::string>& scenarios,
                           const std::vector<double>& betas, const AnalysisOptions& opt) {
  if (betas.empty()) throw Error("beta sweep needs at least one beta value");
  for (double b : betas) {
    if (!(b >= 0.0 && b <= 1.0)) throw Error(fmt::format("beta {} outside [0, 1]", b));
  }
  if (scenarios.empty()) throw Error("beta sweep needs at least one scenario");
  std::vector<double> sorted = betas;
  std::stable_sort(sorted.begin(), sorted.end());

  // Per scenario: one solve per beta, then the beta = 1 reference.
  const int per = static_cast<int>(sorted.size()) + 1;
  const int n = per * static_cast<int>(scenarios.size());
  std::vector<DispatchResult> results(n);
  run_jobs(n, opt.threads, [&](int i) {
    int s = i / per, b = i % per;
    double beta = b < per - 1 ? sorted[b] : 1.0;
    results[i] = solve_spec(c, scenarios[s], DcMode::Flexible, beta, false, opt);
  });

  BetaSweepReport report;
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    const auto& ref = results[s * per + per - 1];
    double ref_cost = ref.optimal() ? ref.total_cost : std::nan("");
    report.reference_cost.emplace_back(scenarios[s], ref_cost);
    for (int b = 0; b < per - 1; ++b) {
      const auto& r = results[s * per + b];
      BetaSweepRow row;
      row.scenario = scenarios[s];
      row.beta = sorted[b];
      row.feasible = r.optimal();
      if (row.feasible) {
        row.total_cost = r.total_cost;
        row.mean_lmp = mean_lmp(r);
        row.saturated = ref.optimal() && std::abs(r.total_cost - ref_cost) <=
                                             kSaturationTolerance * std::abs(ref_cost);
      }
      report.rows.push_back(row);
    }
  }
  return report;
}

CurtailmentReport curtailment_report(const std::shared_ptr<const Case>& c,
                                     const std::vector<std::string>& scenarios, double beta,
                                     const AnalysisOptions& opt) {
  if (c->solar_sites.empty()) throw Error("curtailment report needs at least one solar site");
  const int n = 2 * static_cast<int>(scenarios.size());
  std::vector<DispatchResult> results(n);
  std::vector<bool> relaxed(n, false);
  run_jobs(n, opt.threads, [&](int i) {
    const auto& label = scenarios[i / 2];
    DcMode mode = i % 2 == 0 ? DcMode::Fixed : DcMode::Flexible;
    double b = mode == DcMode::Flexible ? beta : 0.0;
    results[i] = solve_spec(c, label, mode, b, false, opt);
    if (!results[i].optimal()) {
      results[i] = solve_spec(c, label, mode, b, true, opt);
      relaxed[i] = true;
    }
    if (!results[i].optimal()) {
      throw Error(fmt::format("{} ({} mode): no solution even with relaxed branch limits", label,
                              to_string(mode)));
    }
  });

  CurtailmentReport report;
  report.beta = beta;
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    const auto& fixed = results[2 * s];
    const auto& flex = results[2 * s + 1];
    CurtailmentRow row;
    row.scenario = scenarios[s];
    row.fixed_mw = fixed.total_curtailment();
    row.optimized_mw = flex.total_curtailment();
    row.fixed_relaxed = relaxed[2 * s];
    row.optimized_relaxed = relaxed[2 * s + 1];
    row.fixed_sites = fixed.curtailment;
    row.optimized_sites = flex.curtailment;
    // Computed from the emitted (rounded) totals so the table is self-consistent.
    double f = round_to(row.fixed_mw, 2), o = round_to(row.optimized_mw, 2);
    if (f > 0.0) row.reduction_pct = 100.0 * (f - o) / f;
    report.rows.push_back(std::move(row));
  }
  return report;
}

const ModeRow* ModeComparison::find(const std::string& scenario, const std::string& mode) const {
  for (const auto& r : rows) {
    if (r.scenario == scenario && r.mode == mode) return &r;
  }
  return nullptr;
}

std::optional<bool> ModeComparison::flexible_dominates(const std::string& scenario) const {
  const ModeRow* flex = find(scenario, "flexible");
  const ModeRow* fixed = find(scenario, "fixed");
  if (fixed && fixed->status != lp::Status::Optimal) fixed = find(scenario, "fixed-relaxed");
  if (!flex || !fixed || flex->status != lp::Status::Optimal ||
      fixed->status != lp::Status::Optimal) {
    return std::nullopt;
  }
  return flex->gen_cost <= fixed->gen_cost + 1e-6 * (1.0 + std::abs(fixed->gen_cost));
}

ModeComparison mode_comparison(const std::shared_ptr<const Case>& c,
                               const std::vector<std::string>& scenarios, double beta,
                               const AnalysisOptions& opt) {
  const int ns = static_cast<int>(scenarios.size());
  // Per scenario: no-dc, fixed, flexible, and fixed-relaxed when fixed fails.
  std::vector<DispatchResult> results(4 * ns);
  run_jobs(3 * ns, opt.threads, [&](int i) {
    int s = i / 3, m = i % 3;
    DcMode mode = m == 0 ? DcMode::NoDc : m == 1 ? DcMode::Fixed : DcMode::Flexible;
    results[4 * s + m] =
        solve_spec(c, scenarios[s], mode, mode == DcMode::Flexible ? beta : 0.0, false, opt);
  });
  std::vector<int> pending;
  for (int s = 0; s < ns; ++s) {
    if (!results[4 * s + 1].optimal()) pending.push_back(s);
  }
  run_jobs(static_cast<int>(pending.size()), opt.threads, [&](int i) {
    int s = pending[i];
    results[4 * s + 3] = solve_spec(c, scenarios[s], DcMode::Fixed, 0.0, true, opt);
  });

  const char* names[] = {"no-dc", "fixed", "flexible", "fixed-relaxed"};
  ModeComparison out;
  out.beta = beta;
  for (int s = 0; s < ns; ++s) {
    for (int m : {0, 1, 3, 2}) {
      if (m == 3 && results[4 * s + 1].optimal()) continue;
      const auto& r = results[4 * s + m];
      ModeRow row;
      row.scenario = scenarios[s];
      row.mode = names[m];
      row.status = r.status;
      if (r.optimal()) {
        row.gen_cost = r.total_cost;
        row.penalty_cost = r.penalty_cost;
        row.mean_lmp = mean_lmp(r);
        row.sum_alpha = r.sum_alpha();
        if (m != 0) row.dc_loads = r.dc_loads;
        double best = 0.0;
        for (int k : r.violated_branches()) {
          int id = c->branches[k].id;
          row.violated_branches.push_back(id);
          double a = r.alphas[k];
          bool tie = std::abs(a - best) <= 1e-9 * (1.0 + best);
          if (!row.critical_branch || (a > best && !tie) || (tie && id < *row.critical_branch)) {
            best = std::max(a, best);
            row.critical_branch = id;
          }
        }
        std::sort(row.violated_branches.begin(), row.violated_branches.end());
      }
      out.rows.push_back(std::move(row));
    }
  }
  return out;
}

}  // namespace gridflex
