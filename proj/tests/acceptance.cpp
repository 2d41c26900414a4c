// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include <fmt/format.h>
#include <unistd.h>

#include "gridflex/analysis.hpp"
#include "gridflex/cli.hpp"
#include "support/random_lp.hpp"
#include "support/random_opf.hpp"
#include "support/toy_cases.hpp"
#include "support/vertex_oracle.hpp"

using namespace gridflex;
using namespace gridflex::testing;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass = true;
  std::vector<std::string> notes;  // printed under the verdict line
  std::vector<std::string> failures;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (failures.size() < 8) failures.push_back(what);
    }
  }
};

// Every Optimal solve in this run passes through here (criterion 3).
struct InvariantLedger {
  int solves = 0;
  int checked = 0;
  std::vector<std::string> violations;

  DispatchResult solve(const Instance& inst) {
    auto t0 = Clock::now();
    DispatchResult r = solve_opf(inst);
    slowest = std::max(slowest, seconds_since(t0));
    ++solves;
    if (r.optimal()) {
      ++checked;
      for (auto& msg : check_invariants(r, inst)) {
        if (violations.size() < 8) violations.push_back(describe(inst.scenario) + ": " + msg);
      }
    }
    return r;
  }
  double slowest = 0.0;
};

InvariantLedger ledger;

void report(const std::string& id, const std::string& title, const Verdict& v, double secs) {
  std::cout << fmt::format("[{}] {} {} ({:.2f} s)\n", v.pass ? "PASS" : "FAIL", id, title, secs);
  for (const auto& n : v.notes) std::cout << "       " << n << "\n";
  for (const auto& f : v.failures) std::cout << "       failed: " << f << "\n";
}

// ---- 1 ----------------------------------------------------------------------

Verdict lp_oracle() {
  Verdict v;
  std::mt19937_64 rng(1);
  std::map<lp::Status, int> counts;
  int mismatched = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    lp::LpProblem p = random_small_lp(rng);
    auto expected = enumerate_vertices(p);
    auto got = lp::solve(p);
    ++counts[expected.status];
    if (got.status != expected.status) {
      ++mismatched;
      v.require(false, fmt::format("trial {}: status {} vs oracle {}", trial,
                                   lp::to_string(got.status), lp::to_string(expected.status)));
      continue;
    }
    if (got.optimal()) {
      double diff = std::abs(got.objective - expected.objective);
      worst = std::max(worst, diff);
      v.require(diff <= 1e-6, fmt::format("trial {}: objective off by {}", trial, diff));
    }
  }
  v.notes.push_back(fmt::format("1000 LPs: {} optimal, {} infeasible, {} unbounded; {} status "
                                "mismatches; worst objective gap {:.1e}",
                                counts[lp::Status::Optimal], counts[lp::Status::Infeasible],
                                counts[lp::Status::Unbounded], mismatched, worst));
  return v;
}

// ---- 2 ----------------------------------------------------------------------

double objective_of(const DispatchResult& r) { return r.total_cost + r.penalty_cost; }

Verdict lmp_finite_differences() {
  Verdict v;
  std::mt19937_64 rng(2);
  int accepted = 0, infeasible = 0, knife_edge = 0, buses = 0;
  double worst = 0.0;
  while (accepted < 50) {
    Case c = random_case(rng);
    auto ptr = std::make_shared<const Case>(c);
    std::uniform_int_distribution<int> mode_pick(0, 2);
    DcMode mode = static_cast<DcMode>(mode_pick(rng));
    double beta = mode == DcMode::Flexible ? 0.2 + 0.1 * mode_pick(rng) : 0.0;
    Instance inst = apply_scenario(ptr, make_scenario(c, "shoulder", mode, beta));
    DispatchResult base = ledger.solve(inst);
    if (!base.optimal()) {
      ++infeasible;
      continue;
    }
    const double c0 = objective_of(base);
    auto shifted_cost = [&](Eigen::Index n, double delta) {
      Instance moved = inst;
      moved.effective_load[n] += delta;
      DispatchResult r = ledger.solve(moved);
      return r.optimal() ? objective_of(r) : std::nan("");
    };
    // Screen knife-edge optima with finite differences alone: the one-sided
    // slopes must agree at every bus.
    std::vector<double> up(c.buses.size());
    bool smooth = true;
    for (Eigen::Index n = 0; n < inst.effective_load.size() && smooth; ++n) {
      up[n] = shifted_cost(n, 0.1);
      double down = shifted_cost(n, -0.1);
      double right = (up[n] - c0) / 0.1, left = (c0 - down) / 0.1;
      smooth = std::isfinite(right) && std::isfinite(left) && std::abs(right - left) <= 1e-4;
    }
    if (!smooth) {
      ++knife_edge;
      continue;
    }
    ++accepted;
    for (Eigen::Index n = 0; n < inst.effective_load.size(); ++n) {
      double err = std::abs((up[n] - c0) - base.lmp[n] * 0.1);
      worst = std::max(worst, err);
      ++buses;
      v.require(err <= 1e-3, fmt::format("instance {} bus {}: |dC - lmp*0.1| = {:.2e}", accepted,
                                         c.buses[n].id, err));
    }
  }
  v.notes.push_back(fmt::format("50 instances ({} buses checked); skipped {} infeasible and {} "
                                "knife-edge draws; worst error {:.1e} $",
                                buses, infeasible, knife_edge, worst));
  return v;
}

// ---- 4 ----------------------------------------------------------------------

Verdict monotonicity_and_dominance() {
  Verdict v;
  std::mt19937_64 rng(4);
  RandomCaseOptions tight;
  tight.min_rate = 30.0;
  tight.max_rate = 150.0;
  int accepted = 0, draws = 0;
  while (accepted < 100) {
    ++draws;
    Case c = random_case(rng, tight);
    auto ptr = std::make_shared<const Case>(c);
    Instance fixed_inst = apply_scenario(ptr, make_scenario(c, "shoulder", DcMode::Fixed));
    DispatchResult fixed = ledger.solve(fixed_inst);
    if (!fixed.optimal()) continue;
    bool congested = false;
    for (std::size_t k = 0; k < c.branches.size(); ++k) {
      congested = congested || std::abs(fixed.flows[k]) >= c.branches[k].rate_a - 1e-6;
    }
    if (!congested) continue;
    ++accepted;
    double previous = lp::kInfinity;
    for (double beta : {0.1, 0.2, 0.3, 0.4, 0.5}) {
      DispatchResult r =
          ledger.solve(apply_scenario(ptr, make_scenario(c, "shoulder", DcMode::Flexible, beta)));
      v.require(r.optimal(), fmt::format("instance {} beta {}: flexible not optimal", accepted, beta));
      if (!r.optimal()) break;
      double tol = 1e-6 * (1.0 + std::abs(r.total_cost));
      v.require(r.total_cost <= previous + tol,
                fmt::format("instance {} beta {}: cost rose to {}", accepted, beta, r.total_cost));
      v.require(r.total_cost <= fixed.total_cost + tol,
                fmt::format("instance {} beta {}: flexible {} > fixed {}", accepted, beta,
                            r.total_cost, fixed.total_cost));
      previous = r.total_cost;
    }
  }
  v.notes.push_back(fmt::format("100 congested instances with feasible Fixed mode from {} draws",
                                draws));
  return v;
}

// ---- 5 ----------------------------------------------------------------------

const std::vector<std::string> kScenarios = {"peak", "shoulder", "off-peak"};

Verdict fixed_infeasible_single_branch(std::map<std::string, double>& sum_alpha) {
  Verdict v;
  auto c = shipped_case();
  for (const auto& label : kScenarios) {
    Instance inst = apply_scenario(c, make_scenario(*c, label, DcMode::Fixed));
    DispatchResult plain = ledger.solve(inst);
    v.require(plain.status == lp::Status::Infeasible, label + ": fixed mode is not infeasible");
    ScenarioSpec relaxed = inst.scenario;
    relaxed.relaxed = true;
    DispatchResult d = ledger.solve(apply_scenario(c, relaxed));
    v.require(d.optimal(), label + ": relaxed fixed mode has no solution");
    if (!d.optimal()) continue;
    auto violated = d.violated_branches();
    std::string names;
    for (int k : violated) {
      names += fmt::format(" {} ({}->{})", c->branches[k].id, c->branches[k].from_bus,
                           c->branches[k].to_bus);
    }
    v.require(violated.size() == 1 && c->branches[violated[0]].id == 47 &&
                  c->branches[violated[0]].from_bus == 27 && c->branches[violated[0]].to_bus == 33,
              label + ": violated branches" + names);
    sum_alpha[label] = d.sum_alpha();
    v.notes.push_back(fmt::format("{}: infeasible; sum alpha {:.2f} MW on{}", label,
                                  d.sum_alpha(), names));
  }
  return v;
}

Verdict flexible_feasible() {
  Verdict v;
  auto c = shipped_case();
  for (const auto& label : kScenarios) {
    Instance inst = apply_scenario(c, make_scenario(*c, label, DcMode::Flexible, 0.5));
    DispatchResult r = ledger.solve(inst);
    v.require(r.optimal(), label + ": flexible beta 0.5 not optimal");
    if (r.optimal()) {
      v.require(r.sum_alpha() == 0.0, label + ": alpha used");
      v.notes.push_back(fmt::format("{}: optimal, cost {:.2f} $/h, DC loads {:.1f} / {:.1f} / {:.1f} MW",
                                    label, r.total_cost, r.dc_loads[0], r.dc_loads[1],
                                    r.dc_loads[2]));
    }
  }
  // The relaxed flexible solve must agree and use no virtual capacity.
  ScenarioSpec spec = make_scenario(*c, "peak", DcMode::Flexible, 0.5, true);
  DispatchResult relaxed = ledger.solve(apply_scenario(c, spec));
  v.require(relaxed.optimal() && relaxed.sum_alpha() == 0.0, "peak: relaxed flexible uses alpha");
  return v;
}

Verdict alpha_magnitude_and_order(const std::map<std::string, double>& sum_alpha) {
  Verdict v;
  if (sum_alpha.size() != 3) {
    v.require(false, "alpha totals unavailable (criterion 5a failed to solve)");
    return v;
  }
  double peak = sum_alpha.at("peak"), shoulder = sum_alpha.at("shoulder"),
         off = sum_alpha.at("off-peak");
  v.require(peak > shoulder && shoulder > off, "ordering peak > shoulder > off-peak");
  v.require(std::abs(peak - 52.7) <= 0.2 * 52.7,
            fmt::format("peak sum alpha {:.2f} outside 52.7 +/- 20%", peak));
  v.notes.push_back(fmt::format("sum alpha {:.2f} / {:.2f} / {:.2f} MW (reference 52.7 / 25.1 / 2.1); "
                                "peak deviation {:+.1f}%",
                                peak, shoulder, off, 100.0 * (peak - 52.7) / 52.7));
  return v;
}

Verdict beta_saturation() {
  Verdict v;
  auto c = shipped_case();
  auto sweep = beta_sweep(c, kScenarios, {0.1, 0.2, 0.3, 0.4, 0.5});
  // Every solve behind the sweep is repeated here so its invariants are checked too.
  for (const auto& row : sweep.rows) {
    ledger.solve(apply_scenario(c, make_scenario(*c, row.scenario, DcMode::Flexible, row.beta)));
  }
  std::map<std::string, std::string> pattern;
  for (const auto& row : sweep.rows) {
    pattern[row.scenario] += row.saturated ? 'S' : '-';
    v.require(row.feasible, fmt::format("{} beta {}: infeasible", row.scenario, row.beta));
  }
  auto saturated = [&](const std::string& label, double beta) {
    for (const auto& row : sweep.rows) {
      if (row.scenario == label && std::abs(row.beta - beta) < 1e-12) return row.saturated;
    }
    return false;
  };
  v.require(saturated("peak", 0.2), "peak not saturated at beta 0.2");
  v.require(saturated("shoulder", 0.2), "shoulder not saturated at beta 0.2");
  v.require(saturated("off-peak", 0.3), "off-peak not saturated at beta 0.3");
  v.require(!saturated("off-peak", 0.2), "off-peak already saturated at beta 0.2");
  for (const auto& label : kScenarios) {
    v.notes.push_back(fmt::format("{:<9} beta 0.1..0.5: {}", label, pattern[label]));
  }
  return v;
}

Verdict curtailment_reduction() {
  Verdict v;
  auto c = shipped_case();
  auto report = curtailment_report(c, kScenarios, 0.5);
  for (const auto& row : report.rows) {
    v.require(row.optimized_mw < row.fixed_mw,
              fmt::format("{}: flexible curtailment {:.2f} not below fixed {:.2f}", row.scenario,
                          row.optimized_mw, row.fixed_mw));
    v.notes.push_back(fmt::format("{}: fixed{} {:.2f} MW -> flexible {:.2f} MW, reduction {}",
                                  row.scenario, row.fixed_relaxed ? " (alpha-relaxed)" : "",
                                  row.fixed_mw, row.optimized_mw,
                                  row.reduction_pct ? fmt::format("{:.1f}%", *row.reduction_pct)
                                                    : "N/A"));
    if (row.scenario == "shoulder") {
      v.require(row.reduction_pct && *row.reduction_pct >= 45.0, "shoulder reduction below 45%");
    }
  }
  for (const auto& label : kScenarios) {
    for (auto mode : {DcMode::Fixed, DcMode::Flexible}) {
      ScenarioSpec spec = make_scenario(*c, label, mode, mode == DcMode::Flexible ? 0.5 : 0.0,
                                        mode == DcMode::Fixed);
      ledger.solve(apply_scenario(c, spec));
    }
  }
  return v;
}

// ---- 6 ----------------------------------------------------------------------

Verdict runtime() {
  Verdict v;
  auto c = shipped_case();
  auto t0 = Clock::now();
  auto modes = mode_comparison(c, kScenarios, 0.5);
  for (const auto& label : kScenarios) {
    for (auto [mode, relaxed] : {std::pair{DcMode::Fixed, true}, std::pair{DcMode::Flexible, false}}) {
      auto inst = apply_scenario(c, make_scenario(*c, label, mode,
                                                  mode == DcMode::Flexible ? 0.5 : 0.0, relaxed));
      line_loading(ledger.solve(inst), *c);
    }
  }
  auto sweep = beta_sweep(c, kScenarios, {0.1, 0.2, 0.3, 0.4, 0.5});
  auto curtail = curtailment_report(c, kScenarios, 0.5);
  double battery = seconds_since(t0);
  v.require(ledger.slowest < 1.0, fmt::format("slowest single solve {:.3f} s", ledger.slowest));
  v.require(battery < 30.0, fmt::format("battery took {:.2f} s", battery));
  v.notes.push_back(fmt::format("slowest single solve {:.3f} s over {} solves; four case studies "
                                "{:.2f} s",
                                ledger.slowest, ledger.solves, battery));
  return v;
}

// ---- 7 ----------------------------------------------------------------------

Verdict cli_contract() {
  Verdict v;
  namespace fs = std::filesystem;
  auto dir = fs::temp_directory_path() / ("gridflex_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string cs = data_path("rts96_dc.case");

  auto expect = [&](std::vector<std::string> args, int code) {
    std::ostringstream out, err;
    int got = cli::run(args, out, err);
    std::string line;
    for (const auto& a : args) line += " " + a;
    v.require(got == code, fmt::format("exit {} (want {}) for{}", got, code, line));
    return out.str();
  };
  auto header = [&](const fs::path& p, const std::string& want) {
    std::ifstream in(p);
    std::string first;
    std::getline(in, first);
    v.require(first == want, fmt::format("{} header '{}'", p.filename().string(), first));
  };

  std::string out = expect({"solve", "--case", cs, "--scenario", "peak", "--mode", "flexible",
                            "--beta", "0.5"},
                           0);
  v.require(out.find("generation cost") != std::string::npos &&
                out.find("mean LMP") != std::string::npos,
            "solve summary lacks cost or LMP");
  out = expect({"solve", "--case", cs, "--scenario", "peak", "--mode", "fixed"}, 3);
  v.require(out.find("infeasible; run `diagnose`") != std::string::npos,
            "infeasible solve message");
  expect({"diagnose", "--case", cs, "--scenario", "off-peak", "--mode", "fixed"}, 0);
  expect({"solve", "--case", cs, "--scenario", "peak", "--mode", "no-dc", "--beta", "0.3"}, 2);
  expect({"solve", "--case", cs, "--scenario", "peak", "--mode", "fixed", "--bogus"}, 2);
  expect({"solve", "--case", (dir / "missing.case").string(), "--scenario", "peak", "--mode",
          "fixed"},
         2);
  expect({"validate", "--case", cs}, 0);

  expect({"diagnose", "--case", cs, "--scenario", "peak", "--mode", "fixed", "--out",
          (dir / "lines.csv").string()},
         0);
  header(dir / "lines.csv", "branch,from,to,flow_mw,rate_mw,util_pct,alpha_mw");
  expect({"sweep-beta", "--case", cs, "--out", (dir / "sweep.csv").string()}, 0);
  header(dir / "sweep.csv", "scenario,beta,total_cost_usd,mean_lmp_usd_mwh,feasible,saturated");
  expect({"curtailment", "--case", cs, "--out", (dir / "curt.csv").string()}, 0);
  header(dir / "curt.csv", "scenario,fixed_curt_mw,opt_curt_mw,reduction_pct");
  expect({"compare-modes", "--case", cs, "--out", (dir / "modes.csv").string()}, 0);
  header(dir / "modes.csv",
         "scenario,mode,status,gen_cost_usd,mean_lmp,sum_alpha_mw,critical_branch,dc_loads");
  fs::remove_all(dir);
  v.notes.push_back("exit codes 0/2/3 and four CSV headers checked");
  return v;
}

}  // namespace

int main() {
  bool all = true;
  auto step = [&](const std::string& id, const std::string& title, auto&& fn) {
    auto t0 = Clock::now();
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    report(id, title, v, seconds_since(t0));
    all = all && v.pass;
    return v;
  };

  step("1", "LP oracle equivalence", lp_oracle);
  auto c2 = step("2", "LMP finite differences", lmp_finite_differences);
  step("4", "beta monotonicity and mode dominance", monotonicity_and_dominance);
  std::map<std::string, double> sum_alpha;
  step("5a", "fixed DC infeasible, single violated branch 27->33",
       [&] { return fixed_infeasible_single_branch(sum_alpha); });
  step("5b", "flexible DC (beta 0.5) feasible without alpha", flexible_feasible);
  step("5c", "virtual capacity magnitude and ordering",
       [&] { return alpha_magnitude_and_order(sum_alpha); });
  step("5d", "beta saturation pattern", beta_saturation);
  step("5e", "curtailment reduction", curtailment_reduction);
  step("6", "runtime", runtime);
  step("7", "CLI contract", cli_contract);
  step("3", "dispatch invariants on every optimal solve", [&] {
    Verdict v;
    for (const auto& msg : ledger.violations) v.require(false, msg);
    v.require(ledger.checked > 0, "no optimal solves recorded");
    v.notes.push_back(fmt::format("{} optimal of {} solves checked", ledger.checked, ledger.solves));
    return v;
  });
  (void)c2;
  std::cout << (all ? "acceptance: all criteria passed\n" : "acceptance: FAILED\n");
  return all ? 0 : 1;
}
