#include "gridflex/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "gridflex/analysis.hpp"

namespace gridflex::cli {

namespace {

constexpr const char* kDefaultCaseFile = "rts96_dc.case";

/// Conflicting or missing flags detected after parsing.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct CliConfig {
  std::string command;
  std::string case_path;
  std::vector<std::string> scenarios;
  std::string mode;
  double beta = 0.0;
  std::vector<double> betas;
  std::string format;
  std::string out_path;
  double alpha_penalty = kDefaultAlphaPenalty;
  bool relaxed = false;
  bool no_timestamp = false;

  bool beta_given = false;
  bool alpha_penalty_given = false;
};

std::filesystem::path resolve_case(const std::string& given) {
  const char* env = std::getenv("GRIDFLEX_CASE_DIR");
  if (given.empty()) {
    if (!env) {
      throw UsageError("no --case given and GRIDFLEX_CASE_DIR is not set");
    }
    return std::filesystem::path(env) / kDefaultCaseFile;
  }
  std::filesystem::path p(given);
  if (!std::filesystem::exists(p) && p.is_relative() && env) {
    auto candidate = std::filesystem::path(env) / p;
    if (std::filesystem::exists(candidate)) return candidate;
  }
  return p;
}

std::shared_ptr<const Case> open_case(const CliConfig& cfg, bool check = true) {
  auto path = resolve_case(cfg.case_path);
  if (!std::filesystem::exists(path)) {
    throw UsageError(fmt::format("case file '{}' not found", path.string()));
  }
  auto c = std::make_shared<const Case>(load_case(path, check));
  spdlog::info("loaded {}: {} buses, {} branches, {} generators, {} solar sites, {} data centers",
               path.string(), c->buses.size(), c->branches.size(), c->generators.size(),
               c->solar_sites.size(), c->data_centers.size());
  return c;
}

// Labels to run; unknown labels fail here as usage errors rather than mid-analysis.
std::vector<std::string> scenario_list(const CliConfig& cfg, const std::shared_ptr<const Case>& c) {
  auto labels = cfg.scenarios.empty() ? c->scenario_labels() : cfg.scenarios;
  for (const auto& label : labels) apply_scenario(c, make_scenario(*c, label, DcMode::NoDc));
  return labels;
}

Format output_format(const CliConfig& cfg) {
  if (!cfg.format.empty()) return parse_format(cfg.format);
  return std::filesystem::path(cfg.out_path).extension() == ".json" ? Format::Json : Format::Csv;
}

void write_report(const CliConfig& cfg, const ReportTable& table) {
  if (cfg.out_path.empty()) return;
  std::ofstream file(cfg.out_path);
  if (!file) throw Error(fmt::format("cannot open '{}' for writing", cfg.out_path));
  emit(table, output_format(cfg), file, EmitOptions{!cfg.no_timestamp});
  spdlog::info("wrote {}", cfg.out_path);
}

AnalysisOptions analysis_options(const CliConfig& cfg) {
  AnalysisOptions opt;
  opt.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  opt.alpha_penalty = cfg.alpha_penalty;
  return opt;
}

std::string join(const Eigen::VectorXd& v, int precision) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out += fmt::format("{}{:.{}f}", i ? ", " : "", round_to(v[i], precision), precision);
  }
  return out;
}

std::string cell_text(const std::string& s) { return s.empty() ? "-" : s; }

// ---- solve / diagnose / export-lp ------------------------------------------

ScenarioSpec requested_scenario(const CliConfig& cfg, const Case& c, const std::string& label,
                                bool relaxed) {
  DcMode mode = parse_dc_mode(cfg.mode);
  ScenarioSpec spec = make_scenario(c, label, mode, cfg.beta, relaxed);
  spec.alpha_penalty = cfg.alpha_penalty;
  return spec;
}

void check_mode_flags(const CliConfig& cfg) {
  if (cfg.mode == "flexible" && !cfg.beta_given) {
    throw UsageError("--mode flexible requires --beta");
  }
  if (cfg.mode != "flexible" && cfg.beta_given) {
    throw UsageError(fmt::format("--beta applies only to --mode flexible (got --mode {})", cfg.mode));
  }
}

ReportTable dispatch_table(const DispatchResult& r, const Instance& inst) {
  ReportTable t = r.optimal() ? to_table(line_loading(r, inst.case_data()))
                              : to_table(LineLoadingReport{});
  const auto& sc = inst.scenario;
  t.meta = {{"case", inst.case_data().name},
            {"scenario", sc.label},
            {"mode", std::string(to_string(sc.dc_mode))},
            {"beta", Cell(sc.beta, -1)},
            {"relaxed", sc.relaxed},
            {"status", std::string(lp::to_string(r.status))}};
  if (!r.optimal()) return t;
  auto lmp = extract_lmp(r, inst);
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  t.meta.insert(t.meta.end(),
                {{"total_cost_usd", Cell(r.total_cost, 2)},
                 {"penalty_cost_usd", Cell(r.penalty_cost, 2)},
                 {"mean_lmp", Cell(lmp.mean, 2)},
                 {"load_weighted_lmp", Cell(lmp.load_weighted_mean, 2)},
                 {"min_lmp", Cell(lmp.min, 2)},
                 {"max_lmp", Cell(lmp.max, 2)},
                 {"sum_alpha_mw", Cell(r.sum_alpha(), 2)},
                 {"curtailment_mw", Cell(r.total_curtailment(), 2)},
                 {"curtailment_sites_mw", Cell(vec(r.curtailment), 2)},
                 {"dc_loads_mw", Cell(vec(r.dc_loads), 2)},
                 {"lmp_by_bus", Cell(vec(r.lmp), 2)},
                 {"dispatch_mw", Cell(vec(r.dispatch), 2)}});
  return t;
}

void print_dispatch(std::ostream& out, const DispatchResult& r, const Instance& inst) {
  const Case& c = inst.case_data();
  auto lmp = extract_lmp(r, inst);
  out << fmt::format("  generation cost     {:.2f} $/h\n", round_to(r.total_cost, 2));
  out << fmt::format("  mean LMP            {:.2f} $/MWh (load-weighted {:.2f}, range {:.2f} to {:.2f})\n",
                     round_to(lmp.mean, 2), round_to(lmp.load_weighted_mean, 2),
                     round_to(lmp.min, 2), round_to(lmp.max, 2));
  out << fmt::format("  solar curtailment   {:.2f} MW\n", round_to(r.total_curtailment(), 2));
  if (inst.has_dc_variables() && r.dc_loads.size() > 0) {
    out << fmt::format("  data-center loads   {} MW\n", join(r.dc_loads, 2));
  }
  if (inst.scenario.relaxed) {
    auto violated = r.violated_branches();
    out << fmt::format("  virtual capacity    {:.2f} MW on {} branch(es), penalty {:.2f} $/h\n",
                       round_to(r.sum_alpha(), 2), violated.size(), round_to(r.penalty_cost, 2));
    for (int k : violated) {
      const auto& br = c.branches[k];
      out << fmt::format("    branch {} ({}->{}): flow {:.2f} MW, rate {:.2f} MW, alpha {:.2f} MW\n",
                         br.id, br.from_bus, br.to_bus, round_to(r.flows[k], 2),
                         round_to(br.rate_a, 2), round_to(r.alphas[k], 2));
    }
  }
}

int cmd_solve(const CliConfig& cfg, std::ostream& out, bool diagnose) {
  check_mode_flags(cfg);
  if (cfg.alpha_penalty_given && !(cfg.relaxed || diagnose)) {
    throw UsageError("--alpha-penalty requires --relaxed");
  }
  auto c = open_case(cfg);
  if (cfg.scenarios.empty()) throw UsageError("--scenario is required");
  if (!cfg.out_path.empty() && cfg.scenarios.size() > 1) {
    throw UsageError("--out takes a single --scenario");
  }
  const bool relaxed = diagnose || cfg.relaxed;
  int code = kExitOk;
  for (const auto& label : cfg.scenarios) {
    Instance inst = apply_scenario(c, requested_scenario(cfg, *c, label, relaxed));
    DispatchResult r = solve_opf(inst);
    std::string head = describe(inst.scenario);
    if (r.optimal()) {
      out << fmt::format("{}: optimal ({} iterations)\n", head, r.iterations);
      print_dispatch(out, r, inst);
      if (diagnose && r.violated_branches().empty()) {
        out << "  no branch limit needs relaxing\n";
      }
      for (const auto& msg : check_invariants(r, inst)) spdlog::warn("invariant: {}", msg);
    } else if (relaxed) {
      out << fmt::format("{}: {} even with relaxed branch limits\n", head,
                         lp::to_string(r.status));
      code = kExitInfeasible;
    } else {
      out << fmt::format("{}: infeasible; run `diagnose`\n", head);
      code = kExitInfeasible;
    }
    write_report(cfg, dispatch_table(r, inst));
  }
  return code;
}

int cmd_export_lp(const CliConfig& cfg, std::ostream& out) {
  check_mode_flags(cfg);
  if (cfg.alpha_penalty_given && !cfg.relaxed) {
    throw UsageError("--alpha-penalty requires --relaxed");
  }
  if (cfg.scenarios.size() != 1) throw UsageError("export-lp takes exactly one --scenario");
  auto c = open_case(cfg);
  Instance inst = apply_scenario(c, requested_scenario(cfg, *c, cfg.scenarios.front(), cfg.relaxed));
  OpfModel model = build_opf(inst);
  if (cfg.out_path.empty()) {
    lp::write_lp(model.problem, out);
    return kExitOk;
  }
  std::ofstream file(cfg.out_path);
  if (!file) throw Error(fmt::format("cannot open '{}' for writing", cfg.out_path));
  lp::write_lp(model.problem, file);
  if (!file.flush()) throw Error(fmt::format("failed writing '{}'", cfg.out_path));
  out << fmt::format("{}: {} variables, {} constraints written to {}\n", describe(inst.scenario),
                     model.problem.num_variables(), model.problem.num_constraints(),
                     cfg.out_path);
  return kExitOk;
}

// ---- table commands -------------------------------------------------------

int cmd_sweep(const CliConfig& cfg, std::ostream& out) {
  std::vector<double> betas = cfg.betas;
  if (betas.empty()) betas = {0.1, 0.2, 0.3, 0.4, 0.5};
  for (double b : betas) {
    if (!(b >= 0.0 && b <= 1.0)) throw UsageError(fmt::format("beta {} outside [0, 1]", b));
  }
  auto c = open_case(cfg);
  auto report = beta_sweep(c, scenario_list(cfg, c), betas, analysis_options(cfg));
  out << fmt::format("{:<10} {:>6} {:>16} {:>10} {:>9} {:>10}\n", "scenario", "beta",
                     "total cost $/h", "mean LMP", "feasible", "saturated");
  for (const auto& r : report.rows) {
    out << fmt::format("{:<10} {:>6} {:>16} {:>10} {:>9} {:>10}\n", r.scenario, r.beta,
                       r.feasible ? fmt::format("{:.2f}", round_to(r.total_cost, 2)) : "-",
                       r.feasible ? fmt::format("{:.2f}", round_to(r.mean_lmp, 2)) : "-",
                       r.feasible ? "yes" : "no", r.saturated ? "yes" : "no");
  }
  write_report(cfg, to_table(report));
  return kExitOk;
}

int cmd_compare(const CliConfig& cfg, std::ostream& out) {
  auto c = open_case(cfg);
  double beta = cfg.beta_given ? cfg.beta : 0.5;
  auto report = mode_comparison(c, scenario_list(cfg, c), beta, analysis_options(cfg));
  out << fmt::format("{:<10} {:<14} {:<11} {:>14} {:>9} {:>9} {:>8}  {}\n", "scenario", "mode",
                     "status", "gen cost $/h", "mean LMP", "sum alpha", "critical",
                     "data-center loads MW");
  for (const auto& r : report.rows) {
    bool ok = r.status == lp::Status::Optimal;
    out << fmt::format(
        "{:<10} {:<14} {:<11} {:>14} {:>9} {:>9} {:>8}  {}\n", r.scenario, r.mode,
        lp::to_string(r.status), ok ? fmt::format("{:.2f}", round_to(r.gen_cost, 2)) : "-",
        ok ? fmt::format("{:.2f}", round_to(r.mean_lmp, 2)) : "-",
        ok ? fmt::format("{:.2f}", round_to(r.sum_alpha, 2)) : "-",
        r.critical_branch ? std::to_string(*r.critical_branch) : "-",
        cell_text(join(r.dc_loads, 2)));
  }
  write_report(cfg, to_table(report));
  return kExitOk;
}

int cmd_curtailment(const CliConfig& cfg, std::ostream& out) {
  auto c = open_case(cfg);
  double beta = cfg.beta_given ? cfg.beta : 0.5;
  auto report = curtailment_report(c, scenario_list(cfg, c), beta, analysis_options(cfg));
  out << fmt::format("{:<10} {:>14} {:>14} {:>10}\n", "scenario", "fixed MW",
                     fmt::format("beta={} MW", beta), "reduction");
  for (const auto& r : report.rows) {
    out << fmt::format("{:<10} {:>14.2f} {:>14.2f} {:>10}{}\n", r.scenario,
                       round_to(r.fixed_mw, 2), round_to(r.optimized_mw, 2),
                       r.reduction_pct ? fmt::format("{:.1f}%", round_to(*r.reduction_pct, 1))
                                       : "N/A",
                       r.fixed_relaxed ? "  (fixed leg alpha-relaxed)" : "");
  }
  write_report(cfg, to_table(report));
  return kExitOk;
}

int cmd_validate(const CliConfig& cfg, std::ostream& out) {
  auto c = open_case(cfg, false);
  auto violations = validate(*c);
  for (const auto& v : violations) out << fmt::format("{} {}: {}\n", v.kind, v.id, v.message);
  if (!violations.empty()) {
    out << fmt::format("{}: {} violation(s)\n", c->name, violations.size());
    return kExitUsage;
  }
  out << fmt::format("{}: ok ({} buses, {} branches, {} generators, {} solar sites, {} data centers; "
                     "scenarios {})\n",
                     c->name, c->buses.size(), c->branches.size(), c->generators.size(),
                     c->solar_sites.size(), c->data_centers.size(),
                     fmt::join(c->scenario_labels(), ", "));
  return kExitOk;
}

void set_logging(int verbosity, std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_st>(err);
  auto logger = std::make_shared<spdlog::logger>("gridflex", sink);
  logger->set_pattern("[%l] %v");
  logger->set_level(verbosity >= 2   ? spdlog::level::debug
                    : verbosity == 1 ? spdlog::level::info
                                     : spdlog::level::warn);
  spdlog::set_default_logger(logger);
}

void restore_logging() {
  auto logger = std::make_shared<spdlog::logger>(
      "gridflex", std::make_shared<spdlog::sinks::stderr_sink_st>());
  logger->set_level(spdlog::level::warn);
  spdlog::set_default_logger(logger);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CliConfig cfg;
  CLI::App app{"DC optimal power flow with spatially flexible data-center loads", "gridflex"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  auto* verbose = app.add_flag("-v,--verbose", "Log progress (-v) or solver details (-vv) to stderr");

  auto add_case = [&](CLI::App* sub) {
    sub->add_option("--case", cfg.case_path,
                    "Case file; relative paths also searched in $GRIDFLEX_CASE_DIR, which "
                    "supplies rts96_dc.case when omitted");
  };
  auto add_scenarios = [&](CLI::App* sub) {
    sub->add_option("--scenario", cfg.scenarios, "Scenario label(s), comma separated")
        ->delimiter(',');
  };
  auto add_mode = [&](CLI::App* sub) {
    sub->add_option("--mode", cfg.mode, "Data-center mode")
        ->required()
        ->check(CLI::IsMember({"no-dc", "fixed", "flexible"}));
  };
  auto add_beta = [&](CLI::App* sub, const char* help) {
    sub->add_option("--beta", cfg.beta, help)->check(CLI::Range(0.0, 1.0));
  };
  auto add_penalty = [&](CLI::App* sub) {
    sub->add_option("--alpha-penalty", cfg.alpha_penalty,
                    "Cost of virtual branch capacity, $/MW (default 10000)");
  };
  auto add_output = [&](CLI::App* sub) {
    sub->add_option("--format", cfg.format, "Report format (default: from --out extension)")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--out", cfg.out_path, "Write the machine-readable report here");
    sub->add_flag("--no-timestamp", cfg.no_timestamp, "Omit generated_at from JSON reports");
  };

  auto* solve = app.add_subcommand("solve", "Solve one dispatch problem");
  add_case(solve);
  add_scenarios(solve);
  add_mode(solve);
  add_beta(solve, "Transferable share of each data-center load (flexible mode)");
  solve->add_flag("--relaxed", cfg.relaxed, "Allow penalized virtual branch capacity");
  add_penalty(solve);
  add_output(solve);

  auto* diagnose = app.add_subcommand("diagnose", "Solve with relaxed branch limits and list violations");
  add_case(diagnose);
  add_scenarios(diagnose);
  add_mode(diagnose);
  add_beta(diagnose, "Transferable share of each data-center load (flexible mode)");
  add_penalty(diagnose);
  add_output(diagnose);

  auto* sweep = app.add_subcommand("sweep-beta", "Flexible-mode cost across beta values");
  add_case(sweep);
  add_scenarios(sweep);
  sweep->add_option("--betas", cfg.betas, "Beta values, comma separated (default 0.1,...,0.5)")
      ->delimiter(',');
  add_output(sweep);

  auto* compare = app.add_subcommand("compare-modes", "No-dc, fixed and flexible side by side");
  add_case(compare);
  add_scenarios(compare);
  add_beta(compare, "Beta for the flexible mode (default 0.5)");
  add_penalty(compare);
  add_output(compare);

  auto* curtail = app.add_subcommand("curtailment", "Solar curtailment, fixed versus flexible");
  add_case(curtail);
  add_scenarios(curtail);
  add_beta(curtail, "Beta for the flexible mode (default 0.5)");
  add_penalty(curtail);
  add_output(curtail);

  auto* check = app.add_subcommand("validate", "Check a case file and list every violation");
  add_case(check);

  auto* exporter = app.add_subcommand("export-lp", "Write the LP in CPLEX LP format");
  add_case(exporter);
  add_scenarios(exporter);
  add_mode(exporter);
  add_beta(exporter, "Transferable share of each data-center load (flexible mode)");
  exporter->add_flag("--relaxed", cfg.relaxed, "Include virtual branch capacity");
  add_penalty(exporter);
  exporter->add_option("--out", cfg.out_path, "Output file (default: standard output)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  auto* sub = app.get_subcommands().front();
  cfg.command = sub->get_name();
  if (auto* opt = sub->get_option_no_throw("--beta")) cfg.beta_given = opt->count() > 0;
  if (auto* opt = sub->get_option_no_throw("--alpha-penalty")) {
    cfg.alpha_penalty_given = opt->count() > 0;
  }

  set_logging(static_cast<int>(verbose->count()), err);
  int code = kExitFailure;
  try {
    if (cfg.command == "solve") code = cmd_solve(cfg, out, false);
    else if (cfg.command == "diagnose") code = cmd_solve(cfg, out, true);
    else if (cfg.command == "sweep-beta") code = cmd_sweep(cfg, out);
    else if (cfg.command == "compare-modes") code = cmd_compare(cfg, out);
    else if (cfg.command == "curtailment") code = cmd_curtailment(cfg, out);
    else if (cfg.command == "validate") code = cmd_validate(cfg, out);
    else if (cfg.command == "export-lp") code = cmd_export_lp(cfg, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    code = kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    code = kExitUsage;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    code = kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    code = kExitFailure;
  }
  restore_logging();
  return code;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace gridflex::cli
