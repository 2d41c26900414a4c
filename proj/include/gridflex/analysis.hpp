#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gridflex/opf.hpp"

namespace gridflex {

struct AnalysisOptions {
  int threads = 1;  // worker threads for independent solves; results do not depend on it
  double alpha_penalty = kDefaultAlphaPenalty;
  lp::SimplexOptions simplex;
};

// ---- line loading ---------------------------------------------------------

struct LineLoadingRow {
  int branch = 0;  // branch id
  int from = 0;
  int to = 0;
  double flow_mw = 0.0;
  double rate_mw = 0.0;
  double util_pct = 0.0;  // 100 * |flow| / rate
  double alpha_mw = 0.0;
};

/// Every branch once, by utilization descending (ties by branch id).
struct LineLoadingReport {
  std::vector<LineLoadingRow> rows;
};

LineLoadingReport line_loading(const DispatchResult& result, const Case& c);

// ---- beta sweep -----------------------------------------------------------

inline constexpr double kSaturationTolerance = 1e-4;  // relative, against the beta = 1 solve

struct BetaSweepRow {
  std::string scenario;
  double beta = 0.0;
  bool feasible = false;
  double total_cost = 0.0;  // generation cost; meaningful only when feasible
  double mean_lmp = 0.0;
  bool saturated = false;
};

struct BetaSweepReport {
  std::vector<BetaSweepRow> rows;  // grouped by scenario (input order), beta ascending
  std::vector<std::pair<std::string, double>> reference_cost;  // beta = 1 cost per scenario
};

/// Flexible-mode solves for every (scenario, beta). Throws Error before any
/// solve when `betas` is empty or holds a value outside [0, 1].
BetaSweepReport beta_sweep(const std::shared_ptr<const Case>& c,
                           const std::vector<std::string>& scenarios,
                           const std::vector<double>& betas, const AnalysisOptions& options = {});

// ---- curtailment ----------------------------------------------------------

struct CurtailmentRow {
  std::string scenario;
  double fixed_mw = 0.0;
  double optimized_mw = 0.0;
  std::optional<double> reduction_pct;  // absent when fixed_mw is zero
  bool fixed_relaxed = false;           // Fixed leg needed the alpha relaxation
  bool optimized_relaxed = false;
  Eigen::VectorXd fixed_sites;  // per solar site
  Eigen::VectorXd optimized_sites;
};

struct CurtailmentReport {
  double beta = 0.0;
  std::vector<CurtailmentRow> rows;
};

/// Fixed versus Flexible(beta) curtailment. Each leg falls back to the
/// alpha-relaxed solve when its unrelaxed problem is infeasible. Throws
/// Error if the case has no solar site.
CurtailmentReport curtailment_report(const std::shared_ptr<const Case>& c,
                                     const std::vector<std::string>& scenarios, double beta,
                                     const AnalysisOptions& options = {});

// ---- mode comparison ------------------------------------------------------

struct ModeRow {
  std::string scenario;
  std::string mode;  // "no-dc", "fixed", "fixed-relaxed", "flexible"
  lp::Status status = lp::Status::Infeasible;
  double gen_cost = 0.0;
  double penalty_cost = 0.0;
  double mean_lmp = 0.0;
  double sum_alpha = 0.0;
  std::optional<int> critical_branch;  // id of the branch with the largest alpha
  std::vector<int> violated_branches;  // ids, alpha > 1e-6
  Eigen::VectorXd dc_loads;
};

struct ModeComparison {
  double beta = 0.0;
  std::vector<ModeRow> rows;  // per scenario: no-dc, fixed, [fixed-relaxed], flexible

  const ModeRow* find(const std::string& scenario, const std::string& mode) const;
  /// Flexible generation cost <= Fixed generation cost (relaxed when needed);
  /// absent if either leg has no solution.
  std::optional<bool> flexible_dominates(const std::string& scenario) const;
};

ModeComparison mode_comparison(const std::shared_ptr<const Case>& c,
                               const std::vector<std::string>& scenarios, double beta,
                               const AnalysisOptions& options = {});

// ---- report tables --------------------------------------------------------

/// One cell. Numbers carry their printed precision (negative: shortest
/// round-trip form); lists appear as
/// ';'-separated values in CSV and arrays in JSON.
struct Cell {
  std::variant<std::monostate, long long, double, std::string, bool, std::vector<double>,
               std::vector<long long>>
      value;
  int precision = 2;

  Cell() = default;
  Cell(std::monostate) {}
  Cell(int v) : value(static_cast<long long>(v)) {}
  Cell(double v, int prec) : value(v), precision(prec) {}
  Cell(std::string v) : value(std::move(v)) {}
  Cell(const char* v) : value(std::string(v)) {}
  Cell(bool v) : value(v) {}
  Cell(std::vector<double> v, int prec) : value(std::move(v)), precision(prec) {}
  Cell(const std::vector<int>& v) : value(std::vector<long long>(v.begin(), v.end())) {}
};

struct Column {
  std::string name;
  bool in_csv = true;  // false: JSON only
};

struct ReportTable {
  std::string title;
  std::vector<Column> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::pair<std::string, Cell>> meta;  // JSON only
};

ReportTable to_table(const LineLoadingReport& report);
ReportTable to_table(const BetaSweepReport& report);
ReportTable to_table(const CurtailmentReport& report);
ReportTable to_table(const ModeComparison& report);

enum class Format { Csv, Json };

Format parse_format(std::string_view text);

struct EmitOptions {
  bool timestamp = true;  // JSON "generated_at" field
};

/// CSV: header line of the CSV columns then one line per row. JSON: an
/// object with "report", optional "generated_at", "meta" (if any) and "rows". Throws Error
/// if the stream fails.
void emit(const ReportTable& table, Format format, std::ostream& out,
          const EmitOptions& options = {});

/// Value rounded to `precision` decimals, as emitted.
double round_to(double value, int precision);

}  // namespace gridflex
