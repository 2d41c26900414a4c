#include <charconv>
#include <chrono>
#include <cmath>
#include <ostream>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <json.hpp>

#include "gridflex/analysis.hpp"

namespace gridflex {

namespace {

std::string shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string number(double v, int precision) {
  if (precision < 0) return shortest(v);
  return fmt::format("{:.{}f}", round_to(v, precision), precision);
}

double json_number(double v, int precision) { return precision < 0 ? v : round_to(v, precision); }

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string csv_cell(const Cell& cell) {
  return std::visit(
      [&](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return "";
        } else if constexpr (std::is_same_v<T, long long>) {
          return std::to_string(v);
        } else if constexpr (std::is_same_v<T, double>) {
          return number(v, cell.precision);
        } else if constexpr (std::is_same_v<T, std::string>) {
          return csv_escape(v);
        } else if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
          std::string out;
          for (std::size_t i = 0; i < v.size(); ++i) {
            out += (i ? ";" : "") + number(v[i], cell.precision);
          }
          return out;
        } else {
          std::string out;
          for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ";" : "") + std::to_string(v[i]);
          return out;
        }
      },
      cell.value);
}

nlohmann::ordered_json json_cell(const Cell& cell) {
  return std::visit(
      [&](const auto& v) -> nlohmann::ordered_json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return nullptr;
        } else if constexpr (std::is_same_v<T, double>) {
          return json_number(v, cell.precision);
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
          auto arr = nlohmann::ordered_json::array();
          for (double x : v) arr.push_back(json_number(x, cell.precision));
          return arr;
        } else {
          return v;
        }
      },
      cell.value);
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

std::string status_text(lp::Status s) { return lp::to_string(s); }

}  // namespace

double round_to(double value, int precision) {
  double scale = std::pow(10.0, precision);
  double r = std::round(value * scale) / scale;
  return r == 0.0 ? 0.0 : r;  // no negative zero
}

Format parse_format(std::string_view text) {
  if (text == "csv") return Format::Csv;
  if (text == "json") return Format::Json;
  throw Error(fmt::format("unknown format '{}' (expected csv or json)", text));
}

ReportTable to_table(const LineLoadingReport& report) {
  ReportTable t;
  t.title = "line_loading";
  t.columns = {{"branch"}, {"from"},     {"to"},      {"flow_mw"},
               {"rate_mw"}, {"util_pct"}, {"alpha_mw"}};
  for (const auto& r : report.rows) {
    t.rows.push_back({r.branch, r.from, r.to, Cell(r.flow_mw, 2), Cell(r.rate_mw, 2),
                      Cell(r.util_pct, 1), Cell(r.alpha_mw, 2)});
  }
  return t;
}

ReportTable to_table(const BetaSweepReport& report) {
  ReportTable t;
  t.title = "beta_sweep";
  t.columns = {{"scenario"}, {"beta"},     {"total_cost_usd"}, {"mean_lmp_usd_mwh"},
               {"feasible"}, {"saturated"}, {"reference_cost_usd", false}};
  for (const auto& r : report.rows) {
    Cell ref;
    for (const auto& [label, cost] : report.reference_cost) {
      if (label == r.scenario && !std::isnan(cost)) ref = Cell(cost, 2);
    }
    t.rows.push_back({r.scenario, Cell(r.beta, -1),
                      r.feasible ? Cell(r.total_cost, 2) : Cell(),
                      r.feasible ? Cell(r.mean_lmp, 2) : Cell(), r.feasible, r.saturated, ref});
  }
  return t;
}

ReportTable to_table(const CurtailmentReport& report) {
  ReportTable t;
  t.title = "curtailment";
  t.columns = {{"scenario"},
               {"fixed_curt_mw"},
               {"opt_curt_mw"},
               {"reduction_pct"},
               {"beta", false},
               {"fixed_relaxed", false},
               {"opt_relaxed", false},
               {"fixed_sites_mw", false},
               {"opt_sites_mw", false}};
  for (const auto& r : report.rows) {
    t.rows.push_back({r.scenario, Cell(r.fixed_mw, 2), Cell(r.optimized_mw, 2),
                      r.reduction_pct ? Cell(*r.reduction_pct, 1) : Cell("N/A"),
                      Cell(report.beta, -1), r.fixed_relaxed, r.optimized_relaxed,
                      Cell(to_vector(r.fixed_sites), 2), Cell(to_vector(r.optimized_sites), 2)});
  }
  return t;
}

ReportTable to_table(const ModeComparison& report) {
  ReportTable t;
  t.title = "mode_comparison";
  t.columns = {{"scenario"},
               {"mode"},
               {"status"},
               {"gen_cost_usd"},
               {"mean_lmp"},
               {"sum_alpha_mw"},
               {"critical_branch"},
               {"dc_loads"},
               {"penalty_cost_usd", false},
               {"violated_branches", false}};
  for (const auto& r : report.rows) {
    bool ok = r.status == lp::Status::Optimal;
    t.rows.push_back({r.scenario, r.mode, status_text(r.status),
                      ok ? Cell(r.gen_cost, 2) : Cell(), ok ? Cell(r.mean_lmp, 2) : Cell(),
                      ok ? Cell(r.sum_alpha, 2) : Cell(),
                      r.critical_branch ? Cell(*r.critical_branch) : Cell(),
                      Cell(to_vector(r.dc_loads), 2), ok ? Cell(r.penalty_cost, 2) : Cell(),
                      Cell(r.violated_branches)});
  }
  return t;
}

void emit(const ReportTable& table, Format format, std::ostream& out, const EmitOptions& options) {
  if (format == Format::Csv) {
    bool first = true;
    for (const auto& col : table.columns) {
      if (!col.in_csv) continue;
      out << (first ? "" : ",") << col.name;
      first = false;
    }
    out << "\n";
    for (const auto& row : table.rows) {
      first = true;
      for (std::size_t i = 0; i < table.columns.size(); ++i) {
        if (!table.columns[i].in_csv) continue;
        out << (first ? "" : ",") << csv_cell(row[i]);
        first = false;
      }
      out << "\n";
    }
  } else {
    nlohmann::ordered_json doc;
    doc["report"] = table.title;
    if (options.timestamp) {
      doc["generated_at"] = fmt::format("{:%Y-%m-%dT%H:%M:%SZ}",
                                        fmt::gmtime(std::chrono::system_clock::to_time_t(
                                            std::chrono::system_clock::now())));
    }
    if (!table.meta.empty()) {
      nlohmann::ordered_json meta;
      for (const auto& [key, cell] : table.meta) meta[key] = json_cell(cell);
      doc["meta"] = std::move(meta);
    }
    auto rows = nlohmann::ordered_json::array();
    for (const auto& row : table.rows) {
      nlohmann::ordered_json obj;
      for (std::size_t i = 0; i < table.columns.size(); ++i) {
        obj[table.columns[i].name] = json_cell(row[i]);
      }
      rows.push_back(std::move(obj));
    }
    doc["rows"] = std::move(rows);
    out << doc.dump(2) << "\n";
  }
  out.flush();
  if (!out) throw Error(fmt::format("failed to write {} report", table.title));
}

}  // namespace gridflex
