#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "gridflex/case_model.hpp"

namespace gridflex {

namespace {

enum class Section { None, Meta, Scenarios, Buses, Branches, Generators, Solar, DataCenters };

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) fields.push_back(line.substr(i, j - i));
    i = j;
  }
  return fields;
}

class LineParser {
 public:
  LineParser(std::string source, int line) : source_(std::move(source)), line_(line) {}

  [[noreturn]] void fail(const std::string& field, const std::string& what) const {
    throw ParseError(source_, line_, field, what);
  }

  double number(std::string_view text, const std::string& field) const {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      fail(field, fmt::format("expected a number, got '{}'", text));
    }
    return value;
  }

  int integer(std::string_view text, const std::string& field) const {
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      fail(field, fmt::format("expected an integer, got '{}'", text));
    }
    return value;
  }

  void expect_count(const std::vector<std::string_view>& f, std::size_t n,
                    const char* layout) const {
    if (f.size() != n) {
      fail("", fmt::format("expected {} fields ({}), got {}", n, layout, f.size()));
    }
  }

 private:
  std::string source_;
  int line_;
};

Section section_from(std::string_view name) {
  if (name == "meta") return Section::Meta;
  if (name == "scenarios") return Section::Scenarios;
  if (name == "buses") return Section::Buses;
  if (name == "branches") return Section::Branches;
  if (name == "generators") return Section::Generators;
  if (name == "solar") return Section::Solar;
  if (name == "datacenters") return Section::DataCenters;
  return Section::None;
}

std::string shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

Case parse_case(std::istream& source, std::string_view source_name, bool check) {
  Case c;
  c.name = std::string(source_name);
  const std::string src(source_name);
  Section section = Section::None;
  std::set<std::string> seen_sections;
  bool saw_base = false, saw_window = false;
  // id -> line of first definition, for duplicate reporting
  std::map<int, int> bus_lines, branch_lines, gen_lines, dc_lines;

  std::string raw;
  int line_no = 0;
  while (std::getline(source, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto fields = split_fields(line);
    if (fields.empty()) continue;
    LineParser p(src, line_no);

    if (fields.front().front() == '[') {
      auto head = fields.front();
      if (fields.size() != 1 || head.back() != ']') p.fail("", "malformed section header");
      auto name = head.substr(1, head.size() - 2);
      section = section_from(name);
      if (section == Section::None) p.fail("", fmt::format("unknown section [{}]", name));
      if (!seen_sections.insert(std::string(name)).second) {
        p.fail("", fmt::format("section [{}] appears twice", name));
      }
      continue;
    }

    auto check_dup = [&](std::map<int, int>& lines, int id, const char* kind) {
      auto [it, fresh] = lines.emplace(id, line_no);
      if (!fresh) {
        p.fail("id", fmt::format("duplicate {} id {} (first defined on line {})", kind, id,
                                 it->second));
      }
    };

    switch (section) {
      case Section::None:
        p.fail("", "data outside of any section");
      case Section::Meta: {
        p.expect_count(fields, 2, "key value");
        if (fields[0] == "base_mva") {
          c.base_mva = p.number(fields[1], "base_mva");
          saw_base = true;
        } else if (fields[0] == "reserve_window_min") {
          c.reserve_window = p.number(fields[1], "reserve_window_min");
          saw_window = true;
        } else {
          p.fail(std::string(fields[0]), "unknown meta key");
        }
        break;
      }
      case Section::Scenarios: {
        p.expect_count(fields, 2, "label load_multiplier");
        std::string label(fields[0]);
        if (c.scenario_multipliers.count(label)) {
          p.fail("label", fmt::format("duplicate scenario '{}'", label));
        }
        c.scenario_multipliers[label] = p.number(fields[1], "load_multiplier");
        break;
      }
      case Section::Buses: {
        Bus b;
        if (fields.size() == 3) {
          if (fields[1] != "ref") p.fail("ref", fmt::format("expected 'ref', got '{}'", fields[1]));
          b.is_reference = true;
          b.base_load = p.number(fields[2], "base_load_mw");
        } else {
          p.expect_count(fields, 2, "id [ref] base_load_mw");
          b.base_load = p.number(fields[1], "base_load_mw");
        }
        b.id = p.integer(fields[0], "id");
        check_dup(bus_lines, b.id, "bus");
        c.buses.push_back(b);
        break;
      }
      case Section::Branches: {
        p.expect_count(fields, 5, "id from to x_pu rate_a_mw");
        Branch k;
        k.id = p.integer(fields[0], "id");
        k.from_bus = p.integer(fields[1], "from");
        k.to_bus = p.integer(fields[2], "to");
        k.reactance = p.number(fields[3], "x_pu");
        k.rate_a = p.number(fields[4], "rate_a_mw");
        check_dup(branch_lines, k.id, "branch");
        c.branches.push_back(k);
        break;
      }
      case Section::Generators: {
        p.expect_count(fields, 6, "id bus p_min p_max cost ramp_up");
        Generator g;
        g.id = p.integer(fields[0], "id");
        g.bus = p.integer(fields[1], "bus");
        g.p_min = p.number(fields[2], "p_min");
        g.p_max = p.number(fields[3], "p_max");
        g.cost = p.number(fields[4], "cost");
        g.ramp_up = p.number(fields[5], "ramp_up");
        check_dup(gen_lines, g.id, "generator");
        c.generators.push_back(g);
        break;
      }
      case Section::Solar: {
        if (fields.size() < 2) p.fail("", "expected 'bus label=mw ...'");
        SolarSite s;
        s.bus = p.integer(fields[0], "bus");
        for (std::size_t i = 1; i < fields.size(); ++i) {
          auto eq = fields[i].find('=');
          if (eq == std::string_view::npos || eq == 0) {
            p.fail("label=mw", fmt::format("expected label=mw, got '{}'", fields[i]));
          }
          std::string label(fields[i].substr(0, eq));
          if (s.available.count(label)) {
            p.fail(label, fmt::format("label '{}' repeated", label));
          }
          s.available[label] = p.number(fields[i].substr(eq + 1), label);
        }
        c.solar_sites.push_back(std::move(s));
        break;
      }
      case Section::DataCenters: {
        p.expect_count(fields, 4, "id bus original_mw cap_mw");
        DataCenter d;
        d.id = p.integer(fields[0], "id");
        d.bus = p.integer(fields[1], "bus");
        d.original_load = p.number(fields[2], "original_mw");
        d.cap = p.number(fields[3], "cap_mw");
        check_dup(dc_lines, d.id, "datacenter");
        c.data_centers.push_back(d);
        break;
      }
    }
  }
  if (!saw_base || !saw_window) {
    throw ParseError(src, 0, "meta", "[meta] must define base_mva and reserve_window_min");
  }

  if (!check) return c;
  if (auto violations = validate(c); !violations.empty()) {
    std::vector<std::string> messages;
    for (const auto& v : violations) messages.push_back(v.message);
    throw ValidationError(fmt::format("{}: {}", src, fmt::join(messages, "; ")));
  }
  return c;
}

Case load_case(const std::filesystem::path& path, bool check) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open case file '{}'", path.string()));
  return parse_case(in, path.string(), check);
}

void write_case(const Case& c, std::ostream& out) {
  out << "[meta]\n";
  out << "base_mva " << shortest(c.base_mva) << "\n";
  out << "reserve_window_min " << shortest(c.reserve_window) << "\n";
  if (!c.scenario_multipliers.empty()) {
    out << "\n[scenarios]\n";
    for (const auto& [label, mult] : c.scenario_multipliers) {
      out << label << " " << shortest(mult) << "\n";
    }
  }
  out << "\n[buses]\n";
  for (const auto& b : c.buses) {
    out << b.id << (b.is_reference ? " ref " : " ") << shortest(b.base_load) << "\n";
  }
  out << "\n[branches]\n";
  for (const auto& k : c.branches) {
    out << k.id << " " << k.from_bus << " " << k.to_bus << " " << shortest(k.reactance) << " "
        << shortest(k.rate_a) << "\n";
  }
  out << "\n[generators]\n";
  for (const auto& g : c.generators) {
    out << g.id << " " << g.bus << " " << shortest(g.p_min) << " " << shortest(g.p_max) << " "
        << shortest(g.cost) << " " << shortest(g.ramp_up) << "\n";
  }
  out << "\n[solar]\n";
  for (const auto& s : c.solar_sites) {
    out << s.bus;
    for (const auto& [label, mw] : s.available) out << " " << label << "=" << shortest(mw);
    out << "\n";
  }
  out << "\n[datacenters]\n";
  for (const auto& d : c.data_centers) {
    out << d.id << " " << d.bus << " " << shortest(d.original_load) << " " << shortest(d.cap)
        << "\n";
  }
}

}  // namespace gridflex
