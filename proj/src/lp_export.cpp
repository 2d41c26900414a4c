#include <cctype>
#include <charconv>
#include <cmath>
#include <ostream>

#include "gridflex/lp.hpp"

namespace gridflex::lp {

namespace {

std::string num(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

// LP-format names may not start with a digit or contain spaces.
std::string sanitize(const std::string& name, char prefix, int index) {
  if (name.empty()) return prefix + std::to_string(index);
  std::string out;
  for (char c : name) {
    bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '(' ||
              c == ')' || c == '[' || c == ']' || c == '#' || c == '$';
    out += ok ? c : '_';
  }
  if (std::isdigit(static_cast<unsigned char>(out.front())) || out.front() == '.') {
    out.insert(out.begin(), prefix);
  }
  return out;
}

void write_terms(std::ostream& out, const std::vector<std::pair<int, double>>& terms,
                 const std::vector<std::string>& names) {
  if (terms.empty()) {
    out << " 0";
    if (!names.empty()) out << " " << names.front();
    return;
  }
  bool first = true;
  for (const auto& [j, a] : terms) {
    if (a < 0) {
      out << " - " << num(-a);
    } else {
      out << (first ? " " : " + ") << num(a);
    }
    out << " " << names[j];
    first = false;
  }
}

}  // namespace

void write_lp(const LpProblem& problem, std::ostream& out) {
  const int n = problem.num_variables();
  std::vector<std::string> names(n);
  for (int j = 0; j < n; ++j) names[j] = sanitize(problem.variable_name(j), 'x', j);

  out << "\\ generated by gridflex\n";
  out << "Minimize\n obj:";
  std::vector<std::pair<int, double>> obj;
  for (int j = 0; j < n; ++j) {
    if (problem.objective(j) != 0.0) obj.emplace_back(j, problem.objective(j));
  }
  write_terms(out, obj, names);
  out << "\nSubject To\n";
  for (int i = 0; i < problem.num_constraints(); ++i) {
    out << " " << sanitize(problem.constraint_name(i), 'c', i) << ":";
    write_terms(out, problem.row(i), names);
    switch (problem.sense(i)) {
      case Sense::LessEqual: out << " <= "; break;
      case Sense::GreaterEqual: out << " >= "; break;
      case Sense::Equal: out << " = "; break;
    }
    out << num(problem.rhs(i)) << "\n";
  }
  out << "Bounds\n";
  for (int j = 0; j < n; ++j) {
    double lb = problem.lower(j), ub = problem.upper(j);
    if (lb == ub) {
      out << " " << names[j] << " = " << num(lb) << "\n";
    } else if (!std::isfinite(lb) && !std::isfinite(ub)) {
      out << " " << names[j] << " free\n";
    } else {
      out << " " << (std::isfinite(lb) ? num(lb) : "-inf") << " <= " << names[j] << " <= "
          << (std::isfinite(ub) ? num(ub) : "+inf") << "\n";
    }
  }
  out << "End\n";
}

}  // namespace gridflex::lp
