#include "gridflex/case_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <set>
#include <unordered_map>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace gridflex {

int Case::bus_index(int id) const {
  for (std::size_t i = 0; i < buses.size(); ++i) {
    if (buses[i].id == id) return static_cast<int>(i);
  }
  throw ValidationError(fmt::format("unknown bus {}", id));
}

int Case::reference_index() const {
  for (std::size_t i = 0; i < buses.size(); ++i) {
    if (buses[i].is_reference) return static_cast<int>(i);
  }
  return -1;
}

double Case::total_base_load() const {
  return std::accumulate(buses.begin(), buses.end(), 0.0,
                         [](double s, const Bus& b) { return s + b.base_load; });
}

double Case::total_dc_load() const {
  return std::accumulate(data_centers.begin(), data_centers.end(), 0.0,
                         [](double s, const DataCenter& d) { return s + d.original_load; });
}

double Case::max_generator_cost() const {
  double m = 0.0;
  for (const auto& g : generators) m = std::max(m, g.cost);
  return m;
}

std::vector<std::string> Case::scenario_labels() const {
  std::vector<std::string> labels;
  for (const auto& [label, mult] : scenario_multipliers) labels.push_back(label);
  // Keep the conventional ordering when the usual labels are present.
  static const std::vector<std::string> kConventional = {"peak", "shoulder", "off-peak"};
  std::stable_sort(labels.begin(), labels.end(), [](const std::string& a, const std::string& b) {
    auto rank = [](const std::string& s) {
      auto it = std::find(kConventional.begin(), kConventional.end(), s);
      return static_cast<int>(it - kConventional.begin());
    };
    return rank(a) < rank(b);
  });
  for (const auto& site : solar_sites) {
    for (const auto& [label, mw] : site.available) {
      if (std::find(labels.begin(), labels.end(), label) == labels.end()) labels.push_back(label);
    }
  }
  return labels;
}

bool Case::operator==(const Case& other) const {
  return base_mva == other.base_mva && reserve_window == other.reserve_window &&
         scenario_multipliers == other.scenario_multipliers && buses == other.buses &&
         branches == other.branches && generators == other.generators &&
         solar_sites == other.solar_sites && data_centers == other.data_centers;
}

namespace {

int kind_rank(const std::string& kind) {
  static const std::vector<std::string> order = {"case", "bus", "branch", "generator", "solar",
                                                 "datacenter"};
  auto it = std::find(order.begin(), order.end(), kind);
  return static_cast<int>(it - order.begin());
}

template <typename T, typename IdOf>
void check_unique(const std::vector<T>& items, IdOf id_of, const char* kind,
                  std::vector<Violation>& out) {
  std::set<int> seen;
  std::set<int> reported;
  for (const auto& item : items) {
    int id = id_of(item);
    if (!seen.insert(id).second && reported.insert(id).second) {
      out.push_back({kind, id, fmt::format("duplicate {} id {}", kind, id)});
    }
  }
}

}  // namespace

std::vector<Violation> validate(const Case& c) {
  std::vector<Violation> out;
  std::set<int> bus_ids;
  for (const auto& b : c.buses) bus_ids.insert(b.id);
  auto has_bus = [&](int id) { return bus_ids.count(id) > 0; };

  if (!(c.base_mva > 0.0)) out.push_back({"case", 0, "base_mva must be positive"});
  if (!(c.reserve_window > 0.0)) out.push_back({"case", 0, "reserve_window must be positive"});
  if (c.buses.empty()) out.push_back({"case", 0, "case has no buses"});
  for (const auto& [label, mult] : c.scenario_multipliers) {
    if (!(mult > 0.0) || !std::isfinite(mult)) {
      out.push_back({"case", 0, fmt::format("scenario '{}' multiplier must be positive", label)});
    }
  }

  // buses
  check_unique(c.buses, [](const Bus& b) { return b.id; }, "bus", out);
  std::vector<int> refs;
  for (const auto& b : c.buses) {
    if (!(b.base_load >= 0.0) || !std::isfinite(b.base_load)) {
      out.push_back({"bus", b.id, fmt::format("bus {} base_load must be non-negative", b.id)});
    }
    if (b.is_reference) refs.push_back(b.id);
  }
  if (!c.buses.empty() && refs.empty()) {
    out.push_back({"case", 0, "no reference bus"});
  } else if (refs.size() > 1) {
    out.push_back({"bus", refs.front(),
                   fmt::format("multiple reference buses: {}", fmt::join(refs, ", "))});
  }

  // branches
  check_unique(c.branches, [](const Branch& k) { return k.id; }, "branch", out);
  for (const auto& k : c.branches) {
    if (!(k.reactance > 0.0)) {
      out.push_back({"branch", k.id, fmt::format("branch {} reactance must be positive", k.id)});
    }
    if (!(k.rate_a > 0.0)) {
      out.push_back({"branch", k.id, fmt::format("branch {} rate_a must be positive", k.id)});
    }
    if (k.from_bus == k.to_bus) {
      out.push_back({"branch", k.id, fmt::format("branch {} connects bus {} to itself", k.id,
                                                  k.from_bus)});
    }
    for (int end : {k.from_bus, k.to_bus}) {
      if (!has_bus(end)) {
        out.push_back(
            {"branch", k.id, fmt::format("branch {} references missing bus {}", k.id, end)});
      }
    }
  }

  // generators
  check_unique(c.generators, [](const Generator& g) { return g.id; }, "generator", out);
  for (const auto& g : c.generators) {
    if (!has_bus(g.bus)) {
      out.push_back(
          {"generator", g.id, fmt::format("generator {} references missing bus {}", g.id, g.bus)});
    }
    if (!(g.p_min >= 0.0 && g.p_min <= g.p_max) || !std::isfinite(g.p_max)) {
      out.push_back({"generator", g.id,
                     fmt::format("generator {} requires 0 <= p_min <= p_max", g.id)});
    }
    if (!(g.cost >= 0.0) || !std::isfinite(g.cost)) {
      out.push_back({"generator", g.id, fmt::format("generator {} cost must be non-negative", g.id)});
    }
    if (!(g.ramp_up >= 0.0)) {
      out.push_back(
          {"generator", g.id, fmt::format("generator {} ramp_up must be non-negative", g.id)});
    }
  }

  // solar
  for (const auto& s : c.solar_sites) {
    if (!has_bus(s.bus)) {
      out.push_back({"solar", s.bus, fmt::format("solar site references missing bus {}", s.bus)});
    }
    for (const auto& [label, mw] : s.available) {
      if (!(mw >= 0.0) || !std::isfinite(mw)) {
        out.push_back({"solar", s.bus,
                       fmt::format("solar site at bus {} has negative availability for '{}'",
                                   s.bus, label)});
      }
    }
  }

  // data centers
  check_unique(c.data_centers, [](const DataCenter& d) { return d.id; }, "datacenter", out);
  for (const auto& d : c.data_centers) {
    if (!has_bus(d.bus)) {
      out.push_back({"datacenter", d.id,
                     fmt::format("data center {} references missing bus {}", d.id, d.bus)});
    }
    if (!(d.original_load >= 0.0 && d.original_load <= d.cap) || !std::isfinite(d.cap)) {
      out.push_back({"datacenter", d.id,
                     fmt::format("data center {} requires 0 <= original_load ({}) <= cap ({})",
                                 d.id, d.original_load, d.cap)});
    }
  }

  // connectivity over branches whose ends resolve
  if (!c.buses.empty()) {
    std::unordered_map<int, std::vector<int>> adj;
    for (const auto& k : c.branches) {
      if (has_bus(k.from_bus) && has_bus(k.to_bus)) {
        adj[k.from_bus].push_back(k.to_bus);
        adj[k.to_bus].push_back(k.from_bus);
      }
    }
    std::set<int> reached{c.buses.front().id};
    std::queue<int> frontier;
    frontier.push(c.buses.front().id);
    while (!frontier.empty()) {
      int u = frontier.front();
      frontier.pop();
      for (int v : adj[u]) {
        if (reached.insert(v).second) frontier.push(v);
      }
    }
    if (reached.size() != bus_ids.size()) {
      std::vector<int> missing;
      for (int id : bus_ids) {
        if (!reached.count(id)) missing.push_back(id);
      }
      out.push_back({"case", 0,
                     fmt::format("branch graph is not connected; unreachable buses: {}",
                                 fmt::join(missing, ", "))});
    }
  }

  std::stable_sort(out.begin(), out.end(), [](const Violation& a, const Violation& b) {
    int ra = kind_rank(a.kind), rb = kind_rank(b.kind);
    return ra != rb ? ra < rb : a.id < b.id;
  });
  return out;
}

std::string_view to_string(DcMode mode) {
  switch (mode) {
    case DcMode::NoDc: return "no-dc";
    case DcMode::Fixed: return "fixed";
    case DcMode::Flexible: return "flexible";
  }
  return "?";
}

DcMode parse_dc_mode(std::string_view text) {
  if (text == "no-dc") return DcMode::NoDc;
  if (text == "fixed") return DcMode::Fixed;
  if (text == "flexible") return DcMode::Flexible;
  throw ValidationError(fmt::format("unknown data-center mode '{}'", text));
}

ScenarioSpec make_scenario(const Case& c, const std::string& label, DcMode mode, double beta,
                           bool relaxed) {
  ScenarioSpec s;
  s.label = label;
  s.dc_mode = mode;
  s.beta = beta;
  s.relaxed = relaxed;
  if (auto it = c.scenario_multipliers.find(label); it != c.scenario_multipliers.end()) {
    s.load_multiplier = it->second;
  } else if (label == "peak") {
    s.load_multiplier = 1.2;
  } else if (label == "shoulder") {
    s.load_multiplier = 1.0;
  } else if (label == "off-peak") {
    s.load_multiplier = 0.8;
  } else {
    throw ValidationError(fmt::format("unknown scenario label '{}'", label));
  }
  return s;
}

Instance apply_scenario(std::shared_ptr<const Case> c, const ScenarioSpec& scenario) {
  if (!c) throw ValidationError("apply_scenario: null case");
  if (auto violations = validate(*c); !violations.empty()) {
    throw ValidationError("invalid case: " + violations.front().message);
  }
  if (!(scenario.load_multiplier > 0.0) || !std::isfinite(scenario.load_multiplier)) {
    throw ValidationError("load_multiplier must be positive");
  }
  if (!(scenario.beta >= 0.0 && scenario.beta <= 1.0)) {
    throw ValidationError(fmt::format("beta {} outside [0, 1]", scenario.beta));
  }
  if (scenario.beta > 0.0 && scenario.dc_mode != DcMode::Flexible) {
    throw ValidationError(fmt::format("beta {} given with data-center mode '{}'; beta applies only "
                                      "to flexible mode",
                                      scenario.beta, to_string(scenario.dc_mode)));
  }
  if (scenario.relaxed && !(scenario.alpha_penalty > c->max_generator_cost())) {
    throw ValidationError(fmt::format("alpha_penalty {} must exceed the largest generator cost {}",
                                      scenario.alpha_penalty, c->max_generator_cost()));
  }

  Instance inst;
  inst.scenario = scenario;
  const auto nb = static_cast<Eigen::Index>(c->buses.size());
  inst.effective_load.resize(nb);
  for (Eigen::Index i = 0; i < nb; ++i) {
    inst.effective_load[i] = c->buses[i].base_load * scenario.load_multiplier;
  }
  inst.effective_solar = Eigen::VectorXd::Zero(nb);
  inst.site_available.resize(static_cast<Eigen::Index>(c->solar_sites.size()));
  for (std::size_t s = 0; s < c->solar_sites.size(); ++s) {
    const auto& site = c->solar_sites[s];
    auto it = site.available.find(scenario.label);
    if (it == site.available.end()) {
      throw ValidationError(fmt::format("solar site at bus {} has no availability for scenario '{}'",
                                        site.bus, scenario.label));
    }
    inst.site_available[static_cast<Eigen::Index>(s)] = it->second;
    inst.effective_solar[c->bus_index(site.bus)] += it->second;
  }
  inst.dc_active.assign(c->data_centers.size(), scenario.dc_mode != DcMode::NoDc);
  inst.grid = std::move(c);
  return inst;
}

}  // namespace gridflex
