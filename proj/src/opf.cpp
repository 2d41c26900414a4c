#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "gridflex/opf.hpp"

namespace gridflex {

using lp::LinearExpr;
using lp::Sense;

namespace {

Eigen::VectorXd values(const lp::LpSolution& s, const std::vector<lp::VarId>& vars) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(vars.size()));
  for (std::size_t i = 0; i < vars.size(); ++i) out[static_cast<Eigen::Index>(i)] = s.value(vars[i]);
  return out;
}

}  // namespace

std::vector<int> DispatchResult::violated_branches(double tol) const {
  std::vector<int> out;
  for (Eigen::Index k = 0; k < alphas.size(); ++k) {
    if (alphas[k] > tol) out.push_back(static_cast<int>(k));
  }
  return out;
}

std::string describe(const ScenarioSpec& s) {
  std::string out = fmt::format("{}/{}", s.label, to_string(s.dc_mode));
  if (s.dc_mode == DcMode::Flexible) out += fmt::format(" beta={}", s.beta);
  if (s.relaxed) out += " relaxed";
  return out;
}

OpfModel build_opf(const Instance& inst) {
  const Case& c = inst.case_data();
  const ScenarioSpec& sc = inst.scenario;
  OpfModel model;
  lp::LpProblem& p = model.problem;
  OpfVariables& v = model.vars;
  const auto nb = c.buses.size();

  for (const auto& g : c.generators) {
    v.dispatch.push_back(p.add_variable(g.p_min, g.p_max, g.cost, fmt::format("pg_{}", g.id)));
  }
  const bool reserves = c.generators.size() > 1;
  if (reserves) {
    for (const auto& g : c.generators) {
      v.reserve.push_back(
          p.add_variable(0.0, g.ramp_up * c.reserve_window, 0.0, fmt::format("r_{}", g.id)));
    }
  }
  for (const auto& b : c.buses) {
    v.angle.push_back(p.add_variable(-lp::kInfinity, lp::kInfinity, 0.0, fmt::format("theta_{}", b.id)));
  }
  for (const auto& k : c.branches) {
    v.flow.push_back(p.add_variable(-lp::kInfinity, lp::kInfinity, 0.0, fmt::format("pk_{}", k.id)));
  }
  for (std::size_t s = 0; s < c.solar_sites.size(); ++s) {
    double avail = inst.site_available[static_cast<Eigen::Index>(s)];
    v.curtailment.push_back(
        p.add_variable(0.0, avail, 0.0, fmt::format("curt_{}_b{}", s + 1, c.solar_sites[s].bus)));
  }
  if (inst.has_dc_variables()) {
    for (const auto& d : c.data_centers) {
      double lo = d.original_load, hi = d.original_load;
      if (sc.dc_mode == DcMode::Flexible) {
        lo = (1.0 - sc.beta) * d.original_load;
        hi = d.cap;
      }
      v.dc_load.push_back(p.add_variable(lo, hi, 0.0, fmt::format("dc_{}", d.id)));
    }
  }
  if (sc.relaxed) {
    for (const auto& k : c.branches) {
      v.alpha.push_back(p.add_variable(0.0, lp::kInfinity, sc.alpha_penalty, fmt::format("alpha_{}", k.id)));
    }
  }

  for (std::size_t k = 0; k < c.branches.size(); ++k) {
    const auto& br = c.branches[k];
    double b = c.base_mva / br.reactance;
    LinearExpr e;
    e.add(v.flow[k], 1.0);
    e.add(v.angle[c.bus_index(br.from_bus)], -b);
    e.add(v.angle[c.bus_index(br.to_bus)], b);
    v.flow_definition.push_back(p.add_constraint(e, Sense::Equal, 0.0, fmt::format("flow_{}", br.id)));
  }

  std::vector<LinearExpr> bal(nb);
  Eigen::VectorXd rhs = inst.effective_load - inst.effective_solar;
  for (std::size_t g = 0; g < c.generators.size(); ++g) {
    bal[c.bus_index(c.generators[g].bus)].add(v.dispatch[g], 1.0);
  }
  for (std::size_t s = 0; s < c.solar_sites.size(); ++s) {
    bal[c.bus_index(c.solar_sites[s].bus)].add(v.curtailment[s], -1.0);
  }
  for (std::size_t k = 0; k < c.branches.size(); ++k) {
    bal[c.bus_index(c.branches[k].from_bus)].add(v.flow[k], -1.0);
    bal[c.bus_index(c.branches[k].to_bus)].add(v.flow[k], 1.0);
  }
  for (std::size_t d = 0; d < v.dc_load.size(); ++d) {
    bal[c.bus_index(c.data_centers[d].bus)].add(v.dc_load[d], -1.0);
  }
  for (std::size_t n = 0; n < nb; ++n) {
    v.balance.push_back(p.add_constraint(bal[n], Sense::Equal, rhs[static_cast<Eigen::Index>(n)],
                                         fmt::format("bal_{}", c.buses[n].id)));
  }

  for (std::size_t k = 0; k < c.branches.size(); ++k) {
    const auto& br = c.branches[k];
    LinearExpr up, lo;
    up.add(v.flow[k], 1.0);
    lo.add(v.flow[k], 1.0);
    if (sc.relaxed) {
      up.add(v.alpha[k], -1.0);
      lo.add(v.alpha[k], 1.0);
    }
    v.thermal_upper.push_back(
        p.add_constraint(up, Sense::LessEqual, br.rate_a, fmt::format("therm_up_{}", br.id)));
    v.thermal_lower.push_back(
        p.add_constraint(lo, Sense::GreaterEqual, -br.rate_a, fmt::format("therm_lo_{}", br.id)));
  }

  if (reserves) {
    for (std::size_t g = 0; g < c.generators.size(); ++g) {
      const auto& gen = c.generators[g];
      v.reserve_capacity.push_back(p.add_constraint({{v.dispatch[g], 1.0}, {v.reserve[g], 1.0}},
                                                    Sense::LessEqual, gen.p_max,
                                                    fmt::format("res_cap_{}", gen.id)));
    }
    for (std::size_t g = 0; g < c.generators.size(); ++g) {
      // Literal form: r_g appears on both sides and cancels.
      LinearExpr e;
      for (auto r : v.reserve) e.add(r, 1.0);
      e.add(v.dispatch[g], -1.0);
      e.add(v.reserve[g], -1.0);
      v.reserve_cover.push_back(p.add_constraint(e, Sense::GreaterEqual, 0.0,
                                                 fmt::format("res_cov_{}", c.generators[g].id)));
    }
  }

  int ref = c.reference_index();
  v.reference_angle = p.add_constraint({{v.angle[ref], 1.0}}, Sense::Equal, 0.0, "ref_angle");

  if (!v.dc_load.empty()) {
    LinearExpr e;
    for (auto d : v.dc_load) e.add(d, 1.0);
    v.dc_conservation = p.add_constraint(e, Sense::Equal, c.total_dc_load(), "dc_total");
  }
  return model;
}

DispatchResult solve_opf(const Instance& inst, const lp::SimplexOptions& options) {
  const Case& c = inst.case_data();
  OpfModel model = build_opf(inst);
  lp::LpSolution s;
  try {
    s = lp::solve(model.problem, options);
  } catch (const Error& e) {
    throw SolveError(fmt::format("{} [{}]: {}", c.name, describe(inst.scenario), e.what()));
  }
  spdlog::debug("opf {} [{}]: {} in {} iterations", c.name, describe(inst.scenario),
                lp::to_string(s.status), s.iterations);

  DispatchResult r;
  r.status = s.status;
  r.iterations = s.iterations;
  if (!s.optimal()) return r;

  const auto& v = model.vars;
  r.dispatch = values(s, v.dispatch);
  r.reserves = v.reserve.empty() ? Eigen::VectorXd::Zero(r.dispatch.size()) : values(s, v.reserve);
  r.angles = values(s, v.angle);
  r.flows = values(s, v.flow);
  r.curtailment = values(s, v.curtailment);
  r.solar_dispatch = inst.site_available - r.curtailment;
  const auto ndc = static_cast<Eigen::Index>(c.data_centers.size());
  r.dc_loads = v.dc_load.empty() ? Eigen::VectorXd::Zero(ndc) : values(s, v.dc_load);
  const auto nk = static_cast<Eigen::Index>(c.branches.size());
  r.alphas = v.alpha.empty() ? Eigen::VectorXd::Zero(nk) : values(s, v.alpha);
  r.lmp.resize(static_cast<Eigen::Index>(v.balance.size()));
  for (std::size_t n = 0; n < v.balance.size(); ++n) {
    r.lmp[static_cast<Eigen::Index>(n)] = s.dual_of(v.balance[n]);
  }
  for (std::size_t g = 0; g < c.generators.size(); ++g) {
    r.total_cost += c.generators[g].cost * r.dispatch[static_cast<Eigen::Index>(g)];
  }
  r.penalty_cost = inst.scenario.relaxed ? inst.scenario.alpha_penalty * r.alphas.sum() : 0.0;
  return r;
}

DispatchResult diagnose_infeasibility(const Instance& inst, const lp::SimplexOptions& options) {
  if (inst.scenario.relaxed) return solve_opf(inst, options);
  ScenarioSpec spec = inst.scenario;
  spec.relaxed = true;
  return solve_opf(apply_scenario(inst.grid, spec), options);
}

LmpSummary extract_lmp(const DispatchResult& result, const Instance& inst) {
  if (!result.optimal()) {
    throw Error(fmt::format("LMPs requested from a {} result", lp::to_string(result.status)));
  }
  const Case& c = inst.case_data();
  LmpSummary out;
  out.per_bus = result.lmp;
  out.min = result.lmp.minCoeff();
  out.max = result.lmp.maxCoeff();
  out.mean = result.lmp.mean();
  Eigen::VectorXd weight = inst.effective_load;
  for (std::size_t d = 0; d < c.data_centers.size(); ++d) {
    weight[c.bus_index(c.data_centers[d].bus)] += result.dc_loads[static_cast<Eigen::Index>(d)];
  }
  double total = weight.sum();
  out.load_weighted_mean = total > 0.0 ? weight.dot(result.lmp) / total : out.mean;
  return out;
}

std::vector<std::string> check_invariants(const DispatchResult& r, const Instance& inst) {
  std::vector<std::string> bad;
  if (!r.optimal()) return bad;
  const Case& c = inst.case_data();
  const ScenarioSpec& sc = inst.scenario;

  for (std::size_t s = 0; s < c.solar_sites.size(); ++s) {
    auto i = static_cast<Eigen::Index>(s);
    double avail = inst.site_available[i];
    if (std::abs(r.solar_dispatch[i] - (avail - r.curtailment[i])) > 1e-9) {
      bad.push_back(fmt::format("solar site {}: dispatch != available - curtailment", s + 1));
    }
    if (r.curtailment[i] < -1e-9 || r.curtailment[i] > avail + 1e-9) {
      bad.push_back(fmt::format("solar site {}: curtailment {} outside [0, {}]", s + 1,
                                r.curtailment[i], avail));
    }
  }

  double supply = r.dispatch.sum() + r.solar_dispatch.sum();
  double demand = inst.effective_load.sum() + r.dc_loads.sum();
  if (std::abs(supply - demand) > 1e-5) {
    bad.push_back(fmt::format("system balance off by {} MW", supply - demand));
  }

  for (std::size_t k = 0; k < c.branches.size(); ++k) {
    const auto& br = c.branches[k];
    auto i = static_cast<Eigen::Index>(k);
    if (std::abs(r.flows[i]) > br.rate_a + r.alphas[i] + 1e-6) {
      bad.push_back(fmt::format("branch {}: |flow| {} exceeds rate {} + alpha {}", br.id,
                                r.flows[i], br.rate_a, r.alphas[i]));
    }
    double angle_flow = c.base_mva *
                        (r.angles[c.bus_index(br.from_bus)] - r.angles[c.bus_index(br.to_bus)]) /
                        br.reactance;
    if (std::abs(r.flows[i] - angle_flow) > 1e-7) {
      bad.push_back(fmt::format("branch {}: flow definition residual {}", br.id,
                                r.flows[i] - angle_flow));
    }
  }

  if (sc.dc_mode != DcMode::NoDc) {
    double total = r.dc_loads.sum();
    if (std::abs(total - c.total_dc_load()) > 1e-6) {
      bad.push_back(fmt::format("data-center total {} != original {}", total, c.total_dc_load()));
    }
    for (std::size_t d = 0; d < c.data_centers.size(); ++d) {
      const auto& dc = c.data_centers[d];
      double l = r.dc_loads[static_cast<Eigen::Index>(d)];
      double lo = sc.dc_mode == DcMode::Flexible ? (1.0 - sc.beta) * dc.original_load
                                                 : dc.original_load;
      double hi = sc.dc_mode == DcMode::Flexible ? dc.cap : dc.original_load;
      if (l < lo - 1e-6 || l > hi + 1e-6) {
        bad.push_back(fmt::format("data center {}: load {} outside [{}, {}]", dc.id, l, lo, hi));
      }
    }
  }

  if (c.generators.size() > 1) {
    double reserve_total = r.reserves.sum();
    for (std::size_t g = 0; g < c.generators.size(); ++g) {
      const auto& gen = c.generators[g];
      auto i = static_cast<Eigen::Index>(g);
      if (r.dispatch[i] + r.reserves[i] > gen.p_max + 1e-6) {
        bad.push_back(fmt::format("generator {}: dispatch + reserve exceeds p_max", gen.id));
      }
      if (r.reserves[i] > gen.ramp_up * c.reserve_window + 1e-6 || r.reserves[i] < -1e-9) {
        bad.push_back(fmt::format("generator {}: reserve outside ramp limit", gen.id));
      }
      if (reserve_total - (r.dispatch[i] + r.reserves[i]) < -1e-6) {
        bad.push_back(fmt::format("generator {}: reserves do not cover its loss", gen.id));
      }
    }
  }
  return bad;
}

}  // namespace gridflex
