#include "random_opf.hpp"

#include <set>

namespace gridflex::testing {

Case random_case(std::mt19937_64& rng, const RandomCaseOptions& opt) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  Case c;
  c.name = "random";
  c.scenario_multipliers["shoulder"] = 1.0;
  const int nb = pick(opt.min_buses, opt.max_buses);
  double total_load = 0.0;
  for (int i = 1; i <= nb; ++i) {
    double load = unit(rng) < 0.7 ? uniform(20.0, 120.0) : 0.0;
    total_load += load;
    c.buses.push_back({i, load, i == 1});
  }

  std::set<std::pair<int, int>> edges;
  for (int i = 2; i <= nb; ++i) edges.insert({pick(1, i - 1), i});
  for (int extra = nb / 2; extra > 0; --extra) {
    int a = pick(1, nb), b = pick(1, nb);
    if (a != b) edges.insert({std::min(a, b), std::max(a, b)});
  }
  int id = 1;
  for (auto [f, t] : edges) {
    c.branches.push_back({id++, f, t, uniform(0.05, 0.3), uniform(opt.min_rate, opt.max_rate)});
  }

  double dc_total = 0.0;
  const int ndc = pick(2, 3);
  for (int d = 1; d <= ndc; ++d) {
    double orig = uniform(20.0, 80.0);
    dc_total += orig;
    c.data_centers.push_back({d, pick(1, nb), orig, orig * uniform(1.5, 2.5)});
  }

  const int ns = pick(0, 2);
  for (int s = 0; s < ns; ++s) {
    c.solar_sites.push_back({pick(1, nb), {{"shoulder", uniform(10.0, 80.0)}}});
  }

  // Each unit can carry most of the demand and cover another unit's loss.
  const int ng = pick(3, 5);
  const double demand = total_load + dc_total;
  for (int g = 1; g <= ng; ++g) {
    double pmax = demand * uniform(0.6, 1.0);
    c.generators.push_back({g, pick(1, nb), 0.0, pmax, uniform(10.0, 60.0), pmax / 5.0});
  }
  return c;
}

}  // namespace gridflex::testing
