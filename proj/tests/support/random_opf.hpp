#pragma once

#include <random>

#include "gridflex/case_model.hpp"

namespace gridflex::testing {

struct RandomCaseOptions {
  int min_buses = 5;
  int max_buses = 15;
  double min_rate = 40.0;  // branch ratings drawn from [min_rate, max_rate]
  double max_rate = 250.0;
};

/// Connected random network with 3-5 units, continuous costs, 0-2 solar
/// sites and 2-3 data centers. Only the "shoulder" scenario is defined.
Case random_case(std::mt19937_64& rng, const RandomCaseOptions& options = {});

}  // namespace gridflex::testing
