#pragma once

#include <cstddef>
#include <cstdint>

#include "slicing/model.hpp"
#include "slicing/rng.hpp"

namespace slicesim {

struct GeneratorOptions {
  std::size_t max_classes = 4;
  std::size_t max_resources = 3;
  std::size_t slices = 2;
  double min_demand = 0.5;
  double max_demand = 1.5;
  double density = 0.6;         // chance that a class uses a given resource
  bool demand_at_least_one = false;  // rescale each class so its smallest positive demand is 1
  bool single_resource_per_class = false;
};

/// Random instance with every slice holding at least one class.
slicing::Instance random_instance(slicing::Rng& rng, const GeneratorOptions& opts = {});

/// Population with 1..max_n users in every class.
slicing::PopulationState random_population(slicing::Rng& rng, const slicing::Instance& inst,
                                           std::int64_t max_n = 5);

/// Uniform on [lo, hi).
double uniform(slicing::Rng& rng, double lo, double hi);
std::size_t uniform_index(slicing::Rng& rng, std::size_t n);

}  // namespace slicesim
