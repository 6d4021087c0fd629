#include "slicesim/generate.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace slicesim {

double uniform(slicing::Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

std::size_t uniform_index(slicing::Rng& rng, std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(n)));
}

slicing::Instance random_instance(slicing::Rng& rng, const GeneratorOptions& opts) {
  slicing::InstanceSpec s;
  const std::size_t nv = std::max<std::size_t>(1, opts.slices);
  const std::size_t nc = nv + uniform_index(rng, opts.max_classes - nv + 1);
  const std::size_t nr = 1 + uniform_index(rng, opts.max_resources);

  for (std::size_t r = 0; r < nr; ++r) s.resources.push_back({"r" + std::to_string(r + 1), 1.0});
  for (std::size_t v = 0; v < nv; ++v) s.slices.push_back({"s" + std::to_string(v + 1), uniform(rng, 0.1, 1.0)});
  for (std::size_t c = 0; c < nc; ++c) {
    slicing::UserClass uc;
    uc.id = "c" + std::to_string(c + 1);
    uc.slice = s.slices[c < nv ? c : uniform_index(rng, nv)].id;
    uc.demand.assign(nr, 0.0);
    if (opts.single_resource_per_class) {
      uc.demand[uniform_index(rng, nr)] = uniform(rng, opts.min_demand, opts.max_demand);
    } else {
      for (std::size_t r = 0; r < nr; ++r)
        if (rng.uniform() < opts.density) uc.demand[r] = uniform(rng, opts.min_demand, opts.max_demand);
      if (std::all_of(uc.demand.begin(), uc.demand.end(), [](double d) { return d == 0.0; }))
        uc.demand[uniform_index(rng, nr)] = uniform(rng, opts.min_demand, opts.max_demand);
    }
    if (opts.demand_at_least_one) {
      double smallest = std::numeric_limits<double>::infinity();
      for (double d : uc.demand)
        if (d > 0.0) smallest = std::min(smallest, d);
      for (double& d : uc.demand) d /= smallest;
    }
    s.classes.push_back(uc);
  }
  return slicing::Instance::validate(s);
}

slicing::PopulationState random_population(slicing::Rng& rng, const slicing::Instance& inst,
                                           std::int64_t max_n) {
  slicing::PopulationState p;
  for (std::size_t c = 0; c < inst.num_classes(); ++c)
    p.counts.push_back(1 + static_cast<std::int64_t>(uniform_index(rng, static_cast<std::size_t>(max_n))));
  return p;
}

}  // namespace slicesim
