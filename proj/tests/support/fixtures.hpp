#pragma once

#include <string>
#include <vector>

#include "slicing/model.hpp"

namespace fixtures {

using slicing::Instance;
using slicing::InstanceSpec;

// Builds an instance from demand rows; slice_of[c] indexes `shares`.
inline Instance make(const std::vector<std::vector<double>>& demand, const std::vector<std::size_t>& slice_of,
                     const std::vector<double>& shares, const std::vector<double>& capacity = {}) {
  InstanceSpec s;
  const std::size_t nr = demand.empty() ? 0 : demand.front().size();
  for (std::size_t r = 0; r < nr; ++r)
    s.resources.push_back({"r" + std::to_string(r + 1), capacity.empty() ? 1.0 : capacity[r]});
  for (std::size_t v = 0; v < shares.size(); ++v) s.slices.push_back({"s" + std::to_string(v + 1), shares[v]});
  for (std::size_t c = 0; c < demand.size(); ++c) {
    slicing::UserClass uc;
    uc.id = "c" + std::to_string(c + 1);
    uc.slice = "s" + std::to_string(slice_of[c] + 1);
    uc.demand = demand[c];
    s.classes.push_back(uc);
  }
  return Instance::validate(s);
}

// Five resources; classes 1 and 2 in slice 1, class 3 in slice 2.
inline Instance table1() {
  return make({{1, 1, 0, 0, 0}, {0.6, 0, 0, 1, 1}, {0.6, 0, 0, 1, 1}}, {0, 0, 1}, {0.5, 0.5});
}

inline slicing::PopulationState pop(std::vector<std::int64_t> n) { return {std::move(n)}; }

}  // namespace fixtures
