#include <algorithm>
#include <cmath>
#include <limits>

#include "slicing/engines.hpp"

namespace slicing {

SolveResult maxmin_waterfill(const Instance& inst, const ClassWeights& q,
                             const std::vector<double>& capacities) {
  const std::size_t nc = inst.num_classes();
  const std::size_t nr = inst.num_resources();
  if (q.q.size() != nc) throw SolverError("weight vector size does not match class count");
  if (capacities.size() != nr) throw SolverError("capacity vector size does not match resource count");
  for (double x : q.q)
    if (!(x >= 0.0)) throw SolverError("negative class weight");

  SolveResult out;
  out.converged = true;
  out.allocation.rates.assign(nc, 0.0);
  out.allocation.bottleneck.assign(nc, std::nullopt);

  std::vector<bool> active(nc);
  for (std::size_t c = 0; c < nc; ++c) active[c] = q.q[c] > 0.0;
  std::vector<double> frozen_use(nr, 0.0);

  // Each round raises the common level until the next resource saturates.
  for (;;) {
    double level = std::numeric_limits<double>::infinity();
    std::vector<double> slope(nr, 0.0);
    for (std::size_t r = 0; r < nr; ++r) {
      for (std::size_t c : inst.users_of(r))
        if (active[c]) slope[r] += inst.demand(c, r) * q.q[c];
      if (slope[r] > 0.0)
        level = std::min(level, std::max(0.0, capacities[r] - frozen_use[r]) / slope[r]);
    }
    if (!std::isfinite(level)) break;  // no active class left
    ++out.iterations;

    std::vector<bool> saturated(nr, false);
    for (std::size_t r = 0; r < nr; ++r) {
      if (slope[r] <= 0.0) continue;
      const double t = std::max(0.0, capacities[r] - frozen_use[r]) / slope[r];
      saturated[r] = t <= level * (1.0 + 1e-12);
    }
    for (std::size_t c = 0; c < nc; ++c) {
      if (!active[c]) continue;
      for (std::size_t r : inst.resources_of(c)) {
        if (!saturated[r]) continue;
        out.allocation.bottleneck[c] = r;
        break;
      }
      if (!out.allocation.bottleneck[c]) continue;
      active[c] = false;
      out.allocation.rates[c] = q.q[c] * level;
      for (std::size_t r : inst.resources_of(c)) frozen_use[r] += inst.demand(c, r) * out.allocation.rates[c];
    }
  }
  return out;
}

SolveResult maxmin_waterfill(const Instance& inst, const ClassWeights& q) {
  return maxmin_waterfill(inst, q, std::vector<double>(inst.num_resources(), 1.0));
}

namespace {

double dominant_share_inverse(const Instance& inst, std::size_t c) {
  double worst = 0.0;
  for (std::size_t r : inst.resources_of(c)) worst = std::max(worst, inst.demand(c, r));
  return 1.0 / worst;
}

}  // namespace

ClassWeights drf_weights(const Instance& inst, const PopulationState& pop) {
  ClassWeights w = scwa_weights(inst, pop);
  w.policy = WeightPolicy::drf;
  for (std::size_t c = 0; c < inst.num_classes(); ++c) w.q[c] *= dominant_share_inverse(inst, c);
  return w;
}

ClassWeights dps_weights(const Instance& inst, const PopulationState& pop) {
  pop.check(inst);
  ClassWeights w{std::vector<double>(inst.num_classes(), 0.0), WeightPolicy::dps};
  for (std::size_t c = 0; c < inst.num_classes(); ++c)
    w.q[c] = static_cast<double>(pop.counts[c]) * inst.share(inst.slice_of(c));
  return w;
}

ClassWeights drf_unconstrained_weights(const Instance& inst, const PopulationState& pop) {
  ClassWeights w = dps_weights(inst, pop);
  w.policy = WeightPolicy::drf_unconstrained;
  for (std::size_t c = 0; c < inst.num_classes(); ++c) w.q[c] *= dominant_share_inverse(inst, c);
  return w;
}

ClassWeights policy_weights(const Instance& inst, const PopulationState& pop, WeightPolicy policy) {
  switch (policy) {
    case WeightPolicy::equal_intra_slice: return scwa_weights(inst, pop);
    case WeightPolicy::drf: return drf_weights(inst, pop);
    case WeightPolicy::dps: return dps_weights(inst, pop);
    case WeightPolicy::drf_unconstrained: return drf_unconstrained_weights(inst, pop);
    case WeightPolicy::equal_intra_class: break;
  }
  throw ModelError("equal-intra-class weights are exogenous and cannot be derived from a population");
}

}  // namespace slicing
