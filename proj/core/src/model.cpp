#include "slicing/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace slicing {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ModelError(what);
}

template <typename T>
void require_unique_ids(const std::vector<T>& items, const char* kind) {
  std::set<std::string> seen;
  for (const auto& it : items) {
    require(!it.id.empty(), std::string("empty ") + kind + " id");
    require(seen.insert(it.id).second, std::string("duplicate ") + kind + " id '" + it.id + "'");
  }
}

}  // namespace

Instance Instance::validate(const InstanceSpec& raw) {
  require(!raw.resources.empty(), "empty resource set");
  require(!raw.slices.empty(), "empty slice set");
  require_unique_ids(raw.resources, "resource");
  require_unique_ids(raw.slices, "slice");
  require_unique_ids(raw.classes, "class");

  Instance inst;
  InstanceSpec& out = inst.spec_;
  out = raw;

  for (const auto& r : raw.resources) {
    require(std::isfinite(r.capacity) && r.capacity > 0.0,
            "non-positive capacity on resource '" + r.id + "'");
  }
  double share_sum = 0.0;
  for (const auto& s : raw.slices) {
    require(std::isfinite(s.share) && s.share > 0.0, "non-positive share on slice '" + s.id + "'");
    share_sum += s.share;
  }
  // Already-normalized shares are kept bit-for-bit so validation is idempotent.
  if (std::abs(share_sum - 1.0) > 1e-12)
    for (auto& s : out.slices) s.share /= share_sum;
  for (auto& r : out.resources) r.capacity = 1.0;

  const std::size_t nr = raw.resources.size();
  const std::size_t nv = raw.slices.size();
  inst.slice_of_.resize(raw.classes.size());
  inst.classes_of_.assign(nv, {});
  inst.resources_of_.assign(raw.classes.size(), {});
  inst.users_of_.assign(nr, {});
  inst.demand_.assign(raw.classes.size() * nr, 0.0);

  for (std::size_t c = 0; c < raw.classes.size(); ++c) {
    const UserClass& uc = raw.classes[c];
    require(uc.demand.size() == nr, "class '" + uc.id + "' demand vector has " +
                                        std::to_string(uc.demand.size()) + " entries, expected " +
                                        std::to_string(nr));
    auto v = std::find_if(raw.slices.begin(), raw.slices.end(),
                          [&](const SliceSpec& s) { return s.id == uc.slice; });
    require(v != raw.slices.end(),
            "class '" + uc.id + "' references unknown slice '" + uc.slice + "'");
    require(std::isfinite(uc.arrival_rate) && uc.arrival_rate >= 0.0,
            "negative arrival rate on class '" + uc.id + "'");
    require(std::isfinite(uc.mean_workload) && uc.mean_workload > 0.0,
            "non-positive mean workload on class '" + uc.id + "'");

    bool positive = false;
    for (std::size_t r = 0; r < nr; ++r) {
      const double d = uc.demand[r];
      require(std::isfinite(d) && d >= 0.0, "negative demand on class '" + uc.id + "'");
      const double scaled = d / raw.resources[r].capacity;
      out.classes[c].demand[r] = scaled;
      inst.demand_[c * nr + r] = scaled;
      if (scaled > 0.0) {
        positive = true;
        inst.resources_of_[c].push_back(r);
        inst.users_of_[r].push_back(c);
      }
    }
    require(positive, "zero demand on class '" + uc.id + "'");

    const auto vi = static_cast<std::size_t>(v - raw.slices.begin());
    inst.slice_of_[c] = vi;
    inst.classes_of_[vi].push_back(c);
  }
  return inst;
}

std::vector<double> Instance::shares() const {
  std::vector<double> s(num_slices());
  for (std::size_t v = 0; v < s.size(); ++v) s[v] = share(v);
  return s;
}

std::optional<std::size_t> Instance::find_resource(const std::string& id) const {
  for (std::size_t r = 0; r < num_resources(); ++r)
    if (spec_.resources[r].id == id) return r;
  return std::nullopt;
}

std::optional<std::size_t> Instance::find_slice(const std::string& id) const {
  for (std::size_t v = 0; v < num_slices(); ++v)
    if (spec_.slices[v].id == id) return v;
  return std::nullopt;
}

std::optional<std::size_t> Instance::find_class(const std::string& id) const {
  for (std::size_t c = 0; c < num_classes(); ++c)
    if (spec_.classes[c].id == id) return c;
  return std::nullopt;
}

double Instance::load(std::size_t c) const {
  return spec_.classes[c].arrival_rate * spec_.classes[c].mean_workload;
}

std::vector<double> Instance::effective_loads() const {
  std::vector<double> loads(num_resources(), 0.0);
  for (std::size_t c = 0; c < num_classes(); ++c)
    for (std::size_t r : resources_of(c)) loads[r] += load(c) * demand(c, r);
  return loads;
}

PopulationState PopulationState::uniform(const Instance& inst, std::int64_t n) {
  return PopulationState{std::vector<std::int64_t>(inst.num_classes(), n)};
}

std::int64_t PopulationState::slice_total(const Instance& inst, std::size_t v) const {
  std::int64_t total = 0;
  for (std::size_t c : inst.classes_of(v)) total += counts[c];
  return total;
}

void PopulationState::check(const Instance& inst) const {
  require(counts.size() == inst.num_classes(), "population size does not match class count");
  for (auto n : counts) require(n >= 0, "negative population count");
}

const char* to_string(WeightPolicy p) {
  switch (p) {
    case WeightPolicy::equal_intra_class: return "equal-intra-class";
    case WeightPolicy::equal_intra_slice: return "equal-intra-slice";
    case WeightPolicy::drf: return "drf";
    case WeightPolicy::dps: return "dps";
    case WeightPolicy::drf_unconstrained: return "drf-unconstrained";
  }
  return "?";
}

bool ClassWeights::any_positive() const {
  return std::any_of(q.begin(), q.end(), [](double x) { return x > 0.0; });
}

double ClassWeights::total() const { return std::accumulate(q.begin(), q.end(), 0.0); }

ClassWeights scwa_weights(const Instance& inst, const PopulationState& pop, WeightPolicy policy) {
  pop.check(inst);
  require(policy == WeightPolicy::equal_intra_slice,
          std::string("scwa_weights cannot derive weights for policy ") + to_string(policy));
  ClassWeights w{std::vector<double>(inst.num_classes(), 0.0), policy};
  for (std::size_t v = 0; v < inst.num_slices(); ++v) {
    const std::int64_t nv = pop.slice_total(inst, v);
    if (nv == 0) continue;  // idle share is not redistributed
    for (std::size_t c : inst.classes_of(v))
      w.q[c] = inst.share(v) * static_cast<double>(pop.counts[c]) / static_cast<double>(nv);
  }
  return w;
}

ClassWeights exogenous_weights(const Instance& inst, std::vector<double> q) {
  require(q.size() == inst.num_classes(), "weight vector size does not match class count");
  for (double x : q) require(std::isfinite(x) && x >= 0.0, "negative class weight");
  for (std::size_t v = 0; v < inst.num_slices(); ++v) {
    double sum = 0.0;
    for (std::size_t c : inst.classes_of(v)) sum += q[c];
    if (sum == 0.0) continue;
    require(std::abs(sum - inst.share(v)) <= kWeightTolerance,
            "weights of slice '" + inst.slice_id(v) + "' sum to " + std::to_string(sum) +
                ", not its share " + std::to_string(inst.share(v)));
  }
  return ClassWeights{std::move(q), WeightPolicy::equal_intra_class};
}

FeasibilityReport feasibility_report(const Instance& inst, const std::vector<double>& rates,
                                     const std::vector<double>& capacities, double tol) {
  require(rates.size() == inst.num_classes(), "rate vector size does not match class count");
  require(capacities.size() == inst.num_resources(),
          "capacity vector size does not match resource count");
  FeasibilityReport rep;
  rep.usage.assign(inst.num_resources(), 0.0);
  for (std::size_t r = 0; r < inst.num_resources(); ++r) {
    for (std::size_t c : inst.users_of(r)) rep.usage[r] += inst.demand(c, r) * rates[c];
    const double excess = rep.usage[r] - capacities[r];
    rep.max_violation = std::max(rep.max_violation, excess);
    if (excess > tol) rep.violations.push_back(r);
  }
  return rep;
}

FeasibilityReport feasibility_report(const Instance& inst, const std::vector<double>& rates,
                                     double tol) {
  return feasibility_report(inst, rates, std::vector<double>(inst.num_resources(), 1.0), tol);
}

}  // namespace slicing
