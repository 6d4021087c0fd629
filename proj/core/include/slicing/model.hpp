#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace slicing {

/// Raised when an instance, population or weight vector violates a model invariant.
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class WorkloadDist { exponential, deterministic };

struct ResourceSpec {
  std::string id;
  double capacity = 1.0;
};

struct SliceSpec {
  std::string id;
  double share = 0.0;
};

/// A user class as supplied by the caller. `demand` is indexed like the
/// instance's resource list; entries are fractions of the resource's
/// capacity consumed per unit processing rate.
struct UserClass {
  std::string id;
  std::string slice;
  std::vector<double> demand;
  double arrival_rate = 0.0;   // users per unit time
  double mean_workload = 1.0;  // work units
  WorkloadDist workload = WorkloadDist::exponential;
};

/// Unvalidated problem description.
struct InstanceSpec {
  std::vector<ResourceSpec> resources;
  std::vector<SliceSpec> slices;
  std::vector<UserClass> classes;
};

/// Canonical, validated instance: capacities are 1, demand columns are
/// divided by the original capacity and shares sum to 1. Immutable.
class Instance {
 public:
  /// Validates and canonicalizes. Throws ModelError on empty resource set,
  /// non-positive capacity or share, all-zero or negative demand, negative
  /// arrival rate, non-positive mean workload, dangling slice reference or
  /// duplicate ids.
  static Instance validate(const InstanceSpec& raw);

  /// The canonical description (capacities 1, normalized shares).
  const InstanceSpec& spec() const { return spec_; }

  std::size_t num_resources() const { return spec_.resources.size(); }
  std::size_t num_classes() const { return spec_.classes.size(); }
  std::size_t num_slices() const { return spec_.slices.size(); }

  double demand(std::size_t c, std::size_t r) const { return demand_[c * num_resources() + r]; }
  const std::vector<double>& demand_vector(std::size_t c) const { return spec_.classes[c].demand; }

  std::size_t slice_of(std::size_t c) const { return slice_of_[c]; }
  double share(std::size_t v) const { return spec_.slices[v].share; }
  std::vector<double> shares() const;
  const std::vector<std::size_t>& classes_of(std::size_t v) const { return classes_of_[v]; }
  /// Resources with positive demand for class c, in index order.
  const std::vector<std::size_t>& resources_of(std::size_t c) const { return resources_of_[c]; }
  /// Classes with positive demand on resource r, in index order.
  const std::vector<std::size_t>& users_of(std::size_t r) const { return users_of_[r]; }

  const UserClass& user_class(std::size_t c) const { return spec_.classes[c]; }
  const std::string& resource_id(std::size_t r) const { return spec_.resources[r].id; }
  const std::string& slice_id(std::size_t v) const { return spec_.slices[v].id; }

  std::optional<std::size_t> find_resource(const std::string& id) const;
  std::optional<std::size_t> find_slice(const std::string& id) const;
  std::optional<std::size_t> find_class(const std::string& id) const;

  /// Traffic intensity rho_c = arrival rate times mean workload.
  double load(std::size_t c) const;
  /// Effective load of each resource, sum over classes of rho_c d_c^r.
  std::vector<double> effective_loads() const;

 private:
  Instance() = default;

  InstanceSpec spec_;
  std::vector<double> demand_;  // row-major, classes x resources
  std::vector<std::size_t> slice_of_;
  std::vector<std::vector<std::size_t>> classes_of_;
  std::vector<std::vector<std::size_t>> resources_of_;
  std::vector<std::vector<std::size_t>> users_of_;
};

/// Number of active users per class.
struct PopulationState {
  std::vector<std::int64_t> counts;

  static PopulationState uniform(const Instance& inst, std::int64_t n);
  std::int64_t slice_total(const Instance& inst, std::size_t v) const;
  void check(const Instance& inst) const;
};

enum class WeightPolicy {
  equal_intra_class,  // exogenous class weights, share constrained
  equal_intra_slice,  // q_c = s_v n_c / n^v
  drf,                // q_c = s_v n_c delta_c / n^v
  dps,                // q_c = s_v n_c, not share constrained
  drf_unconstrained,  // q_c = s_v n_c delta_c, not share constrained
};

const char* to_string(WeightPolicy p);

/// Class weights q_c. For the share-constrained policies every slice with
/// active users has weights summing to its share.
struct ClassWeights {
  std::vector<double> q;
  WeightPolicy policy = WeightPolicy::equal_intra_slice;

  bool any_positive() const;
  double total() const;
};

inline constexpr double kWeightTolerance = 1e-12;
inline constexpr double kFeasibilityTolerance = 1e-9;

/// Share-constrained weights for the current population. Only the
/// equal-intra-slice policy is computed here; exogenous weights go through
/// exogenous_weights(), the non-SCWA baselines through the engines module.
ClassWeights scwa_weights(const Instance& inst, const PopulationState& pop,
                          WeightPolicy policy = WeightPolicy::equal_intra_slice);

/// Wraps caller-chosen class weights, checking the share constraint on
/// every slice whose weights are not all zero.
ClassWeights exogenous_weights(const Instance& inst, std::vector<double> q);

/// Per-class aggregate rates with optional certificates.
struct Allocation {
  std::vector<double> rates;
  std::vector<double> prices;                               // empty when not computed
  std::vector<std::optional<std::size_t>> bottleneck;       // empty when not computed
};

struct FeasibilityReport {
  std::vector<double> usage;
  std::vector<std::size_t> violations;
  double max_violation = 0.0;

  bool feasible() const { return violations.empty(); }
};

/// usage_r = sum_c d_c^r phi_c against unit capacities.
FeasibilityReport feasibility_report(const Instance& inst, const std::vector<double>& rates,
                                     double tol = kFeasibilityTolerance);

/// Same, against an explicit capacity vector.
FeasibilityReport feasibility_report(const Instance& inst, const std::vector<double>& rates,
                                     const std::vector<double>& capacities, double tol);

}  // namespace slicing
