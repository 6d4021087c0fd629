#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "slicing/model.hpp"

namespace slicing {

enum class DualMethod {
  /// Log-price Newton iteration: the multiplicative update
  /// nu <- nu * exp(step) with the step preconditioned by the dual Hessian.
  newton,
  /// Plain multiplicative update nu <- nu * (usage / capacity)^kappa with a
  /// scalar, backtracked kappa. Slow on ill-conditioned instances.
  multiplicative,
};

struct SolverOptions {
  double tolerance = 1e-8;         // on max(feasibility violation, relative slackness)
  std::size_t max_iterations = 100000;
  double log_form_threshold = 1e-6;  // |alpha - 1| below this uses the log utility
  DualMethod method = DualMethod::newton;
};

struct Residuals {
  double feasibility = 0.0;            // max_r (usage_r - cap_r)^+
  // max_r |cap_r - usage_r| / cap_r, weighted by max_c nu_r d_c^r / sum_s d_c^s nu_s
  double complementary_slackness = 0.0;
  double stationarity = 0.0;           // max_c |phi_c - q_c P_c^(-1/alpha)| / phi_c
};

struct SolveResult {
  Allocation allocation;
  std::size_t iterations = 0;
  Residuals residuals;
  bool converged = false;

  const std::vector<double>& rates() const { return allocation.rates; }
  const std::vector<double>& prices() const { return allocation.prices; }
};

/// Raised by engines whose preconditions fail (bad alpha, all-zero weights,
/// size mismatches). Non-convergence is reported through SolveResult.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// alpha-SCS: maximizes sum_c q_c (phi_c/q_c)^(1-alpha)/(1-alpha) (the log
/// form q_c log(phi_c/q_c) near alpha = 1) under unit capacities.
/// On return phi_c = q_c (sum_r d_c^r nu_r)^(-1/alpha) exactly for every
/// weighted class; zero-weight classes get phi_c = 0.
SolveResult solve_alpha_scs(const Instance& inst, const ClassWeights& q, double alpha,
                            const SolverOptions& opts = {},
                            const std::vector<double>* warm_prices = nullptr);

/// Same problem against an arbitrary non-negative capacity vector. Classes
/// that need a zero-capacity resource are assigned phi_c = 0.
SolveResult solve_alpha_scs(const Instance& inst, const ClassWeights& q, double alpha,
                            const std::vector<double>& capacities, const SolverOptions& opts,
                            const std::vector<double>* warm_prices = nullptr);

/// Weighted max-min by progressive filling. Records each class's bottleneck
/// (lowest-index saturated resource among those it uses when it froze).
SolveResult maxmin_waterfill(const Instance& inst, const ClassWeights& q);
SolveResult maxmin_waterfill(const Instance& inst, const ClassWeights& q,
                             const std::vector<double>& capacities);

/// Class-level weighted alpha-fairness, utility sum_c q_c phi_c^(1-alpha)/(1-alpha).
/// Solved as alpha-SCS with weights q_c^(1/alpha).
SolveResult class_alpha_fair(const Instance& inst, const ClassWeights& q, double alpha,
                             const SolverOptions& opts = {});

/// DRF weighting with equal intra-slice split: q_c = s_v n_c delta_c / n^v,
/// delta_c = 1 / max_r d_c^r.
ClassWeights drf_weights(const Instance& inst, const PopulationState& pop);

/// DPS weighting: every user weighs its slice's share, q_c = n_c s_v.
ClassWeights dps_weights(const Instance& inst, const PopulationState& pop);

/// DRF-weighted DPS: q_c = n_c s_v delta_c (share constraint voided).
ClassWeights drf_unconstrained_weights(const Instance& inst, const PopulationState& pop);

/// Weights for any policy derived from the population (everything except
/// exogenous equal-intra-class weights).
ClassWeights policy_weights(const Instance& inst, const PopulationState& pop, WeightPolicy policy);

struct PartitionResult {
  std::vector<SolveResult> per_slice;  // indexed by slice; rates cover all classes
  Allocation combined;
  bool converged = true;
};

/// Static partitioning: slice v solves alpha-SCS alone against capacity s_v
/// on every resource.
PartitionResult static_partition(const Instance& inst, const ClassWeights& q, double alpha,
                                 const SolverOptions& opts = {});

/// Weights restricted to the classes of one slice (others zeroed).
ClassWeights restrict_to_slice(const Instance& inst, const ClassWeights& q, std::size_t slice);

}  // namespace slicing
