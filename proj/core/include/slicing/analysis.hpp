#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "slicing/engines.hpp"
#include "slicing/model.hpp"

namespace slicing {

/// Closeness of a normalized vector x to a normalized reference y:
/// exp(-KL(x||y)) at alpha = 1, (sum_i x_i (y_i/x_i)^(1-alpha))^(1/alpha) otherwise.
/// Both inputs must be strictly positive and sum to 1 within 1e-9.
double f_alpha(std::span<const double> x, std::span<const double> y, double alpha);

struct UtilityReport {
  std::vector<double> per_slice;  // U_alpha^v; may be -inf when a weighted class has phi = 0
  double sum = 0.0;               // sum over slices (the log form at alpha = 1)
  double combined = 0.0;          // exp(sum) at alpha = 1, sum otherwise
};

/// Slice utilities sum_c q_c (phi_c/q_c)^(1-alpha)/(1-alpha), or
/// sum_c q_c log(phi_c/q_c) at alpha = 1. Zero-weight classes contribute 0.
UtilityReport utility(const Instance& inst, const std::vector<double>& phi,
                      const std::vector<double>& q, double alpha);

/// Utility of one slice only.
double slice_utility(const Instance& inst, std::size_t slice, const std::vector<double>& phi,
                     const std::vector<double>& q, double alpha);

struct FactorizationReport {
  double total_rate = 0.0;          // lambda
  double efficiency = 0.0;          // E_alpha(lambda)
  double inter_fairness = 0.0;      // F_inter
  double intra_fairness = 0.0;      // F_intra
  std::vector<double> slice_weights;  // t^v
  double utility = 0.0;             // U_alpha evaluated directly
  double reconstructed = 0.0;       // E (F_inter F_intra)^alpha
  double relative_error = 0.0;
};

/// Efficiency/fairness decomposition of U_alpha(phi; q). Requires
/// share-constrained weights (per-slice weight sums equal the shares, which
/// sum to 1) and positive rates on weighted classes.
FactorizationReport factorize(std::span<const double> phi, std::span<const double> q,
                              std::span<const double> shares,
                              std::span<const std::size_t> slice_of, double alpha);

FactorizationReport factorize(const Instance& inst, const std::vector<double>& phi,
                              const std::vector<double>& q, double alpha);

struct BoundReport {
  double gap = 0.0;    // measured utility difference
  double bound = 0.0;  // closed-form bound in terms of charged usage
  double slack = 0.0;  // bound - gap
  // sum_r nu_r (b'_r - b_r) for the capacity change b -> b' that turns the
  // shared allocation into the compared one; an upper bound on gap by
  // concavity of the optimal value in the capacities.
  double sensitivity = 0.0;
  double sensitivity_slack = 0.0;
  double alpha = 1.0;
  std::size_t slice = 0;
  std::optional<std::size_t> other_slice;
};

/// p_c = (sum_r d_c^r nu_r)^((alpha-1)/alpha), evaluated in log space.
std::vector<double> charged_usage(const Instance& inst, const std::vector<double>& prices,
                                  double alpha);

/// Protection: gap = U^v(static partition) - U^v(SCS) against
/// s_v (sum_{c in v} q~_c p_c - sum_c q_c p_c), one report per slice.
/// `sensitivity` is sum_r nu_r (s_v - usage^v_r), which equals minus that
/// closed form; away from alpha = 1 only the sensitivity side is a valid
/// upper bound. Shadow prices come from the full SCS solve. Throws
/// SolverError when a solve does not converge.
std::vector<BoundReport> protection_report(const Instance& inst, const ClassWeights& q, double alpha,
                                           const SolverOptions& opts = {});

/// Envy of slice v towards slice w: slice v re-optimized inside slice w's
/// per-resource SCS usage, against sum_{c in w} q_c p_c - sum_{c in v} q_c p_c
/// (`sensitivity` evaluates the same quantity as sum_r nu_r (usage^w_r - usage^v_r)).
BoundReport envy_report(const Instance& inst, const ClassWeights& q, double alpha, std::size_t v,
                        std::size_t w, const SolverOptions& opts = {});

/// Solves inside the reports run at least this tight.
inline constexpr double kAnalysisTolerance = 1e-12;

struct SurrogateReport {
  BoundReport bound;           // gap = Psi(1-SCS) - Psi(water-fill)
  double psi_log = 0.0;
  double psi_maxmin = 0.0;
  double cap = 0.0;            // max_c D_c - 1
};

/// Surrogate gap of weighted max-min against 1-SCS in Psi = sum q_c log phi_c.
/// The bound is sum_c q_c (D_c - 1), which is sum_c q_c D_c - 1 under
/// share-constrained weights. Throws ModelError when a weighted class has a
/// used resource with d_c^r < 1.
SurrogateReport surrogate_report(const Instance& inst, const ClassWeights& q,
                                 const SolverOptions& opts = {});

struct ElasticityReport {
  std::vector<double> rates;          // phi_c for n_c = 1..n_max
  bool monotone = true;
  double proportionality_error = 0.0;  // worst deviation of resource shares from q-proportional split
};

/// Sweeps n_c = 1..n_max for one class with other counts fixed, under equal
/// intra-slice weights. The proportionality check is meaningful at alpha = 1
/// (or with equal demands on each resource), where every resource divides
/// itself in proportion to s_v n_c / n^v.
ElasticityReport elasticity_sweep(const Instance& inst, PopulationState base, std::size_t cls,
                                  std::int64_t n_max, double alpha, const SolverOptions& opts = {});

}  // namespace slicing
