#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "slicing/model.hpp"

namespace slicing::oracle {

// Slow reference computations. They share no code with the engines and are
// meant for tests and the verify command, never for the simulator.

struct ConcaveOptions {
  double barrier_growth = 10.0;     // factor applied to the barrier weight per outer round
  double final_gap = 1e-10;         // stop once (#constraints / weight) falls below this
  std::size_t max_newton = 10000;   // total inner iterations
};

struct OracleResult {
  std::vector<double> rates;
  bool certified = false;  // false when the iteration cap was hit first
  std::size_t iterations = 0;
};

/// Maximizes sum_c q_c (phi_c/q_c)^(1-alpha)/(1-alpha) (log form at
/// alpha = 1) subject to unit capacities, directly in rate space with a
/// logarithmic barrier on every capacity and positivity constraint.
/// Zero-weight classes get rate 0.
OracleResult concave_opt(const Instance& inst, const std::vector<double>& q, double alpha,
                         const ConcaveOptions& opts = {});

/// Progressive filling in explicit micro-steps of the common level.
/// `microstep` is relative to the level at which the most loaded resource
/// would fill if every weighted class were active.
OracleResult maxmin(const Instance& inst, const std::vector<double>& q, double microstep = 1e-5);

struct VariationalResult {
  bool pass = true;
  double worst = 0.0;  // largest sum_c (phi_c/q_c)^(-alpha) (phi'_c - phi_c) seen
  std::size_t samples = 0;
};

/// First-order optimality test: samples feasible phi' (coordinate pushes,
/// transfers along saturated resources, random directions) and checks
/// sum_c (phi_c/q_c)^(-alpha) (phi'_c - phi_c) <= threshold for all of them.
VariationalResult variational_check(const Instance& inst, const std::vector<double>& phi,
                                    const std::vector<double>& q, double alpha,
                                    std::size_t samples, std::uint64_t seed = 1,
                                    double threshold = 1e-6);

}  // namespace slicing::oracle
