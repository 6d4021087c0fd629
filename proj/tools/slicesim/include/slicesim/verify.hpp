#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace slicesim {

/// One property measured over many cases. `worst` is the least favourable
/// value seen; it must stay <= limit (upper) or >= limit (lower).
struct Check {
  std::string label;
  double worst = 0.0;
  double limit = 0.0;
  bool upper = true;
  std::size_t count = 0;
  bool pass = true;

  void observe(double x);
};

struct SuiteReport {
  std::string suite;
  std::vector<Check> checks;

  bool pass() const;
  const Check& check(const std::string& label) const;  // throws std::out_of_range
};

struct VerifyOptions {
  std::optional<std::size_t> instances;  // suite default when empty
  std::uint64_t meta_seed = 2024;
  std::vector<double> alphas;            // suite default when empty
};

/// protection, envy, surrogate, factorization, elasticity, variational, oracle.
const std::vector<std::string>& suite_names();

/// Runs a suite on generated instances drawn from derive_seed(meta_seed,
/// suite, 0). Throws std::invalid_argument for an unknown suite and
/// slicing::SolverError when an engine does not converge.
SuiteReport run_suite(const std::string& suite, const VerifyOptions& opts = {});

/// One line per check.
void print_report(std::ostream& os, const SuiteReport& report);

}  // namespace slicesim
