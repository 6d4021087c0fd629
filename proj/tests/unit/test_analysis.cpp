#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "slicesim/generate.hpp"
#include "slicing/analysis.hpp"
#include "slicing/engines.hpp"
#include "slicing/oracle.hpp"

using namespace slicing;
using fixtures::make;
using fixtures::pop;

namespace {

ClassWeights raw(std::vector<double> q) { return ClassWeights{std::move(q), WeightPolicy::equal_intra_class}; }

std::vector<double> normalized(std::vector<double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  for (double& v : x) v /= s;
  return x;
}

std::vector<double> random_simplex(Rng& rng, std::size_t n) {
  std::vector<double> x(n);
  for (double& v : x) v = slicesim::uniform(rng, 0.05, 1.0);
  return normalized(std::move(x));
}

}  // namespace

TEST_CASE("f_alpha examples") {
  const std::vector<double> x{0.5, 0.5}, y{0.25, 0.75};
  CHECK(f_alpha(x, y, 2.0) == doctest::Approx(std::sqrt(4.0 / 3.0)).epsilon(1e-12));
  CHECK(f_alpha(x, y, 2.0) == doctest::Approx(1.154700).epsilon(1e-6));
  CHECK(f_alpha(x, y, 1.0) == doctest::Approx(1.0 / std::sqrt(4.0 / 3.0)).epsilon(1e-12));
  CHECK(f_alpha(x, y, 1.0) == doctest::Approx(0.866025).epsilon(1e-6));
  for (double a : {0.3, 1.0, 2.0, 7.0}) CHECK(f_alpha(y, y, a) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("f_alpha rejects bad input") {
  const std::vector<double> x{0.5, 0.5}, y{0.25, 0.75}, z{0.2, 0.3, 0.5}, off{0.5, 0.6};
  CHECK_THROWS(f_alpha(x, z, 1.0));
  CHECK_THROWS(f_alpha(off, y, 1.0));
}

TEST_CASE("f_alpha sits on the correct side of 1") {
  Rng rng(3);
  for (int t = 0; t < 300; ++t) {
    const auto x = random_simplex(rng, 4), y = random_simplex(rng, 4);
    for (double a : {0.2, 0.5, 1.0}) CHECK(f_alpha(x, y, a) <= 1.0 + 1e-12);
    for (double a : {1.5, 2.0, 5.0}) CHECK(f_alpha(x, y, a) >= 1.0 - 1e-12);
  }
}

TEST_CASE("utility examples") {
  const Instance inst = make({{1}, {1}, {1}}, {0, 0, 1}, {0.5, 0.5});
  const std::vector<double> q{0.25, 0.25, 0.5};
  SUBCASE("phi = q") {
    for (double a : {0.5, 2.0, 3.0}) {
      const auto u = utility(inst, q, q, a);
      CHECK(u.per_slice[0] == doctest::Approx(0.5 / (1.0 - a)));
      CHECK(u.per_slice[1] == doctest::Approx(0.5 / (1.0 - a)));
    }
    const auto u1 = utility(inst, q, q, 1.0);
    CHECK(u1.per_slice[0] == 0.0);
    CHECK(u1.sum == 0.0);
    CHECK(u1.combined == 1.0);
    const auto u2 = utility(inst, q, q, 2.0);
    CHECK(u2.per_slice[0] == doctest::Approx(-0.5));
  }
  SUBCASE("table1 fixture solution") {
    const Instance t1 = fixtures::table1();
    const auto u = utility(t1, {0.4, 1.0 / 3, 2.0 / 3}, q, 1.0);
    CHECK(u.per_slice[0] == doctest::Approx(0.25 * std::log(1.6) + 0.25 * std::log(4.0 / 3)).epsilon(1e-12));
    CHECK(u.per_slice[1] == doctest::Approx(0.5 * std::log(4.0 / 3)).epsilon(1e-12));
    CHECK(u.combined == doctest::Approx(std::exp(u.sum)));
    CHECK(slice_utility(t1, 1, {0.4, 1.0 / 3, 2.0 / 3}, q, 1.0) == doctest::Approx(u.per_slice[1]));
  }
  SUBCASE("zero rate on a weighted class is -inf, not a crash") {
    const auto u = utility(inst, {0.0, 0.25, 0.5}, q, 1.0);
    CHECK(u.per_slice[0] == -std::numeric_limits<double>::infinity());
    const auto u2 = utility(inst, {0.0, 0.25, 0.5}, q, 2.0);
    CHECK(u2.per_slice[0] == -std::numeric_limits<double>::infinity());
  }
  SUBCASE("zero-weight classes contribute nothing") {
    const auto u = utility(inst, {0.3, 0.0, 0.5}, {0.5, 0.0, 0.5}, 1.0);
    CHECK(u.per_slice[0] == doctest::Approx(0.5 * std::log(0.6)));
  }
}

TEST_CASE("factorization: aligned rates") {
  const std::vector<double> q{0.2, 0.3, 0.5}, s{0.5, 0.5};
  const std::vector<std::size_t> slice_of{0, 0, 1};
  for (double a : {0.5, 1.0, 2.0}) {
    std::vector<double> phi;
    for (double x : q) phi.push_back(1.7 * x);
    const auto rep = factorize(phi, q, s, slice_of, a);
    CHECK(rep.inter_fairness == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.intra_fairness == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.total_rate == doctest::Approx(1.7));
    CHECK(rep.utility == doctest::Approx(rep.efficiency).epsilon(1e-12));
  }
}

TEST_CASE("factorization identity on random inputs") {
  Rng rng(17);
  for (int t = 0; t < 200; ++t) {
    const std::size_t nv = 2 + slicesim::uniform_index(rng, 2);
    const auto s = random_simplex(rng, nv);
    std::vector<std::size_t> slice_of;
    std::vector<double> q, phi;
    for (std::size_t v = 0; v < nv; ++v) {
      const std::size_t k = 1 + slicesim::uniform_index(rng, 3);
      const auto w = random_simplex(rng, k);
      for (double x : w) {
        slice_of.push_back(v);
        q.push_back(s[v] * x);
        phi.push_back(slicesim::uniform(rng, 0.01, 2.0));
      }
    }
    for (double a : {0.5, 1.0, 2.0}) {
      CAPTURE(t);
      CAPTURE(a);
      const auto rep = factorize(phi, q, s, slice_of, a);
      CHECK(rep.relative_error <= 1e-8);
      double ts = 0.0;
      for (double x : rep.slice_weights) {
        CHECK(x >= 0.0);
        ts += x;
      }
      CHECK(std::abs(ts - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("factorization rejects an empty slice aggregate") {
  const std::vector<double> q{0.5, 0.5}, s{0.5, 0.5}, phi{1.0, 0.0};
  const std::vector<std::size_t> slice_of{0, 1};
  CHECK_THROWS(factorize(phi, q, s, slice_of, 2.0));
}

TEST_CASE("charged usage") {
  const Instance inst = fixtures::table1();
  const std::vector<double> nu{0.625, 0, 0, 0.2, 0.175};
  const auto p1 = charged_usage(inst, nu, 1.0);
  for (double x : p1) CHECK(x == doctest::Approx(1.0));
  const auto p2 = charged_usage(inst, nu, 2.0);
  CHECK(p2[0] == doctest::Approx(std::sqrt(0.625)));
  CHECK(p2[1] == doctest::Approx(std::sqrt(0.6 * 0.625 + 0.375)));
}

TEST_CASE("protection at alpha = 1 on table1 fixture") {
  const Instance inst = fixtures::table1();
  const auto q = scwa_weights(inst, pop({1, 1, 1}));
  const auto reps = protection_report(inst, q, 1.0);
  REQUIRE(reps.size() == 2);
  for (const auto& r : reps) {
    CHECK(r.bound == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(r.gap <= 1e-9);
  }
  const auto part = static_partition(inst, q, 1.0);
  const auto scs = solve_alpha_scs(inst, q, 1.0);
  for (std::size_t v = 0; v < 2; ++v)
    CHECK(slice_utility(inst, v, scs.rates(), q.q, 1.0) >= slice_utility(inst, v, part.combined.rates, q.q, 1.0) - 1e-9);
}

TEST_CASE("protection on a symmetric instance") {
  const Instance inst = make({{1, 0.5}, {1, 0.5}}, {0, 1}, {0.5, 0.5});
  const auto q = scwa_weights(inst, pop({1, 1}));
  for (double a : {0.5, 1.0, 2.0}) {
    const auto reps = protection_report(inst, q, a);
    CHECK(reps[0].gap <= 1e-9);
    CHECK(reps[0].gap == doctest::Approx(reps[1].gap).epsilon(1e-9));
  }
}

TEST_CASE("protection and envy bounds on random instances") {
  Rng rng(101);
  for (int t = 0; t < 60; ++t) {
    const Instance inst = slicesim::random_instance(rng);
    const auto q = scwa_weights(inst, slicesim::random_population(rng, inst));
    CAPTURE(t);
    for (double a : {0.5, 1.0, 2.0}) {
      CAPTURE(a);
      for (const auto& r : protection_report(inst, q, a)) {
        CHECK(r.sensitivity_slack >= -1e-6);
        CHECK(r.sensitivity == doctest::Approx(-r.bound).epsilon(1e-9).scale(1.0));
        if (a == 1.0) {
          CHECK(std::abs(r.bound) <= 1e-9);
          CHECK(r.gap <= 1e-9);
        }
      }
      const auto e = envy_report(inst, q, a, 0, 1);
      CHECK(e.slack >= -1e-6);
      CHECK(e.sensitivity == doctest::Approx(e.bound).epsilon(1e-9).scale(1.0));
      if (a == 1.0) CHECK(e.bound == doctest::Approx(inst.share(1) - inst.share(0)).epsilon(1e-9));
    }
  }
}

TEST_CASE("envy: a larger slice does not envy a smaller one at alpha = 1") {
  const Instance inst = make({{1, 0.3}, {0.4, 1}}, {0, 1}, {0.7, 0.3});
  const auto q = scwa_weights(inst, pop({1, 1}));
  const auto e = envy_report(inst, q, 1.0, 0, 1);
  CHECK(e.bound == doctest::Approx(-0.4).epsilon(1e-9));
  CHECK(e.gap <= e.bound + 1e-9);
}

TEST_CASE("envy between identical slices") {
  const Instance inst = make({{1, 0.5}, {1, 0.5}}, {0, 1}, {0.5, 0.5});
  const auto q = scwa_weights(inst, pop({2, 2}));
  const auto e = envy_report(inst, q, 1.0, 0, 1);
  CHECK(std::abs(e.bound) <= 1e-9);
  CHECK(e.gap <= 1e-9);
}

TEST_CASE("surrogate bound") {
  SUBCASE("single resource, unit demand") {
    const Instance inst = make({{1}, {1}, {1}}, {0, 0, 1}, {0.5, 0.5});
    const auto rep = surrogate_report(inst, scwa_weights(inst, pop({1, 3, 2})));
    CHECK(std::abs(rep.bound.gap) <= 1e-9);
    CHECK(std::abs(rep.bound.bound) <= 1e-12);
  }
  SUBCASE("hypothesis violation is refused") {
    const Instance inst = make({{0.5, 1}, {1, 1}}, {0, 1}, {0.5, 0.5});
    CHECK_THROWS_WITH_AS(surrogate_report(inst, scwa_weights(inst, pop({1, 1}))), doctest::Contains("d_c^r"),
                         ModelError);
  }
  SUBCASE("random instances with demands >= 1") {
    Rng rng(55);
    slicesim::GeneratorOptions opts;
    opts.demand_at_least_one = true;
    for (int t = 0; t < 80; ++t) {
      const Instance inst = slicesim::random_instance(rng, opts);
      const auto q = scwa_weights(inst, slicesim::random_population(rng, inst));
      CAPTURE(t);
      const auto rep = surrogate_report(inst, q);
      CHECK(rep.bound.gap >= -1e-9);
      CHECK(rep.bound.slack >= -1e-6);
      CHECK(rep.bound.bound <= rep.cap + 1e-12);
    }
  }
}

TEST_CASE("elasticity on parallel resources") {
  Rng rng(8);
  slicesim::GeneratorOptions opts;
  opts.single_resource_per_class = true;
  for (int t = 0; t < 20; ++t) {
    const Instance inst = slicesim::random_instance(rng, opts);
    const auto base = slicesim::random_population(rng, inst);
    const std::size_t c = slicesim::uniform_index(rng, inst.num_classes());
    CAPTURE(t);
    const auto rep = elasticity_sweep(inst, base, c, 10, 1.0);
    CHECK(rep.rates.size() == 10);
    CHECK(rep.monotone);
    CHECK(rep.proportionality_error <= 1e-6);
    for (std::size_t k = 1; k < rep.rates.size(); ++k) CHECK(rep.rates[k] >= rep.rates[k - 1] - 1e-12);
  }
}

TEST_CASE("alpha = 1 utility forms share a maximizer") {
  Rng rng(23);
  for (int t = 0; t < 20; ++t) {
    const Instance inst = slicesim::random_instance(rng);
    const auto q = scwa_weights(inst, slicesim::random_population(rng, inst));
    const auto res = solve_alpha_scs(inst, q, 1.0);
    REQUIRE(res.converged);
    // the combined exponential form is a monotone transform of the log sum
    const auto u = utility(inst, res.rates(), q.q, 1.0);
    CHECK(u.combined == doctest::Approx(std::exp(u.sum)));
    CHECK(oracle::variational_check(inst, res.rates(), q.q, 1.0, 200, t + 1).pass);
  }
}

TEST_CASE("closed-form protection expression has the opposite sign of the sensitivity bound") {
  // slice 1 is heavy on r1, slice 2 spreads over r1 and r2
  const Instance inst = make({{4, 0}, {1, 1}}, {0, 1}, {0.5, 0.5});
  const auto q = scwa_weights(inst, pop({1, 1}));
  for (double a : {0.5, 2.0}) {
    CAPTURE(a);
    const auto reps = protection_report(inst, q, a);
    bool violated = false;
    for (const auto& r : reps) {
      CHECK(r.sensitivity_slack >= -1e-9);
      CHECK(r.sensitivity == doctest::Approx(-r.bound).epsilon(1e-9));
      violated = violated || r.slack < -1e-6;
    }
    CHECK(violated);
  }
}
