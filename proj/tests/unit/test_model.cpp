#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "slicing/model.hpp"

using namespace slicing;
using fixtures::make;
using fixtures::pop;

TEST_CASE("table1 fixture instance is accepted unchanged") {
  const Instance inst = fixtures::table1();
  CHECK(inst.num_resources() == 5);
  CHECK(inst.num_classes() == 3);
  CHECK(inst.num_slices() == 2);
  CHECK(inst.demand(0, 0) == 1.0);
  CHECK(inst.demand(0, 1) == 1.0);
  CHECK(inst.demand(1, 0) == 0.6);
  CHECK(inst.demand(2, 4) == 1.0);
  CHECK(inst.share(0) == 0.5);
  CHECK(inst.resources_of(1) == std::vector<std::size_t>{0, 3, 4});
  CHECK(inst.users_of(0) == std::vector<std::size_t>{0, 1, 2});
  CHECK(inst.users_of(2).empty());
}

TEST_CASE("shares are normalized") {
  const Instance inst = make({{1}, {1}}, {0, 1}, {2, 2});
  CHECK(inst.share(0) == 0.5);
  CHECK(inst.share(1) == 0.5);
}

TEST_CASE("capacities are rescaled into the demands") {
  const Instance inst = make({{2, 1}, {1, 3}}, {0, 1}, {1, 1}, {4, 0.5});
  CHECK(inst.spec().resources[0].capacity == 1.0);
  CHECK(inst.demand(0, 0) == doctest::Approx(0.5));
  CHECK(inst.demand(1, 1) == doctest::Approx(6.0));
}

TEST_CASE("validation errors") {
  InstanceSpec s;
  s.slices.push_back({"a", 1});
  SUBCASE("empty resource set") {
    CHECK_THROWS_WITH_AS(Instance::validate(s), "empty resource set", ModelError);
  }
  s.resources.push_back({"r", 1});
  UserClass uc{"c", "a", {0.0}, 0.0, 1.0, WorkloadDist::exponential};
  SUBCASE("zero demand") {
    s.classes.push_back(uc);
    CHECK_THROWS_WITH_AS(Instance::validate(s), doctest::Contains("zero demand"), ModelError);
  }
  SUBCASE("dangling slice") {
    uc.demand = {1};
    uc.slice = "missing";
    s.classes.push_back(uc);
    CHECK_THROWS_AS(Instance::validate(s), ModelError);
  }
  SUBCASE("non-positive share") {
    s.slices.push_back({"b", 0});
    CHECK_THROWS_AS(Instance::validate(s), ModelError);
  }
  SUBCASE("non-positive capacity") {
    s.resources[0].capacity = -1;
    CHECK_THROWS_AS(Instance::validate(s), ModelError);
  }
  SUBCASE("negative demand") {
    uc.demand = {-1};
    s.classes.push_back(uc);
    CHECK_THROWS_AS(Instance::validate(s), ModelError);
  }
  SUBCASE("wrong demand length") {
    uc.demand = {1, 1};
    s.classes.push_back(uc);
    CHECK_THROWS_AS(Instance::validate(s), ModelError);
  }
  SUBCASE("duplicate ids") {
    uc.demand = {1};
    s.classes.push_back(uc);
    s.classes.push_back(uc);
    CHECK_THROWS_AS(Instance::validate(s), ModelError);
  }
  SUBCASE("non-positive workload") {
    uc.demand = {1};
    uc.mean_workload = 0;
    s.classes.push_back(uc);
    CHECK_THROWS_AS(Instance::validate(s), ModelError);
  }
}

TEST_CASE("slices may have no classes") {
  const Instance inst = make({{1}}, {0}, {1, 3});
  CHECK(inst.classes_of(1).empty());
  CHECK(inst.share(1) == 0.75);
}

TEST_CASE("validation is idempotent") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (int t = 0; t < 50; ++t) {
    const Instance a = make({{u(rng), 0, u(rng)}, {0, u(rng), u(rng)}, {u(rng), u(rng), 0}}, {0, 1, 1},
                            {u(rng), u(rng)}, {u(rng), u(rng), u(rng)});
    const Instance b = Instance::validate(a.spec());
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t r = 0; r < 3; ++r) CHECK(b.demand(c, r) == a.demand(c, r));
    CHECK(b.share(0) == a.share(0));
    CHECK(b.share(1) == a.share(1));
  }
}

TEST_CASE("equal intra-slice weights") {
  // slice 1 = {a, b}, slice 2 = {c}
  const Instance inst = make({{1}, {1}, {1}}, {0, 0, 1}, {0.5, 0.5});
  SUBCASE("one user each") {
    const auto w = scwa_weights(inst, pop({1, 1, 1}));
    CHECK(w.q[0] == 0.25);
    CHECK(w.q[1] == 0.25);
    CHECK(w.q[2] == 0.5);
  }
  SUBCASE("counts (2,1,1)") {
    const auto w = scwa_weights(inst, pop({2, 1, 1}));
    CHECK(w.q[0] == doctest::Approx(1.0 / 3).epsilon(1e-15));
    CHECK(w.q[1] == doctest::Approx(1.0 / 6).epsilon(1e-15));
    CHECK(w.q[2] == 0.5);
  }
  SUBCASE("empty slice keeps zero weight") {
    const auto w = scwa_weights(inst, pop({1, 1, 0}));
    CHECK(w.q == std::vector<double>{0.25, 0.25, 0.0});
  }
  SUBCASE("empty population") {
    const auto w = scwa_weights(inst, pop({0, 0, 0}));
    CHECK_FALSE(w.any_positive());
  }
}

TEST_CASE("share-constrained sum holds on random populations") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> n(0, 9);
  const Instance inst = make({{1}, {1}, {1}, {1}, {1}}, {0, 0, 1, 1, 2}, {0.2, 0.3, 0.5});
  for (int t = 0; t < 200; ++t) {
    const auto p = pop({n(rng), n(rng), n(rng), n(rng), n(rng)});
    const auto w = scwa_weights(inst, p);
    for (std::size_t v = 0; v < 3; ++v) {
      double sum = 0.0;
      for (std::size_t c : inst.classes_of(v)) sum += w.q[c];
      if (p.slice_total(inst, v) > 0)
        CHECK(std::abs(sum - inst.share(v)) <= kWeightTolerance);
      else
        CHECK(sum == 0.0);
    }
  }
}

TEST_CASE("exogenous weights must respect shares") {
  const Instance inst = make({{1}, {1}, {1}}, {0, 0, 1}, {0.5, 0.5});
  CHECK_NOTHROW(exogenous_weights(inst, {0.1, 0.4, 0.5}));
  CHECK_NOTHROW(exogenous_weights(inst, {0.1, 0.4, 0.0}));
  CHECK_THROWS_AS(exogenous_weights(inst, {0.1, 0.3, 0.5}), ModelError);
}

TEST_CASE("feasibility report") {
  const Instance inst = fixtures::table1();
  SUBCASE("table1 fixture rates") {
    const auto rep = feasibility_report(inst, {0.4, 0.5, 0.5});
    CHECK(rep.feasible());
    CHECK(rep.usage[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(rep.usage[1] == doctest::Approx(0.4));
    CHECK(rep.usage[2] == 0.0);
    CHECK(rep.usage[3] == 1.0);
    CHECK(rep.usage[4] == 1.0);
  }
  SUBCASE("zero allocation") {
    const auto rep = feasibility_report(inst, {0, 0, 0});
    CHECK(rep.feasible());
    for (double u : rep.usage) CHECK(u == 0.0);
  }
  SUBCASE("overload") {
    const Instance one = make({{1}}, {0}, {1});
    const auto rep = feasibility_report(one, {1.1});
    CHECK_FALSE(rep.feasible());
    CHECK(rep.violations == std::vector<std::size_t>{0});
    CHECK(rep.max_violation == doctest::Approx(0.1));
  }
}

TEST_CASE("effective loads") {
  InstanceSpec s;
  s.resources = {{"a", 1}, {"b", 2}};
  s.slices = {{"v", 1}};
  s.classes = {{"c", "v", {0.5, 1.0}, 0.8, 1.5, WorkloadDist::exponential}};
  const Instance inst = Instance::validate(s);
  CHECK(inst.load(0) == doctest::Approx(1.2));
  const auto loads = inst.effective_loads();
  CHECK(loads[0] == doctest::Approx(0.6));
  CHECK(loads[1] == doctest::Approx(0.6));
}
