// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "slicesim/scenario_file.hpp"
#include "slicesim/verify.hpp"
#include "slicing/engines.hpp"
#include "slicing/sim.hpp"

using namespace slicing;
using slicesim::Check;
using slicesim::SuiteReport;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

std::string describe(const Check& c) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s %.3g%s", c.label.c_str(), c.worst, c.pass ? "" : " [violated]");
  return buf;
}

Outcome from_checks(const std::vector<const Check*>& checks) {
  Outcome o{true, ""};
  for (const Check* c : checks) {
    o.pass = o.pass && c->pass && c->count > 0;
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += describe(*c);
  }
  return o;
}

slicesim::ScenarioFile scenario(const std::string& name) {
  return slicesim::load_scenario(std::string(SCENARIO_DIR) + "/" + name + ".scenario");
}

sim::Engine engine(const char* name, double alpha = 1.0) { return *sim::Engine::from_name(name, alpha); }

std::vector<std::uint64_t> seeds(std::uint64_t n) {
  std::vector<std::uint64_t> s(n);
  std::iota(s.begin(), s.end(), 1);
  return s;
}

bool disjoint(const sim::Summary& a, const sim::Summary& b) {
  return a.mean - a.half_width > b.mean + b.half_width || b.mean - b.half_width > a.mean + a.half_width;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1 and 2 read the same suite run.
SuiteReport& oracle_suite() {
  static SuiteReport rep = slicesim::run_suite("oracle", {});
  return rep;
}

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& rep = oracle_suite();
  const double secs = seconds_since(t0);
  auto o = from_checks({&rep.check("alpha=0.5 |engine - oracle|"), &rep.check("alpha=1 |engine - oracle|"),
                        &rep.check("alpha=2 |engine - oracle|"), &rep.check("|water-fill - max-min oracle|")});
  o.pass = o.pass && secs <= 120.0;
  o.detail += fmt("; %.1fs", secs);
  return o;
}

Outcome criterion2() { return from_checks({&oracle_suite().check("|alpha=50 SCS - water-fill|")}); }

Outcome criterion3() {
  slicesim::VerifyOptions v;
  v.instances = 500;
  v.alphas = {1.0};
  const auto rep = slicesim::run_suite("protection", v);
  return from_checks({&rep.check("alpha=1 SCS minus static utility")});
}

Outcome criterion4() {
  slicesim::VerifyOptions v;
  v.instances = 500;
  v.alphas = {0.5, 2.0};
  const auto prot = slicesim::run_suite("protection", v);
  v.alphas = {0.5, 1.0, 2.0};
  const auto envy = slicesim::run_suite("envy", v);
  auto o = from_checks({&prot.check("alpha=0.5 closed-form bound slack"),
                        &prot.check("alpha=2 closed-form bound slack"), &envy.check("alpha=0.5 bound slack"),
                        &envy.check("alpha=2 bound slack"), &envy.check("alpha=1 |bound - (s_w - s_v)|")});
  const auto info = from_checks(
      {&prot.check("alpha=0.5 price-sensitivity slack"), &prot.check("alpha=2 price-sensitivity slack")});
  o.detail += "; for reference: " + info.detail;
  return o;
}

Outcome criterion5() {
  const auto rep = slicesim::run_suite("surrogate", {});
  return from_checks(
      {&rep.check("gap"), &rep.check("bound slack"), &rep.check("single-resource unit-demand |gap|")});
}

Outcome criterion6() {
  const auto rep = slicesim::run_suite("factorization", {});
  return from_checks({&rep.check("relative reconstruction error"), &rep.check("|sum t^v - 1|")});
}

Outcome criterion7() {
  const auto rep = slicesim::run_suite("elasticity", {});
  return from_checks({&rep.check("largest decrease of phi_c in n_c"), &rep.check("proportional split error")});
}

Outcome criterion8() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto file = scenario("fig2_symmetric");
  const auto reps = sim::replicate(file.scenario(engine("maxmin-scs"), 1), {engine("maxmin-scs"), engine("dps")},
                                   seeds(20));
  std::int64_t fewest = reps[0].runs[0].arrivals;
  for (const auto& r : reps)
    for (const auto& m : r.runs) fewest = std::min(fewest, m.arrivals);
  const auto& ts = reps[0].field("mean_throughput");
  const auto& td = reps[1].field("mean_throughput");
  const auto& ds = reps[0].field("mean_delay");
  const auto& dd = reps[1].field("mean_delay");
  const double secs = seconds_since(t0);
  const double ratio = ts.mean / td.mean;
  const double delay_dev = std::abs(ds.mean / dd.mean - 1.0);
  Outcome o;
  o.pass = fewest >= 200000 && ratio >= 1.05 && disjoint(ts, td) && delay_dev <= 0.05 && secs <= 600.0;
  o.detail = fmt("throughput scs %.4f+-%.4f dps %.4f+-%.4f", ts.mean, ts.half_width, td.mean, td.half_width) +
             fmt(", ratio %.3f, delay deviation %.1f%%", ratio, 100 * delay_dev) +
             fmt(", min arrivals %.0f, %.1fs", static_cast<double>(fewest), secs);
  return o;
}

Outcome criterion9() {
  const auto file = scenario("fig5_busy");
  const auto engines = std::vector<sim::Engine>{engine("maxmin-scs"), engine("dps")};
  Outcome o{true, ""};
  const auto& values = file.sweep->values;
  for (std::size_t k = 0; k < values.size(); ++k) {
    const auto f = file.with_value(values[k]);
    const auto reps = sim::replicate(f.scenario(engines[0], 1), engines, f.run.seeds);
    const auto& s = reps[0].field("frac_both_busy");
    const auto& d = reps[1].field("frac_both_busy");
    bool ok = s.mean < d.mean;
    if (k + 3 >= values.size()) ok = ok && disjoint(s, d);
    o.pass = o.pass && ok;
    if (!o.detail.empty()) o.detail += ", ";
    o.detail += fmt("%.2f: %.4f vs %.4f", values[k], s.mean, d.mean);
    if (!ok) o.detail += " [violated]";
  }
  return o;
}

Outcome criterion10() {
  auto file = scenario("fig7_multiresource");
  file.run.horizon = 200000;
  Outcome o{true, ""};
  const auto base = file.scenario(engine("maxmin-scs"), 1);
  for (const auto& e : {engine("maxmin-scs"), engine("scs", 1.0), engine("drf"), engine("dps")}) {
    const auto rep = sim::stability_probe(base, e);
    const bool ok = rep.verdict == sim::Verdict::stable;
    o.pass = o.pass && ok;
    o.detail += e.label() + fmt(" %.3f ", rep.ratio) + sim::to_string(rep.verdict) + ", ";
    if (o.detail.find("load") == std::string::npos) o.detail = fmt("load %.4f; ", rep.max_effective_load) + o.detail;
  }
  const auto over = slicesim::apply_parameter(file, "classes.*.arrival_rate", 0.7 * 1.25);
  const auto rep = sim::stability_probe(over.scenario(engine("maxmin-scs"), 1), engine("maxmin-scs"));
  o.pass = o.pass && rep.verdict == sim::Verdict::growing;
  o.detail += fmt("x1.25 load %.4f ratio %.3f ", rep.max_effective_load, rep.ratio) + sim::to_string(rep.verdict);
  return o;
}

Outcome criterion11() {
  auto file = scenario("fig2_symmetric");
  file.run.horizon = 1e6;
  const auto m = sim::run_simulation(file.scenario(engine("maxmin-scs"), 7));
  const double lambda = static_cast<double>(m.departures) / m.window_length();
  const double err = std::abs(m.mean_population - lambda * m.mean_delay) / m.mean_population;
  return {err <= 0.03, fmt("L %.4f, lambda W %.4f, relative error %.4f", m.mean_population,
                           lambda * m.mean_delay, err)};
}

Outcome criterion12() {
  const auto file = scenario("table1_static");
  const Instance& inst = file.instance;
  const auto rep = feasibility_report(inst, {0.4, 0.5, 0.5});
  const auto q = exogenous_weights(inst, {0.25, 0.25, 0.5});
  const auto res = solve_alpha_scs(inst, q, 1.0);
  const auto& phi = res.rates();
  const double err = std::max({std::abs(phi[0] - 0.4), std::abs(phi[1] - 1.0 / 3), std::abs(phi[2] - 2.0 / 3)});
  const double nu = std::accumulate(res.allocation.prices.begin(), res.allocation.prices.end(), 0.0);
  Outcome o;
  o.pass = rep.usage[0] == 1.0 && rep.feasible() && res.converged && err <= 1e-3 && std::abs(nu - 1.0) <= 1e-6;
  o.detail = fmt("usage_1 %.17g, feasible %.0f, |phi - (0.4, 1/3, 2/3)| %.2e, sum nu %.12f", rep.usage[0],
                 rep.feasible() ? 1 : 0, err, nu);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"engine-oracle equivalence", criterion1},
      {"alpha=50 surrogate convergence", criterion2},
      {"protection at alpha=1", criterion3},
      {"protection and envy bounds", criterion4},
      {"surrogate bound", criterion5},
      {"factorization identity", criterion6},
      {"elasticity", criterion7},
      {"symmetric throughput gain", criterion8},
      {"busy-period separation", criterion9},
      {"stability", criterion10},
      {"Little's law", criterion11},
      {"table1 fixture", criterion12},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("criterion %2zu %s: %s (%s)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
