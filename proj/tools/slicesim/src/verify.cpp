#include "slicesim/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "slicesim/generate.hpp"
#include "slicing/analysis.hpp"
#include "slicing/engines.hpp"
#include "slicing/oracle.hpp"
#include "slicing/rng.hpp"

namespace slicesim {

using namespace slicing;

void Check::observe(double x) {
  if (count == 0 || (upper ? x > worst : x < worst) || std::isnan(x)) worst = x;
  ++count;
  pass = upper ? worst <= limit : worst >= limit;
}

bool SuiteReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass && c.count > 0; });
}

const Check& SuiteReport::check(const std::string& label) const {
  for (const auto& c : checks)
    if (c.label == label) return c;
  throw std::out_of_range("no check '" + label + "' in suite " + suite);
}

namespace {

std::string alpha_tag(double a) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "alpha=%g", a);
  return buf;
}

class Builder {
 public:
  explicit Builder(std::string suite) { report_.suite = std::move(suite); }
  Check& at_most(const std::string& label, double limit) { return add(label, limit, true); }
  Check& at_least(const std::string& label, double limit) { return add(label, limit, false); }
  SuiteReport done() { return std::move(report_); }

 private:
  Check& add(const std::string& label, double limit, bool upper) {
    for (auto& c : report_.checks)
      if (c.label == label) return c;
    report_.checks.push_back({label, 0.0, limit, upper, 0, true});
    return report_.checks.back();
  }
  SuiteReport report_;
};

double linf(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::vector<double> random_simplex(Rng& rng, std::size_t n) {
  std::vector<double> x(n);
  double s = 0.0;
  for (double& v : x) s += v = uniform(rng, 0.05, 1.0);
  for (double& v : x) v /= s;
  return x;
}

SolveResult solved(const Instance& inst, const ClassWeights& q, double alpha) {
  auto res = solve_alpha_scs(inst, q, alpha);
  if (!res.converged) throw SolverError("alpha-SCS did not converge at " + alpha_tag(alpha));
  return res;
}

SuiteReport protection(Rng& rng, std::size_t n, const std::vector<double>& alphas) {
  Builder b("protection");
  for (std::size_t t = 0; t < n; ++t) {
    const Instance inst = random_instance(rng);
    const auto q = scwa_weights(inst, random_population(rng, inst));
    for (double a : alphas) {
      for (const auto& r : protection_report(inst, q, a)) {
        if (a == 1.0) {
          b.at_least("alpha=1 SCS minus static utility", -1e-9).observe(-r.gap);
        } else {
          b.at_least(alpha_tag(a) + " closed-form bound slack", -1e-6).observe(r.slack);
          b.at_least(alpha_tag(a) + " price-sensitivity slack", -1e-6).observe(r.sensitivity_slack);
        }
      }
    }
  }
  return b.done();
}

SuiteReport envy(Rng& rng, std::size_t n, const std::vector<double>& alphas) {
  Builder b("envy");
  for (std::size_t t = 0; t < n; ++t) {
    const Instance inst = random_instance(rng);
    const auto q = scwa_weights(inst, random_population(rng, inst));
    for (double a : alphas)
      for (std::size_t v = 0; v < inst.num_slices(); ++v)
        for (std::size_t w = 0; w < inst.num_slices(); ++w) {
          if (v == w) continue;
          const auto e = envy_report(inst, q, a, v, w);
          b.at_least(alpha_tag(a) + " bound slack", -1e-6).observe(e.slack);
          if (a == 1.0)
            b.at_most("alpha=1 |bound - (s_w - s_v)|", 1e-9)
                .observe(std::abs(e.bound - (inst.share(w) - inst.share(v))));
        }
  }
  return b.done();
}

SuiteReport surrogate(Rng& rng, std::size_t n) {
  Builder b("surrogate");
  GeneratorOptions opts;
  opts.demand_at_least_one = true;
  for (std::size_t t = 0; t < n; ++t) {
    const Instance inst = random_instance(rng, opts);
    const auto rep = surrogate_report(inst, scwa_weights(inst, random_population(rng, inst)));
    b.at_least("gap", -1e-9).observe(rep.bound.gap);
    b.at_least("bound slack", -1e-6).observe(rep.bound.slack);
  }
  GeneratorOptions unit;
  unit.max_resources = 1;
  unit.min_demand = unit.max_demand = 1.0;
  unit.density = 1.0;
  for (std::size_t t = 0; t < std::max<std::size_t>(1, n / 4); ++t) {
    const Instance inst = random_instance(rng, unit);
    const auto rep = surrogate_report(inst, scwa_weights(inst, random_population(rng, inst)));
    b.at_most("single-resource unit-demand |gap|", 1e-9).observe(std::abs(rep.bound.gap));
  }
  return b.done();
}

SuiteReport factorization(Rng& rng, std::size_t n) {
  Builder b("factorization");
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t nv = 2 + uniform_index(rng, 2);
    const auto s = random_simplex(rng, nv);
    std::vector<std::size_t> slice_of;
    std::vector<double> q, phi;
    for (std::size_t v = 0; v < nv; ++v)
      for (double x : random_simplex(rng, 1 + uniform_index(rng, 3))) {
        slice_of.push_back(v);
        q.push_back(s[v] * x);
        phi.push_back(uniform(rng, 0.01, 2.0));
      }
    const double a = t % 4 == 0 ? 1.0 : uniform(rng, 0.2, 4.0);
    const auto rep = factorize(phi, q, s, slice_of, a);
    b.at_most("relative reconstruction error", 1e-8).observe(rep.relative_error);
    double ts = 0.0;
    for (double x : rep.slice_weights) ts += x;
    b.at_most("|sum t^v - 1|", 1e-12).observe(std::abs(ts - 1.0));
  }
  return b.done();
}

SuiteReport elasticity(Rng& rng, std::size_t n) {
  Builder b("elasticity");
  GeneratorOptions opts;
  opts.single_resource_per_class = true;
  for (std::size_t t = 0; t < n; ++t) {
    const Instance inst = random_instance(rng, opts);
    const auto base = random_population(rng, inst);
    const std::size_t c = uniform_index(rng, inst.num_classes());
    const auto rep = elasticity_sweep(inst, base, c, 10, 1.0);
    double drop = 0.0;
    for (std::size_t k = 1; k < rep.rates.size(); ++k) drop = std::max(drop, rep.rates[k - 1] - rep.rates[k]);
    b.at_most("largest decrease of phi_c in n_c", 1e-12).observe(drop);
    b.at_most("proportional split error", 1e-6).observe(rep.proportionality_error);
  }
  return b.done();
}

SuiteReport variational(Rng& rng, std::size_t n, const std::vector<double>& alphas, std::uint64_t seed) {
  Builder b("variational");
  for (std::size_t t = 0; t < n; ++t) {
    const Instance inst = random_instance(rng);
    const auto q = scwa_weights(inst, random_population(rng, inst));
    for (double a : alphas) {
      const auto res = solved(inst, q, a);
      const auto v = oracle::variational_check(inst, res.rates(), q.q, a, 200, derive_seed(seed, "variational", t));
      b.at_most(alpha_tag(a) + " worst directional derivative", 1e-6).observe(v.worst);
    }
  }
  return b.done();
}

SuiteReport oracle_suite(Rng& rng, std::size_t n, const std::vector<double>& alphas) {
  Builder b("oracle");
  for (std::size_t t = 0; t < n; ++t) {
    const Instance inst = random_instance(rng);
    const auto q = scwa_weights(inst, random_population(rng, inst));
    for (double a : alphas) {
      const auto orc = oracle::concave_opt(inst, q.q, a);
      b.at_most(alpha_tag(a) + " |engine - oracle|", 1e-3).observe(linf(solved(inst, q, a).rates(), orc.rates));
    }
    const auto wf = maxmin_waterfill(inst, q);
    b.at_most("|water-fill - max-min oracle|", 1e-3).observe(linf(wf.rates(), oracle::maxmin(inst, q.q).rates));
    b.at_most("|alpha=50 SCS - water-fill|", 0.02).observe(linf(solved(inst, q, 50.0).rates(), wf.rates()));
  }
  return b.done();
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"protection",  "envy",        "surrogate", "factorization",
                                              "elasticity",  "variational", "oracle"};
  return names;
}

SuiteReport run_suite(const std::string& suite, const VerifyOptions& opts) {
  Rng rng(derive_seed(opts.meta_seed, suite, 0));
  auto count = [&](std::size_t dflt) { return opts.instances.value_or(dflt); };
  auto alphas = [&](std::vector<double> dflt) { return opts.alphas.empty() ? dflt : opts.alphas; };
  if (suite == "protection") return protection(rng, count(500), alphas({1.0}));
  if (suite == "envy") return envy(rng, count(200), alphas({1.0, 2.0}));
  if (suite == "surrogate") return surrogate(rng, count(200));
  if (suite == "factorization") return factorization(rng, count(1000));
  if (suite == "elasticity") return elasticity(rng, count(50));
  if (suite == "variational") return variational(rng, count(100), alphas({0.5, 1.0, 2.0}), opts.meta_seed);
  if (suite == "oracle") return oracle_suite(rng, count(200), alphas({0.5, 1.0, 2.0}));
  throw std::invalid_argument("unknown suite '" + suite + "'");
}

void print_report(std::ostream& os, const SuiteReport& report) {
  for (const auto& c : report.checks) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", c.worst);
    os << report.suite << ": " << c.label << ": worst " << buf << (c.upper ? " (limit <= " : " (limit >= ");
    std::snprintf(buf, sizeof buf, "%g", c.limit);
    os << buf << ", " << c.count << " cases) " << (c.pass ? "PASS" : "FAIL") << '\n';
  }
  os << report.suite << ": " << (report.pass() ? "PASS" : "FAIL") << '\n';
}

}  // namespace slicesim
