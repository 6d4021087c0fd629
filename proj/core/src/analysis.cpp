#include "slicing/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace slicing {

namespace {

constexpr double kNormTolerance = 1e-9;

void require(bool ok, const std::string& what) {
  if (!ok) throw ModelError(what);
}

double efficiency(double lambda, double alpha) {
  return alpha == 1.0 ? lambda : std::pow(lambda, 1.0 - alpha) / (1.0 - alpha);
}

double class_utility(double phi, double q, double alpha) {
  if (q <= 0.0) return 0.0;
  const double ratio = phi / q;
  if (alpha == 1.0) return q * std::log(ratio);
  if (ratio == 0.0) return alpha > 1.0 ? -std::numeric_limits<double>::infinity() : 0.0;
  return q * std::pow(ratio, 1.0 - alpha) / (1.0 - alpha);
}

SolveResult converged_or_throw(SolveResult res, const char* what) {
  if (!res.converged)
    throw SolverError(std::string(what) + " did not converge (feasibility " +
                      std::to_string(res.residuals.feasibility) + ", slackness " +
                      std::to_string(res.residuals.complementary_slackness) + ")");
  return res;
}

SolverOptions tightened(SolverOptions opts) {
  opts.tolerance = std::min(opts.tolerance, kAnalysisTolerance);
  return opts;
}

std::vector<double> slice_usage(const Instance& inst, const std::vector<double>& phi, std::size_t v) {
  std::vector<double> u(inst.num_resources(), 0.0);
  for (std::size_t c : inst.classes_of(v))
    for (std::size_t r : inst.resources_of(c)) u[r] += inst.demand(c, r) * phi[c];
  return u;
}

}  // namespace

double f_alpha(std::span<const double> x, std::span<const double> y, double alpha) {
  require(x.size() == y.size(), "f_alpha: mismatched lengths");
  require(!x.empty(), "f_alpha: empty input");
  require(alpha > 0.0, "f_alpha: alpha must be positive");
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] > 0.0 && y[i] > 0.0, "f_alpha: entries must be positive");
    sx += x[i];
    sy += y[i];
  }
  require(std::abs(sx - 1.0) <= kNormTolerance && std::abs(sy - 1.0) <= kNormTolerance,
          "f_alpha: inputs must be normalized");

  if (alpha == 1.0) {
    double kl = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) kl += x[i] * std::log(x[i] / y[i]);
    return std::exp(-kl);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += x[i] * std::pow(y[i] / x[i], 1.0 - alpha);
  return std::pow(sum, 1.0 / alpha);
}

double slice_utility(const Instance& inst, std::size_t slice, const std::vector<double>& phi,
                     const std::vector<double>& q, double alpha) {
  double u = 0.0;
  for (std::size_t c : inst.classes_of(slice)) u += class_utility(phi[c], q[c], alpha);
  return u;
}

UtilityReport utility(const Instance& inst, const std::vector<double>& phi,
                      const std::vector<double>& q, double alpha) {
  require(phi.size() == inst.num_classes() && q.size() == inst.num_classes(),
          "utility: vector sizes do not match class count");
  require(alpha > 0.0, "utility: alpha must be positive");
  UtilityReport rep;
  for (std::size_t v = 0; v < inst.num_slices(); ++v) {
    rep.per_slice.push_back(slice_utility(inst, v, phi, q, alpha));
    rep.sum += rep.per_slice.back();
  }
  rep.combined = alpha == 1.0 ? std::exp(rep.sum) : rep.sum;
  return rep;
}

FactorizationReport factorize(std::span<const double> phi, std::span<const double> q,
                              std::span<const double> shares,
                              std::span<const std::size_t> slice_of, double alpha) {
  const std::size_t nc = phi.size();
  const std::size_t nv = shares.size();
  require(q.size() == nc && slice_of.size() == nc, "factorize: vector sizes differ");
  require(alpha > 0.0, "factorize: alpha must be positive");

  std::vector<double> gamma(nv, 0.0), weight_sum(nv, 0.0);
  double lambda = 0.0;
  double direct = 0.0;
  for (std::size_t c = 0; c < nc; ++c) {
    require(slice_of[c] < nv, "factorize: class references unknown slice");
    if (q[c] <= 0.0) {
      require(phi[c] == 0.0, "factorize: zero-weight class with positive rate");
      continue;
    }
    require(phi[c] > 0.0, "factorize: weighted class with zero rate");
    gamma[slice_of[c]] += phi[c];
    weight_sum[slice_of[c]] += q[c];
    lambda += phi[c];
    direct += class_utility(phi[c], q[c], alpha);
  }
  require(std::abs(std::accumulate(shares.begin(), shares.end(), 0.0) - 1.0) <= kNormTolerance,
          "factorize: shares must sum to 1");
  for (std::size_t v = 0; v < nv; ++v) {
    require(gamma[v] > 0.0, "factorize: zero slice aggregate");
    require(std::abs(weight_sum[v] - shares[v]) <= 1e-9,
            "factorize: weights of a slice do not sum to its share");
  }

  FactorizationReport rep;
  rep.total_rate = lambda;
  rep.efficiency = efficiency(lambda, alpha);

  std::vector<double> gamma_n(nv);
  for (std::size_t v = 0; v < nv; ++v) gamma_n[v] = gamma[v] / lambda;
  // The shares play the role of the reference vector being measured against
  // the normalized slice rates; this is the order in which the product of
  // the three terms reproduces U_alpha.
  rep.inter_fairness = f_alpha(shares, gamma_n, alpha);

  rep.slice_weights.resize(nv);
  double t_norm = 0.0;
  for (std::size_t v = 0; v < nv; ++v) {
    rep.slice_weights[v] = shares[v] * std::pow(gamma_n[v] / shares[v], 1.0 - alpha);
    t_norm += rep.slice_weights[v];
  }
  for (double& t : rep.slice_weights) t /= t_norm;

  double intra = 0.0;
  for (std::size_t v = 0; v < nv; ++v) {
    std::vector<double> q_n, phi_n;
    for (std::size_t c = 0; c < nc; ++c) {
      if (slice_of[c] != v || q[c] <= 0.0) continue;
      q_n.push_back(q[c] / shares[v]);
      phi_n.push_back(phi[c] / gamma[v]);
    }
    const double f = f_alpha(q_n, phi_n, alpha);
    intra += alpha == 1.0 ? rep.slice_weights[v] * std::log(f)
                          : rep.slice_weights[v] * std::pow(f, alpha);
  }
  rep.intra_fairness = alpha == 1.0 ? std::exp(intra) : std::pow(intra, 1.0 / alpha);

  rep.utility = alpha == 1.0 ? std::exp(direct) : direct;
  rep.reconstructed =
      rep.efficiency * std::pow(rep.inter_fairness * rep.intra_fairness, alpha);
  rep.relative_error = std::abs(rep.reconstructed - rep.utility) / std::abs(rep.utility);
  return rep;
}

FactorizationReport factorize(const Instance& inst, const std::vector<double>& phi,
                              const std::vector<double>& q, double alpha) {
  std::vector<std::size_t> slice_of(inst.num_classes());
  for (std::size_t c = 0; c < slice_of.size(); ++c) slice_of[c] = inst.slice_of(c);
  const std::vector<double> shares = inst.shares();
  return factorize(phi, q, shares, slice_of, alpha);
}

std::vector<double> charged_usage(const Instance& inst, const std::vector<double>& prices,
                                  double alpha) {
  require(prices.size() == inst.num_resources(), "charged_usage: price vector size mismatch");
  std::vector<double> p(inst.num_classes(), 0.0);
  const double e = (alpha - 1.0) / alpha;
  for (std::size_t c = 0; c < inst.num_classes(); ++c) {
    double sum = 0.0;
    for (std::size_t r : inst.resources_of(c)) sum += inst.demand(c, r) * prices[r];
    if (sum > 0.0) p[c] = alpha == 1.0 ? 1.0 : std::exp(e * std::log(sum));
  }
  return p;
}

std::vector<BoundReport> protection_report(const Instance& inst, const ClassWeights& q, double alpha,
                                           const SolverOptions& options) {
  const SolverOptions opts = tightened(options);
  const SolveResult shared = converged_or_throw(solve_alpha_scs(inst, q, alpha, opts), "SCS solve");
  const PartitionResult part = static_partition(inst, q, alpha, opts);
  if (!part.converged) throw SolverError("static partition solve did not converge");

  const std::vector<double> p = charged_usage(inst, shared.prices(), alpha);
  double total = 0.0;
  for (std::size_t c = 0; c < inst.num_classes(); ++c) total += q.q[c] * p[c];

  std::vector<BoundReport> out;
  for (std::size_t v = 0; v < inst.num_slices(); ++v) {
    BoundReport rep;
    rep.alpha = alpha;
    rep.slice = v;
    rep.gap = slice_utility(inst, v, part.combined.rates, q.q, alpha) -
              slice_utility(inst, v, shared.rates(), q.q, alpha);
    double own = 0.0;
    for (std::size_t c : inst.classes_of(v)) own += q.q[c] / inst.share(v) * p[c];
    rep.bound = inst.share(v) * (own - total);
    rep.slack = rep.bound - rep.gap;
    const std::vector<double> used = slice_usage(inst, shared.rates(), v);
    for (std::size_t r = 0; r < inst.num_resources(); ++r)
      rep.sensitivity += shared.prices()[r] * (inst.share(v) - used[r]);
    rep.sensitivity_slack = rep.sensitivity - rep.gap;
    out.push_back(rep);
  }
  return out;
}

BoundReport envy_report(const Instance& inst, const ClassWeights& q, double alpha, std::size_t v,
                        std::size_t w, const SolverOptions& options) {
  const SolverOptions opts = tightened(options);
  require(v < inst.num_slices() && w < inst.num_slices(), "envy_report: unknown slice");
  const SolveResult shared = converged_or_throw(solve_alpha_scs(inst, q, alpha, opts), "SCS solve");

  const std::vector<double> caps = slice_usage(inst, shared.rates(), w);

  const ClassWeights own = restrict_to_slice(inst, q, v);
  std::vector<double> swapped(inst.num_classes(), 0.0);
  if (own.any_positive())
    swapped = converged_or_throw(solve_alpha_scs(inst, own, alpha, caps, opts), "swap solve").rates();

  const std::vector<double> p = charged_usage(inst, shared.prices(), alpha);
  BoundReport rep;
  rep.alpha = alpha;
  rep.slice = v;
  rep.other_slice = w;
  rep.gap = slice_utility(inst, v, swapped, q.q, alpha) -
            slice_utility(inst, v, shared.rates(), q.q, alpha);
  double theirs = 0.0, mine = 0.0;
  for (std::size_t c : inst.classes_of(w)) theirs += q.q[c] * p[c];
  for (std::size_t c : inst.classes_of(v)) mine += q.q[c] * p[c];
  rep.bound = theirs - mine;
  rep.slack = rep.bound - rep.gap;
  const std::vector<double> used = slice_usage(inst, shared.rates(), v);
  for (std::size_t r = 0; r < inst.num_resources(); ++r)
    rep.sensitivity += shared.prices()[r] * (caps[r] - used[r]);
  rep.sensitivity_slack = rep.sensitivity - rep.gap;
  return rep;
}

SurrogateReport surrogate_report(const Instance& inst, const ClassWeights& q,
                                 const SolverOptions& options) {
  const SolverOptions opts = tightened(options);
  double bound = 0.0, cap = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < inst.num_classes(); ++c) {
    if (q.q[c] <= 0.0) continue;
    double total_demand = 0.0;
    for (std::size_t r : inst.resources_of(c)) {
      require(inst.demand(c, r) >= 1.0 - 1e-12,
              "surrogate bound needs d_c^r >= 1 on every used resource; class '" +
                  inst.user_class(c).id + "' has " + std::to_string(inst.demand(c, r)) +
                  " on resource '" + inst.resource_id(r) + "'");
      total_demand += inst.demand(c, r);
    }
    bound += q.q[c] * (total_demand - 1.0);
    cap = std::max(cap, total_demand - 1.0);
  }

  const SolveResult log_form = converged_or_throw(solve_alpha_scs(inst, q, 1.0, opts), "1-SCS solve");
  const SolveResult maxmin = maxmin_waterfill(inst, q);
  SurrogateReport rep;
  for (std::size_t c = 0; c < inst.num_classes(); ++c) {
    if (q.q[c] <= 0.0) continue;
    rep.psi_log += q.q[c] * std::log(log_form.rates()[c]);
    rep.psi_maxmin += q.q[c] * std::log(maxmin.rates()[c]);
  }
  rep.bound.alpha = 1.0;
  rep.bound.gap = rep.psi_log - rep.psi_maxmin;
  rep.bound.bound = bound;
  rep.bound.slack = bound - rep.bound.gap;
  rep.cap = cap;
  return rep;
}

ElasticityReport elasticity_sweep(const Instance& inst, PopulationState base, std::size_t cls,
                                  std::int64_t n_max, double alpha, const SolverOptions& options) {
  const SolverOptions opts = tightened(options);
  base.check(inst);
  require(cls < inst.num_classes(), "elasticity_sweep: unknown class");
  require(n_max >= 1, "elasticity_sweep: n_max must be at least 1");
  ElasticityReport rep;
  for (std::int64_t n = 1; n <= n_max; ++n) {
    base.counts[cls] = n;
    const ClassWeights q = scwa_weights(inst, base);
    const SolveResult res = converged_or_throw(solve_alpha_scs(inst, q, alpha, opts), "SCS solve");
    const double rate = res.rates()[cls];
    if (!rep.rates.empty() && rate < rep.rates.back() * (1.0 - 1e-9)) rep.monotone = false;
    rep.rates.push_back(rate);

    for (std::size_t r = 0; r < inst.num_resources(); ++r) {
      double used = 0.0, weight = 0.0;
      for (std::size_t c : inst.users_of(r)) {
        used += inst.demand(c, r) * res.rates()[c];
        weight += q.q[c];
      }
      if (weight <= 0.0 || used <= 0.0) continue;
      for (std::size_t c : inst.users_of(r)) {
        const double share_of_resource = inst.demand(c, r) * res.rates()[c] / used;
        rep.proportionality_error =
            std::max(rep.proportionality_error, std::abs(share_of_resource - q.q[c] / weight));
      }
    }
  }
  return rep;
}

}  // namespace slicing
