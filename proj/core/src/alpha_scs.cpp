#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "slicing/engines.hpp"

namespace slicing {

namespace {

using Entry = std::pair<std::size_t, double>;

// Overload is held to a hundredth of the tolerance so converged rates pass
// feasibility checks at the model's default tolerance.
bool done(const Residuals& res, double tol) {
  return res.feasibility <= 0.01 * tol && res.complementary_slackness <= tol;
}

double error(const Residuals& res) { return std::max(100.0 * res.feasibility, res.complementary_slackness); }

// Reduced problem over classes with positive weight and resources they use.
// Prices live on the reduced resources; a price of exactly zero means the
// resource is out of the Newton variable set.
class DualProblem {
 public:
  DualProblem(const Instance& inst, const ClassWeights& q, double alpha,
              const std::vector<double>& capacities, const SolverOptions& opts)
      : inst_(inst), alpha_(alpha), log_form_(std::abs(alpha - 1.0) < opts.log_form_threshold) {
    std::vector<std::size_t> local(inst.num_resources(), npos);
    for (std::size_t c = 0; c < inst.num_classes(); ++c) {
      if (q.q[c] <= 0.0) continue;
      bool blocked = false;
      for (std::size_t r : inst.resources_of(c)) blocked = blocked || capacities[r] <= 0.0;
      if (blocked) continue;  // phi_c = 0
      classes_.push_back(c);
      weight_.push_back(q.q[c]);
      cls_res_.emplace_back();
      for (std::size_t r : inst.resources_of(c)) {
        if (local[r] == npos) {
          local[r] = resources_.size();
          resources_.push_back(r);
          cap_.push_back(capacities[r]);
          res_cls_.emplace_back();
        }
        cls_res_.back().emplace_back(local[r], inst.demand(c, r));
        res_cls_[local[r]].emplace_back(classes_.size() - 1, inst.demand(c, r));
      }
    }
  }

  std::size_t nc() const { return classes_.size(); }
  std::size_t nr() const { return resources_.size(); }

  void price_sums(const std::vector<double>& nu, std::vector<double>& p) const {
    p.assign(nc(), 0.0);
    for (std::size_t k = 0; k < nc(); ++k)
      for (auto [j, d] : cls_res_[k]) p[k] += d * nu[j];
  }

  double rate(std::size_t k, double p) const {
    if (log_form_) return weight_[k] / p;
    return weight_[k] * std::exp(-std::log(p) / alpha_);
  }

  void rates(const std::vector<double>& p, std::vector<double>& phi) const {
    phi.resize(nc());
    for (std::size_t k = 0; k < nc(); ++k) phi[k] = rate(k, p[k]);
  }

  void usage(const std::vector<double>& phi, std::vector<double>& u) const {
    u.assign(nr(), 0.0);
    for (std::size_t j = 0; j < nr(); ++j)
      for (auto [k, d] : res_cls_[j]) u[j] += d * phi[k];
  }

  // G(nu + dnu) - G(nu) for the dual objective
  // G(nu) = sum_k h_k(P_k) + sum_j cap_j nu_j, evaluated term by term so
  // that the huge, cancelling magnitudes seen at large alpha stay exact.
  double dual_change(const std::vector<double>& p, const std::vector<double>& dnu) const {
    double change = 0.0;
    for (std::size_t j = 0; j < nr(); ++j) change += cap_[j] * dnu[j];
    const double e = (alpha_ - 1.0) / alpha_;
    for (std::size_t k = 0; k < nc(); ++k) {
      double dp = 0.0;
      for (auto [j, d] : cls_res_[k]) dp += d * dnu[j];
      const double ratio = dp / p[k];
      if (ratio <= -1.0) return std::numeric_limits<double>::infinity();
      const double lr = std::log1p(ratio);
      if (log_form_) {
        change -= weight_[k] * lr;
      } else {
        change += weight_[k] * alpha_ / (1.0 - alpha_) * std::exp(e * std::log(p[k])) *
                  std::expm1(e * lr);
      }
    }
    return change;
  }

  // Slackness of resource j is weighted by the largest fraction of any
  // user's price sum that j contributes, which keeps the measure free of the
  // scale of the prices (they span many decades at large alpha).
  Residuals residuals(const std::vector<double>& nu, const std::vector<double>& p,
                      const std::vector<double>& u) const {
    Residuals res;
    for (std::size_t j = 0; j < nr(); ++j) {
      res.feasibility = std::max(res.feasibility, u[j] - cap_[j]);
      if (nu[j] <= 0.0) continue;
      double influence = 0.0;
      for (auto [k, d] : res_cls_[j]) influence = std::max(influence, nu[j] * d / p[k]);
      res.complementary_slackness =
          std::max(res.complementary_slackness, influence * std::abs(cap_[j] - u[j]) / cap_[j]);
    }
    return res;
  }

  // Uniform prices scaled so the most loaded resource is exactly at capacity.
  std::vector<double> cold_start() const {
    std::vector<double> ones(nr(), 1.0), p, phi, u;
    price_sums(ones, p);
    rates(p, phi);
    usage(phi, u);
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < nr(); ++j) worst = std::max(worst, std::log(u[j] / cap_[j]));
    const double scale = std::exp(std::clamp(alpha_ * worst, -600.0, 600.0));
    return std::vector<double>(nr(), scale);
  }

  std::vector<double> warm_start(const std::vector<double>& full) const {
    if (full.size() != inst_.num_resources()) return cold_start();
    std::vector<double> nu(nr());
    for (std::size_t j = 0; j < nr(); ++j) nu[j] = std::max(0.0, full[resources_[j]]);
    std::vector<double> p;
    price_sums(nu, p);
    for (double x : p)
      if (!(x > 0.0) || !std::isfinite(x)) return cold_start();
    return nu;
  }

  // Drops prices too small to influence any rate on a slack resource.
  void prune(std::vector<double>& nu, const std::vector<double>& p, const std::vector<double>& u) const {
    for (std::size_t j = 0; j < nr(); ++j) {
      if (nu[j] <= 0.0 || u[j] >= cap_[j]) continue;
      bool negligible = true;
      for (auto [k, d] : res_cls_[j]) negligible = negligible && nu[j] * d <= 1e-13 * p[k];
      if (negligible) nu[j] = 0.0;
    }
  }

  // Hessian of G over the active resources.
  Eigen::MatrixXd hessian(const std::vector<double>& p, const std::vector<double>& phi,
                          const std::vector<bool>& active) const {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(nr(), nr());
    for (std::size_t k = 0; k < nc(); ++k) {
      const double w = phi[k] / (alpha_ * p[k]);
      for (auto [i, di] : cls_res_[k]) {
        if (!active[i]) continue;
        for (auto [j, dj] : cls_res_[k])
          if (active[j]) h(i, j) += w * di * dj;
      }
    }
    return h;
  }

  SolveResult finish(const std::vector<double>& nu, std::size_t iterations, bool converged) const {
    SolveResult out;
    out.iterations = iterations;
    out.converged = converged;
    out.allocation.rates.assign(inst_.num_classes(), 0.0);
    out.allocation.prices.assign(inst_.num_resources(), 0.0);
    std::vector<double> p, phi, u;
    price_sums(nu, p);
    rates(p, phi);
    usage(phi, u);
    for (std::size_t k = 0; k < nc(); ++k) out.allocation.rates[classes_[k]] = phi[k];
    for (std::size_t j = 0; j < nr(); ++j) out.allocation.prices[resources_[j]] = nu[j];
    out.residuals = residuals(nu, p, u);
    for (std::size_t k = 0; k < nc(); ++k) {
      const double expect = rate(k, p[k]);
      out.residuals.stationarity =
          std::max(out.residuals.stationarity, std::abs(phi[k] - expect) / phi[k]);
    }
    return out;
  }

  SolveResult solve_newton(std::vector<double> nu, const SolverOptions& opts) const;
  SolveResult solve_multiplicative(std::vector<double> nu, const SolverOptions& opts) const;

 private:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  const Instance& inst_;
  double alpha_;
  bool log_form_;
  std::vector<std::size_t> classes_;
  std::vector<double> weight_;
  std::vector<std::size_t> resources_;
  std::vector<double> cap_;
  std::vector<std::vector<Entry>> cls_res_;
  std::vector<std::vector<Entry>> res_cls_;
};

SolveResult DualProblem::solve_newton(std::vector<double> nu, const SolverOptions& opts) const {
  // Damped Newton (Levenberg-Marquardt) on the dual. Increases are applied
  // additively, decreases multiplicatively (nu * exp(dnu / nu)) so prices stay
  // non-negative; the damping acts on the Jacobi-scaled Hessian.
  constexpr double kMinLogStep = -30.0;
  constexpr double kMinDamping = 1e-12;
  constexpr double kMaxDamping = 1e15;
  std::vector<double> p, phi, u, dnu(nr()), trial(nr()), tp, tphi, tu;
  std::vector<bool> active(nr());
  double mu = kMinDamping;

  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    price_sums(nu, p);
    rates(p, phi);
    usage(phi, u);
    const Residuals res = residuals(nu, p, u);
    if (done(res, opts.tolerance)) return finish(nu, it, true);

    const std::vector<double> before = nu;
    prune(nu, p, u);
    if (nu != before) {
      price_sums(nu, p);
      rates(p, phi);
      usage(phi, u);
    }

    Eigen::VectorXd g(nr());
    for (std::size_t j = 0; j < nr(); ++j) {
      active[j] = nu[j] > 0.0 || u[j] > cap_[j];
      g(j) = active[j] ? cap_[j] - u[j] : 0.0;
    }
    Eigen::MatrixXd h = hessian(p, phi, active);
    Eigen::VectorXd scale(nr()), gs(nr());
    Eigen::MatrixXd hs;
    auto rescale = [&] {
      for (std::size_t j = 0; j < nr(); ++j) scale(j) = h(j, j) > 0.0 ? 1.0 / std::sqrt(h(j, j)) : 0.0;
      hs = scale.asDiagonal() * h * scale.asDiagonal();
      gs = scale.asDiagonal() * g;
    };
    rescale();
    // A zero price whose Newton component points down stays at zero and must
    // not drag the other components along. Damped, since resources used by
    // the same single class make the Hessian singular.
    for (bool changed = true; changed;) {
      changed = false;
      Eigen::MatrixXd a = hs;
      a.diagonal().array() += std::max(mu, 1e-10);
      const Eigen::VectorXd raw = scale.asDiagonal() * a.ldlt().solve(-gs);
      for (std::size_t j = 0; j < nr(); ++j)
        if (active[j] && nu[j] == 0.0 && !(raw(j) > 0.0)) {
          active[j] = false;
          g(j) = 0.0;
          changed = true;
        }
      if (changed) {
        h = hessian(p, phi, active);
        rescale();
      }
    }
    double magnitude = 0.0;
    for (std::size_t j = 0; j < nr(); ++j) magnitude += cap_[j] * nu[j];

    bool accepted = false;
    while (!accepted) {
      if (mu > kMaxDamping) return finish(nu, it, false);
      Eigen::MatrixXd a = hs;
      a.diagonal().array() += mu;
      const Eigen::VectorXd raw = scale.asDiagonal() * a.ldlt().solve(-gs);
      Eigen::VectorXd step(nr());
      for (std::size_t j = 0; j < nr(); ++j) {
        double d = std::isfinite(raw(j)) ? raw(j) : 0.0;
        if (d < 0.0) d = nu[j] * std::expm1(std::max(d / nu[j], kMinLogStep));
        step(j) = d;
        dnu[j] = d;
      }
      const double slope = g.dot(step);
      if (!(slope < 0.0)) {
        mu = std::max(mu * 10.0, 1e-8);
        continue;
      }
      const double predicted = slope + 0.5 * step.dot(h * step);
      const double change = dual_change(p, dnu);
      const double ratio = predicted < 0.0 ? change / predicted : (change < 0.0 ? 1.0 : 0.0);
      for (std::size_t j = 0; j < nr(); ++j) trial[j] = std::max(0.0, nu[j] + dnu[j]);
      if (ratio >= 1e-4) {
        accepted = true;
      } else {
        // Near the optimum the decrease drowns in rounding; accept a step
        // that at least halves the residual.
        price_sums(trial, tp);
        rates(tp, tphi);
        usage(tphi, tu);
        accepted = change <= 1e-12 * magnitude && error(residuals(trial, tp, tu)) <= 0.5 * error(res);
      }
      if (ratio > 0.75)
        mu = std::max(mu * 0.25, kMinDamping);
      else if (ratio < 0.25)
        mu = std::max(mu * 4.0, 1e-8);
    }
    nu.swap(trial);
  }
  return finish(nu, opts.max_iterations, false);
}

SolveResult DualProblem::solve_multiplicative(std::vector<double> nu,
                                              const SolverOptions& opts) const {
  std::vector<double> p, phi, u;
  double kappa = alpha_;
  double last = std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    price_sums(nu, p);
    rates(p, phi);
    usage(phi, u);
    const Residuals res = residuals(nu, p, u);
    const double err = std::max(res.feasibility, res.complementary_slackness);
    if (done(res, opts.tolerance)) return finish(nu, it, true);
    if (err > last) kappa = std::max(kappa * 0.5, 1e-6);  // oscillation
    last = err;
    prune(nu, p, u);
    for (std::size_t j = 0; j < nr(); ++j)
      if (nu[j] > 0.0) nu[j] *= std::exp(kappa * std::log(u[j] / cap_[j]));
  }
  return finish(nu, opts.max_iterations, false);
}

void check_common(const Instance& inst, const ClassWeights& q, double alpha) {
  if (q.q.size() != inst.num_classes())
    throw SolverError("weight vector size does not match class count");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw SolverError("alpha must be positive");
  if (!q.any_positive()) throw SolverError("all-zero weights");
}

}  // namespace

SolveResult solve_alpha_scs(const Instance& inst, const ClassWeights& q, double alpha,
                            const std::vector<double>& capacities, const SolverOptions& opts,
                            const std::vector<double>* warm_prices) {
  check_common(inst, q, alpha);
  if (capacities.size() != inst.num_resources())
    throw SolverError("capacity vector size does not match resource count");
  for (double b : capacities)
    if (!(b >= 0.0) || !std::isfinite(b)) throw SolverError("negative capacity");
  if (!(opts.tolerance > 0.0) || opts.max_iterations < 1)
    throw SolverError("invalid solver options");

  const DualProblem problem(inst, q, alpha, capacities, opts);
  if (problem.nc() == 0) return problem.finish({}, 0, true);
  std::vector<double> nu = warm_prices ? problem.warm_start(*warm_prices) : problem.cold_start();
  return opts.method == DualMethod::newton ? problem.solve_newton(std::move(nu), opts)
                                           : problem.solve_multiplicative(std::move(nu), opts);
}

SolveResult solve_alpha_scs(const Instance& inst, const ClassWeights& q, double alpha,
                            const SolverOptions& opts, const std::vector<double>* warm_prices) {
  return solve_alpha_scs(inst, q, alpha, std::vector<double>(inst.num_resources(), 1.0), opts,
                         warm_prices);
}

SolveResult class_alpha_fair(const Instance& inst, const ClassWeights& q, double alpha,
                             const SolverOptions& opts) {
  check_common(inst, q, alpha);
  // q_c phi^(1-a)/(1-a) == q'_c (phi/q'_c)^(1-a)/(1-a) with q'_c = q_c^(1/a).
  ClassWeights scaled = q;
  for (double& x : scaled.q) x = x > 0.0 ? std::pow(x, 1.0 / alpha) : 0.0;
  return solve_alpha_scs(inst, scaled, alpha, opts);
}

ClassWeights restrict_to_slice(const Instance& inst, const ClassWeights& q, std::size_t slice) {
  ClassWeights out{std::vector<double>(inst.num_classes(), 0.0), q.policy};
  for (std::size_t c : inst.classes_of(slice)) out.q[c] = q.q[c];
  return out;
}

PartitionResult static_partition(const Instance& inst, const ClassWeights& q, double alpha,
                                 const SolverOptions& opts) {
  if (q.q.size() != inst.num_classes())
    throw SolverError("weight vector size does not match class count");
  PartitionResult out;
  out.combined.rates.assign(inst.num_classes(), 0.0);
  for (std::size_t v = 0; v < inst.num_slices(); ++v) {
    ClassWeights own = restrict_to_slice(inst, q, v);
    SolveResult res;
    if (!own.any_positive()) {
      res.allocation.rates.assign(inst.num_classes(), 0.0);
      res.allocation.prices.assign(inst.num_resources(), 0.0);
      res.converged = true;
    } else {
      res = solve_alpha_scs(inst, own, alpha, std::vector<double>(inst.num_resources(), inst.share(v)),
                            opts);
    }
    for (std::size_t c : inst.classes_of(v)) out.combined.rates[c] = res.allocation.rates[c];
    out.converged = out.converged && res.converged;
    out.per_slice.push_back(std::move(res));
  }
  return out;
}

}  // namespace slicing
