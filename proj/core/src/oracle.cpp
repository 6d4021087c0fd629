#include "slicing/oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace slicing::oracle {

namespace {

struct Reduced {
  std::vector<std::size_t> cls;  // weighted classes
  std::vector<std::size_t> res;  // resources they touch
  Eigen::MatrixXd d;             // res x cls demand
};

Reduced reduce(const Instance& inst, const std::vector<double>& q) {
  Reduced out;
  std::vector<bool> used(inst.num_resources(), false);
  for (std::size_t c = 0; c < inst.num_classes(); ++c) {
    if (q[c] <= 0.0) continue;
    out.cls.push_back(c);
    for (std::size_t r = 0; r < inst.num_resources(); ++r) used[r] = used[r] || inst.demand(c, r) > 0.0;
  }
  for (std::size_t r = 0; r < inst.num_resources(); ++r)
    if (used[r]) out.res.push_back(r);
  out.d.resize(out.res.size(), out.cls.size());
  for (std::size_t i = 0; i < out.res.size(); ++i)
    for (std::size_t k = 0; k < out.cls.size(); ++k) out.d(i, k) = inst.demand(out.cls[k], out.res[i]);
  return out;
}

}  // namespace

OracleResult concave_opt(const Instance& inst, const std::vector<double>& q, double alpha,
                         const ConcaveOptions& opts) {
  const Reduced red = reduce(inst, q);
  OracleResult out;
  out.rates.assign(inst.num_classes(), 0.0);
  const auto m = static_cast<Eigen::Index>(red.cls.size());
  const auto nres = static_cast<Eigen::Index>(red.res.size());
  if (m == 0) {
    out.certified = true;
    return out;
  }

  Eigen::VectorXd w(m);  // q^alpha, the utility's coefficient on phi^(1-alpha)
  for (Eigen::Index k = 0; k < m; ++k) w(k) = std::pow(q[red.cls[k]], alpha);

  // Strictly interior start: every resource at most half full.
  Eigen::VectorXd phi(m);
  const Eigen::VectorXd row_sum = red.d.rowwise().sum();
  for (Eigen::Index k = 0; k < m; ++k) {
    double x = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < nres; ++i)
      if (red.d(i, k) > 0.0) x = std::min(x, 0.5 / row_sum(i));
    phi(k) = x;
  }

  auto objective = [&](const Eigen::VectorXd& x, double t, bool& inside) {
    inside = true;
    double f = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) {
      if (!(x(k) > 0.0)) {
        inside = false;
        return 0.0;
      }
      const double u = alpha == 1.0 ? q[red.cls[k]] * std::log(x(k))
                                    : w(k) * std::pow(x(k), 1.0 - alpha) / (1.0 - alpha);
      f += t * u + std::log(x(k));
    }
    const Eigen::VectorXd slack = Eigen::VectorXd::Ones(nres) - red.d * x;
    for (Eigen::Index i = 0; i < nres; ++i) {
      if (!(slack(i) > 0.0)) {
        inside = false;
        return 0.0;
      }
      f += std::log(slack(i));
    }
    return f;
  };

  const double constraints = static_cast<double>(m + nres);
  double t = 1.0;
  std::size_t newton = 0;
  for (;;) {
    // Centering by damped Newton.
    for (;;) {
      if (newton >= opts.max_newton) {
        out.iterations = newton;
        for (Eigen::Index k = 0; k < m; ++k) out.rates[red.cls[k]] = phi(k);
        return out;
      }
      ++newton;
      const Eigen::VectorXd slack = Eigen::VectorXd::Ones(nres) - red.d * phi;
      const Eigen::VectorXd inv_slack = slack.cwiseInverse();
      Eigen::VectorXd grad(m);
      Eigen::MatrixXd hess = -(red.d.transpose() * inv_slack.cwiseAbs2().asDiagonal() * red.d);
      for (Eigen::Index k = 0; k < m; ++k) {
        const double marginal = w(k) * std::pow(phi(k), -alpha);
        grad(k) = t * marginal + 1.0 / phi(k);
        hess(k, k) -= t * alpha * marginal / phi(k) + 1.0 / (phi(k) * phi(k));
      }
      grad -= red.d.transpose() * inv_slack;
      const Eigen::VectorXd step = (-hess).ldlt().solve(grad);
      const double decrement = grad.dot(step);
      if (decrement <= 1e-10) break;

      bool inside = false;
      const double f0 = objective(phi, t, inside);
      double beta = 1.0;
      Eigen::VectorXd next;
      for (; beta > 1e-16; beta *= 0.5) {
        next = phi + beta * step;
        const double f1 = objective(next, t, inside);
        if (!inside) continue;
        if (f1 >= f0 + 0.25 * beta * decrement) break;
      }
      if (beta <= 1e-16 || next == phi) break;  // no progress possible at this precision
      phi = next;
    }
    if (constraints / t < opts.final_gap) break;
    t *= opts.barrier_growth;
  }
  out.certified = true;
  out.iterations = newton;
  for (Eigen::Index k = 0; k < m; ++k) out.rates[red.cls[k]] = phi(k);
  return out;
}

OracleResult maxmin(const Instance& inst, const std::vector<double>& q, double microstep) {
  const Reduced red = reduce(inst, q);
  OracleResult out;
  out.rates.assign(inst.num_classes(), 0.0);
  const auto m = static_cast<Eigen::Index>(red.cls.size());
  const auto nres = static_cast<Eigen::Index>(red.res.size());
  if (m == 0) {
    out.certified = true;
    return out;
  }

  std::vector<double> weight(m), rate(m, 0.0);
  for (Eigen::Index k = 0; k < m; ++k) weight[k] = q[red.cls[k]];
  std::vector<bool> active(m, true);
  std::vector<double> used(nres, 0.0);

  double heaviest = 0.0;
  for (Eigen::Index i = 0; i < nres; ++i) {
    double load = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) load += red.d(i, k) * weight[k];
    heaviest = std::max(heaviest, load);
  }
  const double base_step = microstep / heaviest;

  double level = 0.0;
  std::size_t remaining = static_cast<std::size_t>(m);
  while (remaining > 0) {
    const double h = std::max(base_step, microstep * level);
    // Freeze classes on any resource that cannot absorb one more step.
    bool froze = false;
    for (Eigen::Index i = 0; i < nres; ++i) {
      double growth = 0.0;
      for (Eigen::Index k = 0; k < m; ++k)
        if (active[k]) growth += red.d(i, k) * weight[k];
      if (growth <= 0.0 || 1.0 - used[i] >= h * growth) continue;
      for (Eigen::Index k = 0; k < m; ++k) {
        if (!active[k] || red.d(i, k) <= 0.0) continue;
        active[k] = false;
        --remaining;
        froze = true;
      }
    }
    if (froze) continue;
    level += h;
    ++out.iterations;
    for (Eigen::Index k = 0; k < m; ++k) {
      if (!active[k]) continue;
      rate[k] = weight[k] * level;
      for (Eigen::Index i = 0; i < nres; ++i) used[i] += red.d(i, k) * weight[k] * h;
    }
  }
  out.certified = true;
  for (Eigen::Index k = 0; k < m; ++k) out.rates[red.cls[k]] = rate[k];
  return out;
}

VariationalResult variational_check(const Instance& inst, const std::vector<double>& phi,
                                    const std::vector<double>& q, double alpha,
                                    std::size_t samples, std::uint64_t seed, double threshold) {
  const std::size_t nc = inst.num_classes();
  const std::size_t nr = inst.num_resources();
  std::vector<double> marginal(nc, 0.0);
  for (std::size_t c = 0; c < nc; ++c)
    if (q[c] > 0.0) marginal[c] = std::pow(phi[c] / q[c], -alpha);

  auto usage = [&](const std::vector<double>& x) {
    std::vector<double> u(nr, 0.0);
    for (std::size_t c = 0; c < nc; ++c)
      for (std::size_t r : inst.resources_of(c)) u[r] += inst.demand(c, r) * x[c];
    return u;
  };
  auto feasible = [&](const std::vector<double>& x) {
    for (double v : x)
      if (v < 0.0) return false;
    for (double u : usage(x))
      if (u > 1.0 + 1e-12) return false;
    return true;
  };

  VariationalResult out;
  auto record = [&](const std::vector<double>& x) {
    double lhs = 0.0;
    for (std::size_t c = 0; c < nc; ++c) lhs += marginal[c] * (x[c] - phi[c]);
    out.worst = out.samples == 0 ? lhs : std::max(out.worst, lhs);
    ++out.samples;
    if (lhs > threshold) out.pass = false;
  };
  // Largest fraction of `dir` (at most 1) that keeps phi + s dir feasible.
  auto shrink_to_feasible = [&](const std::vector<double>& dir) -> std::vector<double> {
    std::vector<double> x(nc);
    for (double s = 1.0; s > 1e-12; s *= 0.5) {
      for (std::size_t c = 0; c < nc; ++c) x[c] = phi[c] + s * dir[c];
      if (feasible(x)) return x;
    }
    return {};
  };

  const std::vector<double> u = usage(phi);

  // Push each weighted class alone up to the first constraint.
  for (std::size_t c = 0; c < nc && out.samples < samples; ++c) {
    if (q[c] <= 0.0) continue;
    double room = std::numeric_limits<double>::infinity();
    for (std::size_t r : inst.resources_of(c)) room = std::min(room, (1.0 - u[r]) / inst.demand(c, r));
    if (!(room > 0.0)) continue;
    std::vector<double> x = phi;
    x[c] += room;
    record(x);
  }

  // Transfers between two classes sharing a saturated resource.
  for (std::size_t r = 0; r < nr && out.samples < samples; ++r) {
    if (u[r] < 1.0 - 1e-9) continue;
    const auto& users = inst.users_of(r);
    for (std::size_t i = 0; i < users.size(); ++i) {
      for (std::size_t j = 0; j < users.size(); ++j) {
        const std::size_t a = users[i], b = users[j];
        if (a == b || q[a] <= 0.0 || q[b] <= 0.0 || out.samples >= samples) continue;
        const double amount = 0.5 * phi[b] * inst.demand(b, r);
        std::vector<double> dir(nc, 0.0);
        dir[a] = amount / inst.demand(a, r);
        dir[b] = -amount / inst.demand(b, r);
        auto x = shrink_to_feasible(dir);
        if (!x.empty()) record(x);
      }
    }
  }

  // Random directions of random length.
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::size_t attempts = 0;
  while (out.samples < samples && attempts < 20 * samples + 100) {
    ++attempts;
    std::vector<double> dir(nc, 0.0);
    const double scale = std::abs(unit(rng));
    for (std::size_t c = 0; c < nc; ++c)
      if (q[c] > 0.0) dir[c] = scale * unit(rng) * std::max(phi[c], 1e-6);
    auto x = shrink_to_feasible(dir);
    if (!x.empty()) record(x);
  }
  return out;
}

}  // namespace slicing::oracle
