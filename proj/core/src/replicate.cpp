#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>

#include "slicing/sim.hpp"

namespace slicing::sim {

std::vector<NamedValue> flatten(const Instance& inst, const Metrics& m) {
  std::vector<NamedValue> out;
  const std::size_t nv = inst.num_slices();
  for (std::size_t v = 0; v < nv; ++v)
    out.push_back({"delay_" + inst.slice_id(v), v < m.slices.size() ? m.slices[v].mean_delay : 0.0});
  for (std::size_t v = 0; v < nv; ++v)
    out.push_back({"throughput_" + inst.slice_id(v), v < m.slices.size() ? m.slices[v].mean_throughput : 0.0});
  out.push_back({"mean_delay", m.mean_delay});
  out.push_back({"mean_throughput", m.mean_throughput});
  auto frac = [&](std::size_t k) { return k < m.busy_fractions.size() ? m.busy_fractions[k] : 0.0; };
  double several = 0.0;
  for (std::size_t k = 2; k < m.busy_fractions.size(); ++k) several += m.busy_fractions[k];
  out.push_back({"frac_idle", frac(0)});
  out.push_back({"frac_one_busy", frac(1)});
  out.push_back({"frac_both_busy", several});
  out.push_back({"mean_population", m.mean_population});
  out.push_back({"departures", static_cast<double>(m.departures)});
  return out;
}

Summary summarize(std::string name, const std::vector<double>& xs) {
  Summary s;
  s.name = std::move(name);
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    s.half_width = 1.96 * sd / std::sqrt(static_cast<double>(xs.size()));
  }
  return s;
}

const Summary& EngineReplication::field(std::string_view name) const {
  for (const Summary& s : summary)
    if (s.name == name) return s;
  throw std::out_of_range("no metrics field '" + std::string(name) + "'");
}

std::vector<EngineReplication> replicate(const Scenario& scenario, const std::vector<Engine>& engines,
                                         const std::vector<std::uint64_t>& seeds,
                                         unsigned max_threads) {
  if (seeds.size() < 2) throw std::invalid_argument("replicate needs at least two seeds");
  const std::size_t jobs = engines.size() * seeds.size();
  std::vector<Metrics> results(jobs);
  std::vector<std::exception_ptr> errors(jobs);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs; j = next++) {
      try {
        Scenario sc = scenario;
        sc.engine = engines[j / seeds.size()];
        sc.seed = seeds[j % seeds.size()];
        sc.record_trace = false;
        results[j] = run_simulation(sc);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    }
  };
  unsigned threads = max_threads != 0 ? max_threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, jobs));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<EngineReplication> out;
  for (std::size_t e = 0; e < engines.size(); ++e) {
    EngineReplication rep;
    rep.engine = engines[e];
    rep.seeds = seeds;
    for (std::size_t k = 0; k < seeds.size(); ++k) rep.runs.push_back(std::move(results[e * seeds.size() + k]));
    const auto names = flatten(scenario.instance, rep.runs.front());
    for (std::size_t f = 0; f < names.size(); ++f) {
      std::vector<double> xs;
      for (const Metrics& m : rep.runs) xs.push_back(flatten(scenario.instance, m)[f].value);
      rep.summary.push_back(summarize(names[f].name, xs));
    }
    out.push_back(std::move(rep));
  }
  return out;
}

}  // namespace slicing::sim
