#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "slicing/sim.hpp"

namespace slicing::sim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kCacheLimit = 100000;

std::size_t busy_slices(const Instance& inst, const std::vector<std::int64_t>& counts) {
  std::size_t k = 0;
  for (std::size_t v = 0; v < inst.num_slices(); ++v) {
    for (std::size_t c : inst.classes_of(v)) {
      if (counts[c] > 0) {
        ++k;
        break;
      }
    }
  }
  return k;
}

}  // namespace

std::optional<Engine> Engine::from_name(std::string_view name, double alpha) {
  Engine e;
  e.name = std::string(name);
  e.alpha = alpha;
  if (name == "scs") {
    e.allocator = Allocator::alpha_scs;
  } else if (name == "maxmin-scs") {
    e.allocator = Allocator::waterfill;
  } else if (name == "drf") {
    e.weights = WeightPolicy::drf;
  } else if (name == "dps") {
    e.weights = WeightPolicy::dps;
  } else if (name == "static-partition") {
    e.allocator = Allocator::static_partition;
  } else if (name == "drf-dps") {
    e.weights = WeightPolicy::drf_unconstrained;
  } else {
    return std::nullopt;
  }
  return e;
}

std::string Engine::label() const { return name; }

void Scenario::check() const {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ModelError("horizon must be positive");
  if (!(warmup >= 0.0 && warmup < 1.0)) throw ModelError("warmup fraction must lie in [0, 1)");
  if (!(engine.alpha > 0.0)) throw ModelError("alpha must be positive");
  if (engine.weights == WeightPolicy::equal_intra_class) {
    if (engine.class_weights.size() != instance.num_classes())
      throw ModelError("exogenous weights need one entry per class");
    for (double w : engine.class_weights)
      if (!(w >= 0.0) || !std::isfinite(w)) throw ModelError("exogenous weights must be non-negative");
  }
  double last = 0.0;
  for (const auto& a : script) {
    if (a.cls >= instance.num_classes()) throw ModelError("scripted arrival for unknown class");
    if (!(a.time >= last)) throw ModelError("scripted arrivals must be sorted by time");
    if (!(a.workload > 0.0)) throw ModelError("scripted workload must be positive");
    last = a.time;
  }
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::stable: return "consistent-with-stable";
    case Verdict::growing: return "growing";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

Verdict classify_growth(double second_quarter, double fourth_quarter) {
  if (fourth_quarter <= kStableRatio * second_quarter) return Verdict::stable;
  if (fourth_quarter >= kGrowingRatio * second_quarter) return Verdict::growing;
  return Verdict::inconclusive;
}

Simulator::Simulator(Scenario scenario) : sc_(std::move(scenario)) {
  sc_.check();
  const std::size_t nc = inst().num_classes();
  const std::size_t nv = inst().num_slices();
  pop_.counts.assign(nc, 0);
  virtual_service_.assign(nc, 0.0);
  per_user_rate_.assign(nc, 0.0);
  heaps_.resize(nc);
  next_arrival_.assign(nc, kInf);
  for (std::size_t c = 0; c < nc; ++c) {
    arrival_rng_.emplace_back(derive_seed(sc_.seed, "arrival", c));
    workload_rng_.emplace_back(derive_seed(sc_.seed, "workload", c));
  }
  resample_rng_ = Rng(derive_seed(sc_.seed, "resample", 0));
  if (sc_.script.empty()) {
    for (std::size_t c = 0; c < nc; ++c) schedule_arrival(c);
  }

  slice_pop_integral_.assign(nv, 0.0);
  busy_time_.assign(nv + 1, 0.0);
  slice_delay_sum_.assign(nv, 0.0);
  slice_tput_sum_.assign(nv, 0.0);
  slice_departures_.assign(nv, 0);
  bucket_integral_.assign(kBuckets, 0.0);

  if (sc_.horizon_unit == HorizonUnit::time) {
    window_open_ = true;
    window_start_ = sc_.warmup * sc_.horizon;
    window_end_ = sc_.horizon;
    bucket_width_ = (window_end_ - window_start_) / static_cast<double>(kBuckets);
  } else {
    open_after_ = static_cast<std::int64_t>(std::ceil(sc_.warmup * sc_.horizon));
    window_open_ = open_after_ == 0;
    window_start_ = 0.0;
    window_end_ = kInf;
    double rate = 0.0;
    for (std::size_t c = 0; c < nc; ++c) rate += inst().user_class(c).arrival_rate;
    const double guess = rate > 0.0 ? sc_.horizon / rate : 1.0;
    bucket_width_ = guess / static_cast<double>(kBuckets);
  }
  if (!(bucket_width_ > 0.0)) bucket_width_ = 1.0;
  reallocate();
}

double Simulator::draw_workload(std::size_t c) {
  const UserClass& uc = inst().user_class(c);
  if (uc.workload == WorkloadDist::deterministic) return uc.mean_workload;
  return workload_rng_[c].exponential(uc.mean_workload);
}

void Simulator::schedule_arrival(std::size_t c) {
  const double rate = inst().user_class(c).arrival_rate;
  if (rate <= 0.0) {
    next_arrival_[c] = kInf;
    return;
  }
  const double base = std::isfinite(next_arrival_[c]) ? next_arrival_[c] : 0.0;
  next_arrival_[c] = base + arrival_rng_[c].exponential(1.0 / rate);
}

std::optional<Simulator::Event> Simulator::next_event() const {
  if (finished_) return std::nullopt;
  if (sc_.horizon_unit == HorizonUnit::departures &&
      departures_total_ >= static_cast<std::int64_t>(sc_.horizon))
    return std::nullopt;

  std::optional<Event> dep;
  for (std::size_t c = 0; c < heaps_.size(); ++c) {
    if (heaps_[c].empty() || per_user_rate_[c] <= 0.0) continue;
    const HeapItem& top = heaps_[c].top();
    const double t = now_ + std::max(0.0, top.finish - virtual_service_[c]) / per_user_rate_[c];
    if (!dep || t < dep->time || (t == dep->time && top.id < dep->user))
      dep = Event{t, EventKind::departure, c, top.id};
  }

  std::optional<Event> arr;
  if (!sc_.script.empty()) {
    if (script_pos_ < sc_.script.size()) {
      const auto& a = sc_.script[script_pos_];
      arr = Event{std::max(a.time, now_), EventKind::arrival, a.cls, 0};
    }
  } else {
    for (std::size_t c = 0; c < next_arrival_.size(); ++c) {
      if (std::isfinite(next_arrival_[c]) && (!arr || next_arrival_[c] < arr->time))
        arr = Event{next_arrival_[c], EventKind::arrival, c, 0};
    }
  }

  std::optional<Event> best;
  if (dep && (!arr || dep->time <= arr->time))
    best = dep;
  else
    best = arr;
  if (!best) return std::nullopt;
  if (sc_.horizon_unit == HorizonUnit::time && best->time > sc_.horizon) return std::nullopt;
  return best;
}

void Simulator::add_to_buckets(double a, double b, double population) {
  if (!(b > a) || population == 0.0) return;
  const double ra = a - window_start_;
  const double rb = b - window_start_;
  while (rb > bucket_width_ * static_cast<double>(kBuckets)) {
    for (std::size_t i = 0; i < kBuckets / 2; ++i)
      bucket_integral_[i] = bucket_integral_[2 * i] + bucket_integral_[2 * i + 1];
    std::fill(bucket_integral_.begin() + kBuckets / 2, bucket_integral_.end(), 0.0);
    bucket_width_ *= 2.0;
  }
  auto first = static_cast<std::size_t>(ra / bucket_width_);
  auto last = std::min(kBuckets - 1, static_cast<std::size_t>(rb / bucket_width_));
  for (std::size_t i = first; i <= last && i < kBuckets; ++i) {
    const double lo = std::max(ra, bucket_width_ * static_cast<double>(i));
    const double hi = std::min(rb, bucket_width_ * static_cast<double>(i + 1));
    if (hi > lo) bucket_integral_[i] += population * (hi - lo);
  }
}

void Simulator::accumulate(double t0, double t1) {
  if (!window_open_) return;
  const double a = std::max(t0, window_start_);
  const double b = std::min(t1, window_end_);
  if (!(b > a)) return;
  const double len = b - a;
  std::int64_t total = 0;
  for (std::size_t v = 0; v < inst().num_slices(); ++v) {
    const std::int64_t n = pop_.slice_total(inst(), v);
    slice_pop_integral_[v] += static_cast<double>(n) * len;
    total += n;
  }
  pop_integral_ += static_cast<double>(total) * len;
  busy_time_[busy_slices(inst(), pop_.counts)] += len;
  add_to_buckets(a, b, static_cast<double>(total));
}

void Simulator::advance_to(double t) {
  const double dt = t - now_;
  if (dt > 0.0) {
    accumulate(now_, t);
    for (std::size_t c = 0; c < virtual_service_.size(); ++c)
      virtual_service_[c] += per_user_rate_[c] * dt;
  }
  now_ = std::max(now_, t);
}

Simulator::CachedAllocation Simulator::compute_allocation() {
  CachedAllocation out;
  out.rates.assign(inst().num_classes(), 0.0);
  ClassWeights q;
  if (sc_.engine.weights == WeightPolicy::equal_intra_class) {
    q.policy = WeightPolicy::equal_intra_class;
    q.q.assign(inst().num_classes(), 0.0);
    for (std::size_t c = 0; c < q.q.size(); ++c)
      if (pop_.counts[c] > 0) q.q[c] = sc_.engine.class_weights[c];
  } else {
    q = policy_weights(inst(), pop_, sc_.engine.weights);
  }
  if (!q.any_positive()) return out;
  try {
    switch (sc_.engine.allocator) {
      case Allocator::alpha_scs: {
        const SolveResult r = solve_alpha_scs(inst(), q, sc_.engine.alpha, sc_.solver,
                                              warm_prices_.empty() ? nullptr : &warm_prices_);
        if (!r.converged) throw SimulationError("alpha-SCS did not converge", events_);
        out.rates = r.rates();
        out.prices = r.prices();
        warm_prices_ = out.prices;
        break;
      }
      case Allocator::waterfill: {
        const SolveResult r = maxmin_waterfill(inst(), q);
        out.rates = r.rates();
        out.prices = r.prices();
        break;
      }
      case Allocator::static_partition: {
        const PartitionResult r = static_partition(inst(), q, sc_.engine.alpha, sc_.solver);
        if (!r.converged) throw SimulationError("static partition did not converge", events_);
        out.rates = r.combined.rates;
        break;
      }
    }
  } catch (const SolverError& e) {
    throw SimulationError(e.what(), events_);
  }
  return out;
}

void Simulator::reallocate() {
  auto it = cache_.find(pop_.counts);
  if (it == cache_.end()) {
    CachedAllocation fresh = compute_allocation();
    fresh.id = alloc_counter_++;
    if (cache_.size() >= kCacheLimit) cache_.clear();
    it = cache_.emplace(pop_.counts, std::move(fresh)).first;
  }
  current_ = &it->second;
  for (std::size_t c = 0; c < per_user_rate_.size(); ++c)
    per_user_rate_[c] = pop_.counts[c] > 0 ? current_->rates[c] / static_cast<double>(pop_.counts[c]) : 0.0;
}

void Simulator::resample_residuals() {
  std::vector<std::vector<HeapItem>> items(heaps_.size());
  for (auto& [id, u] : users_) {
    const UserClass& uc = inst().user_class(u.cls);
    if (uc.workload == WorkloadDist::exponential)
      u.finish = virtual_service_[u.cls] + resample_rng_.exponential(uc.mean_workload);
    items[u.cls].push_back({u.finish, id});
  }
  for (std::size_t c = 0; c < heaps_.size(); ++c)
    heaps_[c] = MinHeap(std::greater<HeapItem>(), std::move(items[c]));
}

bool Simulator::step() {
  const std::optional<Event> ev = next_event();
  if (!ev) {
    if (!finished_) {
      if (sc_.horizon_unit == HorizonUnit::time) {
        advance_to(sc_.horizon);
      } else {
        window_end_ = now_;
      }
      finished_ = true;
    }
    return false;
  }

  advance_to(ev->time);
  const std::size_t c = ev->cls;
  if (ev->kind == EventKind::departure) {
    const HeapItem top = heaps_[c].top();
    heaps_[c].pop();
    virtual_service_[c] = std::max(virtual_service_[c], top.finish);
    const auto node = users_.find(top.id);
    const User u = node->second;
    users_.erase(node);
    --pop_.counts[c];
    ++departures_total_;
    const bool counted = window_open_ && now_ >= window_start_ && now_ <= window_end_;
    if (counted) {
      const double sojourn = now_ - u.arrival;
      const std::size_t v = inst().slice_of(c);
      slice_delay_sum_[v] += sojourn;
      slice_tput_sum_[v] += u.workload / sojourn;
      ++slice_departures_[v];
      if (sc_.record_sojourns) sojourns_.push_back(sojourn);
    }
    if (sc_.horizon_unit == HorizonUnit::departures) {
      if (!window_open_ && departures_total_ == open_after_) {
        window_open_ = true;
        window_start_ = now_;
      }
      if (departures_total_ >= static_cast<std::int64_t>(sc_.horizon)) window_end_ = now_;
    }
  } else {
    double workload;
    if (!sc_.script.empty()) {
      workload = sc_.script[script_pos_++].workload;
    } else {
      workload = draw_workload(c);
      schedule_arrival(c);
    }
    const std::uint64_t id = next_user_++;
    users_.emplace(id, User{c, now_, workload, virtual_service_[c] + workload});
    heaps_[c].push({virtual_service_[c] + workload, id});
    ++pop_.counts[c];
    ++arrivals_;
  }
  if (sc_.residuals == ResidualMode::resampled) resample_residuals();
  reallocate();
  ++events_;
  if (sc_.record_trace)
    trace_.events.push_back({now_, ev->kind, c, pop_.counts, current_->id});
  if (sc_.horizon_unit == HorizonUnit::departures &&
      departures_total_ >= static_cast<std::int64_t>(sc_.horizon)) {
    finished_ = true;
  }
  return true;
}

void Simulator::run() {
  while (step()) {
  }
}

std::optional<double> Simulator::residual(std::uint64_t user) const {
  const auto it = users_.find(user);
  if (it == users_.end()) return std::nullopt;
  return std::max(0.0, it->second.finish - virtual_service_[it->second.cls]);
}

Metrics Simulator::metrics() const {
  Metrics m;
  const std::size_t nv = inst().num_slices();
  m.arrivals = arrivals_;
  m.total_departures = departures_total_;
  m.events = events_;
  m.distinct_allocations = alloc_counter_;
  if (window_open_) {
    m.window_start = window_start_;
    m.window_end = std::isfinite(window_end_) ? window_end_ : now_;
  }
  const double len = m.window_end - m.window_start;

  m.slices.resize(nv);
  double delay_sum = 0.0, tput_sum = 0.0;
  for (std::size_t v = 0; v < nv; ++v) {
    SliceMetrics& s = m.slices[v];
    s.departures = slice_departures_[v];
    if (s.departures > 0) {
      s.mean_delay = slice_delay_sum_[v] / static_cast<double>(s.departures);
      s.mean_throughput = slice_tput_sum_[v] / static_cast<double>(s.departures);
    }
    if (len > 0.0) s.mean_population = slice_pop_integral_[v] / len;
    delay_sum += slice_delay_sum_[v];
    tput_sum += slice_tput_sum_[v];
    m.departures += s.departures;
  }
  if (m.departures > 0) {
    m.mean_delay = delay_sum / static_cast<double>(m.departures);
    m.mean_throughput = tput_sum / static_cast<double>(m.departures);
  }

  m.busy_fractions.assign(nv + 1, 0.0);
  if (len > 0.0) {
    m.mean_population = pop_integral_ / len;
    for (std::size_t k = 0; k <= nv; ++k) m.busy_fractions[k] = busy_time_[k] / len;
    for (std::size_t q = 0; q < 4; ++q) {
      const double lo = len * static_cast<double>(q) / 4.0;
      const double hi = len * static_cast<double>(q + 1) / 4.0;
      double integral = 0.0;
      for (std::size_t i = 0; i < kBuckets; ++i) {
        const double b0 = bucket_width_ * static_cast<double>(i);
        const double b1 = b0 + bucket_width_;
        const double overlap = std::min(hi, b1) - std::max(lo, b0);
        if (overlap > 0.0) integral += bucket_integral_[i] * overlap / bucket_width_;
      }
      m.quarter_population[q] = integral / (hi - lo);
    }
  } else {
    m.busy_fractions[0] = 1.0;
  }
  m.verdict = classify_growth(m.quarter_population[1], m.quarter_population[3]);
  m.sojourns = sojourns_;
  return m;
}

Metrics run_simulation(const Scenario& scenario, Trace* trace) {
  Scenario sc = scenario;
  if (trace != nullptr) sc.record_trace = true;
  Simulator sim(std::move(sc));
  sim.run();
  if (trace != nullptr) *trace = sim.trace();
  return sim.metrics();
}

void write_trace(std::ostream& os, const Instance& inst, const Trace& trace) {
  std::string line;
  char buf[64];
  for (const TraceEvent& e : trace.events) {
    std::snprintf(buf, sizeof buf, "%.9f,", e.time);
    line = buf;
    line += e.kind == EventKind::arrival ? "arrival," : "departure,";
    line += inst.user_class(e.cls).id;
    line += ',';
    for (std::size_t c = 0; c < e.population.size(); ++c) {
      if (c > 0) line += ';';
      line += std::to_string(e.population[c]);
    }
    std::snprintf(buf, sizeof buf, ",%zu\n", e.alloc_id);
    line += buf;
    os << line;
  }
}

std::vector<double> busy_fractions(const Instance& inst, const Trace& trace, double t0, double t1) {
  if (!(t1 > t0)) throw std::invalid_argument("empty window");
  std::vector<double> busy(inst.num_slices() + 1, 0.0);
  std::vector<std::int64_t> counts(inst.num_classes(), 0);
  double prev = -kInf;
  auto add = [&](double a, double b) {
    const double lo = std::max(a, t0);
    const double hi = std::min(b, t1);
    if (hi > lo) busy[busy_slices(inst, counts)] += hi - lo;
  };
  for (const TraceEvent& e : trace.events) {
    add(prev, e.time);
    counts = e.population;
    prev = e.time;
  }
  add(prev, kInf);
  for (double& b : busy) b /= t1 - t0;
  return busy;
}

StabilityReport stability_probe(Scenario scenario, const Engine& engine) {
  StabilityReport out;
  const std::vector<double> loads = scenario.instance.effective_loads();
  for (std::size_t r = 0; r < loads.size(); ++r) {
    if (loads[r] > out.max_effective_load) {
      out.max_effective_load = loads[r];
      out.bottleneck = r;
    }
  }
  scenario.engine = engine;
  scenario.warmup = 0.0;
  out.metrics = run_simulation(scenario);
  out.second_quarter = out.metrics.quarter_population[1];
  out.fourth_quarter = out.metrics.quarter_population[3];
  if (out.second_quarter > 0.0)
    out.ratio = out.fourth_quarter / out.second_quarter;
  else
    out.ratio = out.fourth_quarter > 0.0 ? kInf : 1.0;
  out.verdict = out.metrics.verdict;
  return out;
}

}  // namespace slicing::sim
