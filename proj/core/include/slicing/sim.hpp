#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "slicing/engines.hpp"
#include "slicing/model.hpp"
#include "slicing/rng.hpp"

namespace slicing::sim {

enum class Allocator { alpha_scs, waterfill, static_partition };

/// An allocation discipline: how rates are computed from weights, and which
/// weight policy produces the weights from the population.
struct Engine {
  std::string name;
  Allocator allocator = Allocator::waterfill;
  WeightPolicy weights = WeightPolicy::equal_intra_slice;
  double alpha = 1.0;
  /// Exogenous per-class weights, used when `weights` is equal_intra_class;
  /// a class without users gets weight 0.
  std::vector<double> class_weights;

  /// Known names: scs, maxmin-scs, drf, dps, static-partition, drf-dps.
  /// `alpha` is used by scs and static-partition. Returns nullopt for
  /// unknown names.
  static std::optional<Engine> from_name(std::string_view name, double alpha = 1.0);
  std::string label() const;
};

enum class HorizonUnit { time, departures };
enum class ResidualMode { tracked, resampled };

struct ScriptedArrival {
  double time = 0.0;
  std::size_t cls = 0;
  double workload = 1.0;
};

struct Scenario {
  explicit Scenario(Instance inst) : instance(std::move(inst)) {}

  std::string id;
  Instance instance;
  Engine engine;
  double horizon = 1e4;
  HorizonUnit horizon_unit = HorizonUnit::time;
  double warmup = 0.1;  // fraction of the horizon discarded
  std::uint64_t seed = 1;
  /// When non-empty, replaces the Poisson arrival streams.
  std::vector<ScriptedArrival> script;
  /// Resampling exponential residuals at every event is only for checking
  /// memorylessness; the default tracks every residual exactly.
  ResidualMode residuals = ResidualMode::tracked;
  bool record_trace = false;
  bool record_sojourns = false;
  SolverOptions solver;

  void check() const;
};

enum class EventKind { arrival, departure };

struct TraceEvent {
  double time = 0.0;
  EventKind kind = EventKind::arrival;
  std::size_t cls = 0;
  std::vector<std::int64_t> population;  // after the event
  std::size_t alloc_id = 0;
};

struct Trace {
  std::vector<TraceEvent> events;
};

/// One line per event: time,kind,class_id,n_vector,alloc_id with the time
/// printed with nine fractional digits and n_vector joined by ';'.
void write_trace(std::ostream& os, const Instance& inst, const Trace& trace);

/// Time-weighted fractions of [t0, t1] during which k slices are busy
/// (k = 0..V). The population is taken as zero before the first event.
/// Throws std::invalid_argument on an empty window.
std::vector<double> busy_fractions(const Instance& inst, const Trace& trace, double t0, double t1);

enum class Verdict { stable, growing, inconclusive };
const char* to_string(Verdict v);

struct SliceMetrics {
  double mean_delay = 0.0;
  double mean_throughput = 0.0;
  std::int64_t departures = 0;
  double mean_population = 0.0;
};

struct Metrics {
  std::vector<SliceMetrics> slices;
  double mean_delay = 0.0;       // mean sojourn of users departing in the window
  double mean_throughput = 0.0;  // mean of workload / sojourn over the same users
  std::int64_t departures = 0;   // in the window
  std::int64_t arrivals = 0;     // whole run
  std::int64_t total_departures = 0;
  double mean_population = 0.0;  // time average over the window
  std::vector<double> busy_fractions;  // index = number of busy slices
  double window_start = 0.0;
  double window_end = 0.0;
  std::array<double, 4> quarter_population{};  // time-average population per window quarter
  Verdict verdict = Verdict::inconclusive;
  std::size_t events = 0;
  std::size_t distinct_allocations = 0;
  std::vector<double> sojourns;  // only when requested

  double window_length() const { return window_end - window_start; }
};

/// Thrown when an engine fails at some event.
class SimulationError : public std::runtime_error {
 public:
  SimulationError(const std::string& what, std::size_t event_index)
      : std::runtime_error(what), event_index(event_index) {}
  std::size_t event_index;
};

/// Verdict thresholds on mean population, fourth quarter over second quarter.
inline constexpr double kStableRatio = 1.2;
inline constexpr double kGrowingRatio = 2.0;
Verdict classify_growth(double second_quarter, double fourth_quarter);

/// Event-driven simulator of the elastic traffic model. Between events the
/// rates are constant; every user of class c is served at phi_c / n_c.
class Simulator {
 public:
  struct Event {
    double time = 0.0;
    EventKind kind = EventKind::arrival;
    std::size_t cls = 0;
    std::uint64_t user = 0;  // departing user, unused for arrivals
  };

  explicit Simulator(Scenario scenario);

  /// Earliest pending event, or nullopt when the horizon has been reached.
  std::optional<Event> next_event() const;
  /// Applies the next event. Returns false once the run is over.
  bool step();
  void run();

  double now() const { return now_; }
  const PopulationState& population() const { return pop_; }
  /// Aggregate class rates phi_c for the current population.
  const std::vector<double>& class_rates() const { return current_->rates; }
  /// Remaining work of an active user, nullopt if it has left.
  std::optional<double> residual(std::uint64_t user) const;
  std::size_t events() const { return events_; }

  Metrics metrics() const;
  const Trace& trace() const { return trace_; }

 private:
  struct User {
    std::size_t cls = 0;
    double arrival = 0.0;
    double workload = 0.0;
    double finish = 0.0;  // class virtual service at which the user completes
  };
  struct HeapItem {
    double finish;
    std::uint64_t id;
    bool operator>(const HeapItem& o) const {
      return finish != o.finish ? finish > o.finish : id > o.id;
    }
  };
  using MinHeap = std::priority_queue<HeapItem, std::vector<HeapItem>, std::greater<HeapItem>>;
  struct CachedAllocation {
    std::vector<double> rates;
    std::vector<double> prices;
    std::size_t id = 0;
  };

  double draw_workload(std::size_t c);
  void schedule_arrival(std::size_t c);
  void advance_to(double t);
  void accumulate(double t0, double t1);
  void reallocate();
  CachedAllocation compute_allocation();
  void resample_residuals();
  void add_to_buckets(double a, double b, double population);

  Scenario sc_;
  const Instance& inst() const { return sc_.instance; }

  double now_ = 0.0;
  PopulationState pop_;
  std::vector<double> virtual_service_;
  std::vector<double> per_user_rate_;
  std::vector<MinHeap> heaps_;
  std::map<std::uint64_t, User> users_;
  std::uint64_t next_user_ = 0;

  std::vector<Rng> arrival_rng_;
  std::vector<Rng> workload_rng_;
  Rng resample_rng_;
  std::vector<double> next_arrival_;
  std::size_t script_pos_ = 0;

  std::map<std::vector<std::int64_t>, CachedAllocation> cache_;
  std::size_t alloc_counter_ = 0;
  const CachedAllocation* current_ = nullptr;
  std::vector<double> warm_prices_;

  bool finished_ = false;
  std::size_t events_ = 0;
  std::int64_t arrivals_ = 0;
  std::int64_t departures_total_ = 0;

  // Window accounting.
  bool window_open_ = false;
  std::int64_t open_after_ = 0;  // departures discarded in departure-count mode
  double window_start_ = 0.0;
  double window_end_ = 0.0;
  double pop_integral_ = 0.0;
  std::vector<double> slice_pop_integral_;
  std::vector<double> busy_time_;
  std::vector<double> slice_delay_sum_, slice_tput_sum_;
  std::vector<std::int64_t> slice_departures_;
  std::vector<double> sojourns_;

  // Population integral over buckets for the quarter means; buckets are
  // merged pairwise whenever the run outgrows them.
  static constexpr std::size_t kBuckets = 4096;
  double bucket_width_ = 0.0;
  std::vector<double> bucket_integral_;

  Trace trace_;
};

/// Runs one scenario to its horizon.
Metrics run_simulation(const Scenario& scenario, Trace* trace = nullptr);

/// Scalar view of a Metrics value, in CSV column order.
struct NamedValue {
  std::string name;
  double value;
};
std::vector<NamedValue> flatten(const Instance& inst, const Metrics& m);

struct Summary {
  std::string name;
  double mean = 0.0;
  double half_width = 0.0;  // 95% normal-approximation interval
};

struct EngineReplication {
  Engine engine;
  std::vector<std::uint64_t> seeds;
  std::vector<Metrics> runs;          // same order as seeds
  std::vector<Summary> summary;       // same order as flatten()

  const Summary& field(std::string_view name) const;
};

/// Independent runs of `scenario` for every engine and seed. Runs may execute
/// concurrently; results are ordered by (engine, seed). Needs >= 2 seeds.
std::vector<EngineReplication> replicate(const Scenario& scenario, const std::vector<Engine>& engines,
                                         const std::vector<std::uint64_t>& seeds,
                                         unsigned max_threads = 0);

/// Mean and 95% half-width of a sample (normal approximation).
Summary summarize(std::string name, const std::vector<double>& xs);

struct StabilityReport {
  double max_effective_load = 0.0;
  std::size_t bottleneck = 0;
  double second_quarter = 0.0;
  double fourth_quarter = 0.0;
  double ratio = 0.0;
  Verdict verdict = Verdict::inconclusive;
  Metrics metrics;
};

/// Computes max_r sum_c rho_c d_c^r and runs the scenario with `engine`,
/// comparing mean population in the fourth and second quarters of the run
/// (warmup forced to zero so the quarters cover the whole horizon).
StabilityReport stability_probe(Scenario scenario, const Engine& engine);

}  // namespace slicing::sim
