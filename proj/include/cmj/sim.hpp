#ifndef CMJ_SIM_HPP
#define CMJ_SIM_HPP

#include <cstddef>
#include <cstdint>
#include <exception>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cmj/model.hpp"
#include "cmj/rng.hpp"

namespace cmj {

using ClusterId = std::uint32_t;

/// One cluster of the epidemic. Clusters are numbered densely in birth order;
/// id 0 is the ancestral cluster.
struct ClusterRecord {
  ClusterId id = 0;
  std::optional<ClusterId> parent_id;
  std::uint32_t generation = 0;  ///< untraceable edges back to the ancestor
  double birth_time = 0.0;
  std::optional<double> isolation_age;     ///< zeta_u, set once isolated
  std::optional<std::uint64_t> final_size;  ///< C_u(zeta_u-), set once isolated
  std::vector<double> child_birth_ages;     ///< atoms of xi_u
  std::uint64_t current_size = 1;           ///< 0 once isolated

  bool isolated() const { return isolation_age.has_value(); }
  std::optional<double> isolation_time() const {
    if (!isolation_age) return std::nullopt;
    return birth_time + *isolation_age;
  }
};

enum class EventKind : std::uint8_t { TraceableGrowth, UntraceableBirth, Isolation };

std::string_view to_string(EventKind kind);

/// A single transition of the process.
///  - TraceableGrowth: `cluster` grew to `size`.
///  - UntraceableBirth: `cluster` (the parent) begot cluster `child`.
///  - Isolation: `cluster` was isolated at size `size`.
struct Event {
  double time = 0.0;
  EventKind kind = EventKind::TraceableGrowth;
  ClusterId cluster = 0;
  ClusterId child = 0;
  std::uint64_t size = 0;

  friend bool operator==(const Event&, const Event&) = default;
};

enum class StopReason { Extinction, TimeLimit, PopulationCap, ClusterCap, EventLimit };

std::string_view to_string(StopReason reason);

/// Bounds on a run. A supercritical (or detection-free) run needs at least one.
///
/// max_generation restricts the process to clusters of generation at most
/// that value: untraceable contaminations by clusters at the cap are dropped
/// (counted in Trace::suppressed_births). By the branching property the
/// retained clusters keep their exact law.
struct StopCondition {
  std::optional<double> t_max;
  std::optional<std::uint64_t> max_individuals;  ///< cumulative infected
  std::optional<std::uint64_t> max_clusters;     ///< clusters ever born
  std::optional<std::uint64_t> max_events;
  std::optional<std::uint32_t> max_generation;

  bool bounded() const {
    return t_max || max_individuals || max_clusters || max_events || max_generation;
  }
};

struct Trace {
  Parameters params;
  std::uint64_t seed = 0;
  StopCondition stop;
  std::vector<Event> events;
  std::vector<ClusterRecord> clusters;
  StopReason stop_reason = StopReason::Extinction;
  double end_time = 0.0;
  std::uint64_t suppressed_births = 0;

  std::uint64_t cumulative_infected() const;
};

/// Exact (Gillespie) realization of the epidemic started from one contagious
/// individual at time 0. Deterministic in (params, seed, stop).
Trace simulate(const Parameters& params, std::uint64_t seed, const StopCondition& stop);

/// Cluster-level state at a given time, reconstructed from the event log.
struct Snapshot {
  double time = 0.0;
  std::vector<std::uint64_t> active_sizes;    ///< one entry per active cluster, ascending
  std::vector<std::uint64_t> isolated_sizes;  ///< sizes at detection, ascending
  std::uint64_t contagious = 0;
  std::uint64_t isolated_individuals = 0;
  std::uint64_t cumulative_infected = 0;
};

Snapshot snapshot(const Trace& trace, double t);

/// Forward replay of an event log. Maintains per-cluster sizes and the
/// histograms of active sizes and of sizes at isolation.
class Replayer {
 public:
  explicit Replayer(const Trace& trace);

  /// Apply every event with time <= t. Times must be nondecreasing across calls.
  void advance_to(double t);
  /// Apply the next event; false when the log is exhausted.
  bool step();

  std::size_t position() const { return next_; }
  std::uint64_t contagious() const { return contagious_; }
  std::uint64_t isolated_individuals() const { return isolated_individuals_; }
  std::uint64_t cumulative_infected() const { return contagious_ + isolated_individuals_; }
  std::size_t active_clusters() const { return active_clusters_; }
  std::size_t isolated_clusters() const { return isolated_clusters_; }
  /// active_histogram()[k] = number of active clusters of size k (index 0 unused).
  const std::vector<std::uint64_t>& active_histogram() const { return active_hist_; }
  const std::vector<std::uint64_t>& isolated_histogram() const { return isolated_hist_; }
  const std::vector<std::uint64_t>& sizes() const { return sizes_; }
  const std::vector<bool>& isolated_flags() const { return isolated_; }

 private:
  void bump(std::vector<std::uint64_t>& hist, std::uint64_t k, bool up);

  const Trace* trace_;
  std::size_t next_ = 0;
  std::vector<std::uint64_t> sizes_;
  std::vector<bool> isolated_;
  std::vector<std::uint64_t> active_hist_;
  std::vector<std::uint64_t> isolated_hist_;
  std::uint64_t contagious_ = 1;
  std::uint64_t isolated_individuals_ = 0;
  std::size_t active_clusters_ = 1;
  std::size_t isolated_clusters_ = 0;
};

/// Per-replicate digest, enough for survival and size statistics.
struct TraceSummary {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  StopReason stop_reason = StopReason::Extinction;
  double end_time = 0.0;
  std::size_t n_events = 0;
  std::size_t n_clusters = 0;
  std::size_t n_isolated_clusters = 0;
  std::uint64_t cumulative_infected = 0;
  std::uint64_t contagious_at_end = 0;

  bool survived() const { return contagious_at_end > 0; }
  friend bool operator==(const TraceSummary&, const TraceSummary&) = default;
};

TraceSummary summarize(const Trace& trace, std::size_t index);

/// Raised from a batch when one replicate fails; carries the replicate index.
class ReplicateError : public std::runtime_error {
 public:
  ReplicateError(std::size_t index, const std::string& what)
      : std::runtime_error("replicate " + std::to_string(index) + ": " + what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

enum class Execution { Serial, Parallel };

/// Runs replicate i with seed derive_seed(seed_base, i) and stores fn(trace, i)
/// at position i. Replicates share no mutable state, so the result does not
/// depend on the execution policy or on the thread schedule.
template <class Fn>
auto map_replicates(const Parameters& params, std::uint64_t seed_base, std::size_t n,
                    const StopCondition& stop, Fn fn, Execution exec = Execution::Parallel)
    -> std::vector<decltype(fn(std::declval<const Trace&>(), std::size_t{}))> {
  using Result = decltype(fn(std::declval<const Trace&>(), std::size_t{}));
  if (n < 1) throw std::invalid_argument("map_replicates: n must be >= 1");
  std::vector<Result> results(n);
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<std::int64_t>(n);
  auto run_one = [&](std::int64_t i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      const Trace trace = simulate(params, derive_seed(seed_base, idx), stop);
      results[idx] = fn(trace, idx);
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  };
  if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t i = 0; i < count; ++i) run_one(i);
  } else {
    for (std::int64_t i = 0; i < count; ++i) run_one(i);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw ReplicateError(i, e.what());
    }
  }
  return results;
}

/// n independent runs summarized; OpenMP over replicates.
std::vector<TraceSummary> replicate_batch(const Parameters& params, std::uint64_t seed_base,
                                          std::size_t n, const StopCondition& stop);
/// Serial reference for replicate_batch.
std::vector<TraceSummary> replicate_batch_serial(const Parameters& params, std::uint64_t seed_base,
                                                 std::size_t n, const StopCondition& stop);

}  // namespace cmj

#endif  // CMJ_SIM_HPP
