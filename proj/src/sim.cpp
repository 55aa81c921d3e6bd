#include "cmj/sim.hpp"

#include <algorithm>
#include <functional>
#include <limits>

namespace cmj {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::TraceableGrowth:
      return "traceable_growth";
    case EventKind::UntraceableBirth:
      return "untraceable_birth";
    case EventKind::Isolation:
      return "isolation";
  }
  return "unknown";
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::Extinction:
      return "extinction";
    case StopReason::TimeLimit:
      return "time_limit";
    case StopReason::PopulationCap:
      return "population_cap";
    case StopReason::ClusterCap:
      return "cluster_cap";
    case StopReason::EventLimit:
      return "event_limit";
  }
  return "unknown";
}

std::uint64_t Trace::cumulative_infected() const {
  std::uint64_t total = 0;
  for (const auto& c : clusters) total += c.final_size.value_or(c.current_size);
  return total;
}

namespace {

// Contagious individuals, one slot each. A slot stores its cluster and its
// position inside that cluster's member list, so a uniform pick is O(1) and
// isolating a cluster of size k costs O(k log k).
class Population {
 public:
  void add(ClusterId cluster) {
    if (members_.size() <= cluster) members_.resize(cluster + 1);
    const auto slot = static_cast<std::uint32_t>(slot_cluster_.size());
    slot_cluster_.push_back(cluster);
    slot_pos_.push_back(static_cast<std::uint32_t>(members_[cluster].size()));
    members_[cluster].push_back(slot);
  }

  void remove_cluster(ClusterId cluster) {
    auto& own = members_[cluster];
    // Descending slot order: the tail slot moved into a hole never belongs to
    // `cluster`, since all of its higher slots are already gone.
    std::sort(own.begin(), own.end(), std::greater<>());
    for (std::uint32_t slot : own) {
      const auto last = static_cast<std::uint32_t>(slot_cluster_.size() - 1);
      if (slot != last) {
        const ClusterId moved = slot_cluster_[last];
        const std::uint32_t pos = slot_pos_[last];
        slot_cluster_[slot] = moved;
        slot_pos_[slot] = pos;
        members_[moved][pos] = slot;
      }
      slot_cluster_.pop_back();
      slot_pos_.pop_back();
    }
    own.clear();
    own.shrink_to_fit();
  }

  std::uint64_t size() const { return slot_cluster_.size(); }
  ClusterId cluster_at(std::uint64_t slot) const { return slot_cluster_[slot]; }

 private:
  std::vector<ClusterId> slot_cluster_;
  std::vector<std::uint32_t> slot_pos_;
  std::vector<std::vector<std::uint32_t>> members_;
};

}  // namespace

Trace simulate(const Parameters& params, std::uint64_t seed, const StopCondition& stop) {
  const bool explosive = regime(params) == Regime::Supercritical || params.degenerate_delta();
  if (explosive && !stop.bounded()) {
    throw std::invalid_argument("simulate: a stop bound is required for supercritical or detection-free runs");
  }
  if (stop.t_max && !(*stop.t_max >= 0.0)) throw std::invalid_argument("simulate: t_max must be >= 0");

  Trace trace{params, seed, stop, {}, {}, StopReason::Extinction, 0.0, 0};
  Rng rng(seed);
  Population population;

  const double gamma = params.gamma();
  const double delta = params.delta();
  const double per_capita = gamma + delta;
  const double growth_cut = params.p() * gamma;
  const double birth_cut = gamma;

  trace.clusters.push_back(ClusterRecord{});
  population.add(0);
  std::uint64_t infected = 1;
  double t = 0.0;

  if (stop.max_individuals && infected >= *stop.max_individuals) {
    trace.stop_reason = StopReason::PopulationCap;
    return trace;
  }
  if (stop.max_clusters && trace.clusters.size() >= *stop.max_clusters) {
    trace.stop_reason = StopReason::ClusterCap;
    return trace;
  }

  while (population.size() > 0) {
    const double next = t + rng.exponential(per_capita * static_cast<double>(population.size()));
    if (stop.t_max && next > *stop.t_max) {
      trace.stop_reason = StopReason::TimeLimit;
      trace.end_time = *stop.t_max;
      return trace;
    }
    t = next;
    const ClusterId c = population.cluster_at(rng.below(population.size()));
    const double u = rng.uniform() * per_capita;
    ClusterRecord& cluster = trace.clusters[c];

    if (u < growth_cut) {
      ++cluster.current_size;
      population.add(c);
      ++infected;
      trace.events.push_back({t, EventKind::TraceableGrowth, c, 0, cluster.current_size});
    } else if (u < birth_cut) {
      if (stop.max_generation && cluster.generation >= *stop.max_generation) {
        ++trace.suppressed_births;
        continue;
      }
      if (trace.clusters.size() > std::numeric_limits<ClusterId>::max()) {
        throw std::length_error("simulate: cluster id space exhausted");
      }
      const auto child = static_cast<ClusterId>(trace.clusters.size());
      cluster.child_birth_ages.push_back(t - cluster.birth_time);
      ClusterRecord record;
      record.id = child;
      record.parent_id = c;
      record.generation = cluster.generation + 1;
      record.birth_time = t;
      trace.clusters.push_back(std::move(record));  // invalidates `cluster`
      population.add(child);
      ++infected;
      trace.events.push_back({t, EventKind::UntraceableBirth, c, child, 1});
    } else {
      const std::uint64_t size = cluster.current_size;
      cluster.isolation_age = t - cluster.birth_time;
      cluster.final_size = size;
      cluster.current_size = 0;
      population.remove_cluster(c);
      trace.events.push_back({t, EventKind::Isolation, c, 0, size});
    }

    trace.end_time = t;
    if (stop.max_individuals && infected >= *stop.max_individuals) {
      trace.stop_reason = StopReason::PopulationCap;
      return trace;
    }
    if (stop.max_clusters && trace.clusters.size() >= *stop.max_clusters) {
      trace.stop_reason = StopReason::ClusterCap;
      return trace;
    }
    if (stop.max_events && trace.events.size() >= *stop.max_events) {
      trace.stop_reason = StopReason::EventLimit;
      return trace;
    }
  }
  trace.stop_reason = StopReason::Extinction;
  return trace;
}

Replayer::Replayer(const Trace& trace)
    : trace_(&trace),
      sizes_(std::max<std::size_t>(trace.clusters.size(), 1), 0),
      isolated_(sizes_.size(), false),
      active_hist_(2, 0),
      isolated_hist_(1, 0) {
  sizes_[0] = 1;
  active_hist_[1] = 1;
}

void Replayer::bump(std::vector<std::uint64_t>& hist, std::uint64_t k, bool up) {
  if (hist.size() <= k) hist.resize(k + 1, 0);
  if (up) {
    ++hist[k];
  } else {
    --hist[k];
  }
}

bool Replayer::step() {
  if (next_ >= trace_->events.size()) return false;
  const Event& e = trace_->events[next_++];
  switch (e.kind) {
    case EventKind::TraceableGrowth:
      bump(active_hist_, sizes_[e.cluster], false);
      ++sizes_[e.cluster];
      bump(active_hist_, sizes_[e.cluster], true);
      ++contagious_;
      break;
    case EventKind::UntraceableBirth:
      if (sizes_.size() <= e.child) {
        sizes_.resize(e.child + 1, 0);
        isolated_.resize(e.child + 1, false);
      }
      sizes_[e.child] = 1;
      bump(active_hist_, 1, true);
      ++active_clusters_;
      ++contagious_;
      break;
    case EventKind::Isolation: {
      const std::uint64_t k = sizes_[e.cluster];
      bump(active_hist_, k, false);
      bump(isolated_hist_, k, true);
      isolated_[e.cluster] = true;
      contagious_ -= k;
      isolated_individuals_ += k;
      --active_clusters_;
      ++isolated_clusters_;
      break;
    }
  }
  return true;
}

void Replayer::advance_to(double t) {
  const auto& events = trace_->events;
  while (next_ < events.size() && events[next_].time <= t) step();
}

Snapshot snapshot(const Trace& trace, double t) {
  if (!(t >= 0.0) || t > trace.end_time) {
    throw std::out_of_range("snapshot: time outside [0, end_time]");
  }
  Replayer replay(trace);
  replay.advance_to(t);
  Snapshot snap;
  snap.time = t;
  const std::size_t born = replay.sizes().size();
  for (std::size_t c = 0; c < born; ++c) {
    const std::uint64_t k = replay.sizes()[c];
    if (k == 0) continue;  // not yet born
    if (replay.isolated_flags()[c]) {
      snap.isolated_sizes.push_back(k);
    } else {
      snap.active_sizes.push_back(k);
    }
  }
  std::sort(snap.active_sizes.begin(), snap.active_sizes.end());
  std::sort(snap.isolated_sizes.begin(), snap.isolated_sizes.end());
  snap.contagious = replay.contagious();
  snap.isolated_individuals = replay.isolated_individuals();
  snap.cumulative_infected = replay.cumulative_infected();
  return snap;
}

TraceSummary summarize(const Trace& trace, std::size_t index) {
  TraceSummary s;
  s.index = index;
  s.seed = trace.seed;
  s.stop_reason = trace.stop_reason;
  s.end_time = trace.end_time;
  s.n_events = trace.events.size();
  s.n_clusters = trace.clusters.size();
  for (const auto& c : trace.clusters) {
    if (c.isolated()) {
      ++s.n_isolated_clusters;
    } else {
      s.contagious_at_end += c.current_size;
    }
  }
  s.cumulative_infected = trace.cumulative_infected();
  return s;
}

std::vector<TraceSummary> replicate_batch(const Parameters& params, std::uint64_t seed_base,
                                          std::size_t n, const StopCondition& stop) {
  return map_replicates(params, seed_base, n, stop, summarize, Execution::Parallel);
}

std::vector<TraceSummary> replicate_batch_serial(const Parameters& params, std::uint64_t seed_base,
                                                 std::size_t n, const StopCondition& stop) {
  return map_replicates(params, seed_base, n, stop, summarize, Execution::Serial);
}

}  // namespace cmj
