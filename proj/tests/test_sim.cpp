#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "cmj/sim.hpp"
#include "cmj/stats.hpp"

using namespace cmj;

namespace {

StopCondition capped(std::uint64_t individuals) {
  StopCondition stop;
  stop.max_individuals = individuals;
  return stop;
}

// Recomputes everything from the event list alone, with no shared code.
struct Bookkeeping {
  std::map<ClusterId, std::uint64_t> active;
  std::map<ClusterId, std::uint64_t> isolated;
  std::uint64_t contagious = 1;
  Bookkeeping() { active[0] = 1; }
  void apply(const Event& e) {
    switch (e.kind) {
      case EventKind::TraceableGrowth:
        REQUIRE(active.count(e.cluster) == 1);
        REQUIRE(e.size == active[e.cluster] + 1);
        active[e.cluster] = e.size;
        ++contagious;
        break;
      case EventKind::UntraceableBirth:
        REQUIRE(active.count(e.cluster) == 1);
        REQUIRE(active.count(e.child) == 0);
        REQUIRE(isolated.count(e.child) == 0);
        active[e.child] = 1;
        ++contagious;
        break;
      case EventKind::Isolation:
        REQUIRE(active.count(e.cluster) == 1);
        REQUIRE(e.size == active[e.cluster]);
        isolated[e.cluster] = e.size;
        contagious -= e.size;
        active.erase(e.cluster);
        break;
    }
  }
  std::uint64_t active_total() const {
    std::uint64_t s = 0;
    for (const auto& [id, k] : active) s += k;
    return s;
  }
};

}  // namespace

TEST_CASE("simulate rejects unbounded explosive runs") {
  CHECK_THROWS_AS(simulate(validate(2.0, 0.5, 0.5), 1, StopCondition{}), std::invalid_argument);
  CHECK_THROWS_AS(simulate(validate(2.0, 0.5, 0.0), 1, StopCondition{}), std::invalid_argument);
  CHECK_NOTHROW(simulate(validate(1.0, 0.9, 0.5), 1, StopCondition{}));
}

TEST_CASE("determinism") {
  const auto params = validate(2.0, 0.5, 0.5);
  const auto a = simulate(params, 42, capped(3000));
  const auto b = simulate(params, 42, capped(3000));
  CHECK(a.events == b.events);
  CHECK(a.end_time == b.end_time);
  CHECK(a.clusters.size() == b.clusters.size());
  const auto c = simulate(params, 43, capped(3000));
  CHECK_FALSE(a.events == c.events);
}

TEST_CASE("trace invariants") {
  const auto params = validate(2.0, 0.5, 0.5);
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const auto trace = simulate(params, seed, capped(2000));
    Bookkeeping book;
    double prev = 0.0;
    for (const auto& e : trace.events) {
      CHECK(e.time > prev);
      prev = e.time;
      book.apply(e);
      REQUIRE(book.contagious == book.active_total());
    }
    CHECK(book.contagious == summarize(trace, 0).contagious_at_end);

    for (const auto& c : trace.clusters) {
      CHECK((c.parent_id.has_value()) == (c.id != 0));
      if (c.isolated()) {
        CHECK(c.current_size == 0);
        CHECK(*c.final_size >= 1);
        for (double age : c.child_birth_ages) CHECK(age < *c.isolation_age);
      } else {
        CHECK(c.current_size >= 1);
        CHECK_FALSE(c.final_size.has_value());
      }
      CHECK(std::is_sorted(c.child_birth_ages.begin(), c.child_birth_ages.end()));
      if (c.parent_id) {
        const auto& parent = trace.clusters[*c.parent_id];
        CHECK(c.birth_time >= parent.birth_time);
        if (parent.isolated()) CHECK(c.birth_time < *parent.isolation_time());
        CHECK(c.generation == parent.generation + 1);
      }
    }
    // Isolated clusters receive no further events.
    std::vector<bool> closed(trace.clusters.size(), false);
    for (const auto& e : trace.events) {
      CHECK_FALSE(closed[e.cluster]);
      if (e.kind == EventKind::Isolation) closed[e.cluster] = true;
    }
    if (trace.stop_reason == StopReason::Extinction) {
      CHECK(summarize(trace, 0).contagious_at_end == 0);
    } else {
      CHECK(trace.stop_reason == StopReason::PopulationCap);
      CHECK(trace.cumulative_infected() == 2000);
    }
  }
}

TEST_CASE("stop conditions") {
  const auto params = validate(2.0, 0.5, 0.5);
  StopCondition by_time;
  by_time.t_max = 3.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto trace = simulate(params, seed, by_time);
    if (trace.stop_reason == StopReason::TimeLimit) {
      CHECK(trace.end_time == 3.0);
    }
    for (const auto& e : trace.events) CHECK(e.time <= 3.0);
  }
  StopCondition by_events;
  by_events.max_events = 100;
  const auto t = simulate(params, 7, by_events);
  CHECK(t.events.size() <= 100);

  StopCondition by_clusters;
  by_clusters.max_clusters = 300;
  const auto yule = simulate(validate(2.0, 0.5, 0.0), 8, by_clusters);
  CHECK(yule.stop_reason == StopReason::ClusterCap);
  CHECK(yule.clusters.size() == 300);
  CHECK(yule.events.back().kind == EventKind::UntraceableBirth);

  // Generation cap 0 keeps only the ancestral cluster.
  StopCondition single;
  single.max_generation = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto trace = simulate(params, seed, single);
    CHECK(trace.clusters.size() == 1);
    CHECK(trace.stop_reason == StopReason::Extinction);
    CHECK(trace.clusters[0].isolated());
  }
}

TEST_CASE("degenerate p") {
  StopCondition stop;
  stop.max_individuals = 500;
  const auto lineage = validate(2.0, 1.0, 0.5);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    CHECK(simulate(lineage, seed, stop).clusters.size() == 1);
  }
  const auto singletons = validate(2.0, 0.0, 0.5);
  const auto trace = simulate(singletons, 3, stop);
  for (const auto& c : trace.clusters) CHECK(c.final_size.value_or(c.current_size) == 1);
}

TEST_CASE("subcritical runs die out") {
  const auto params = validate(1.0, 0.9, 0.5);
  const auto summaries = replicate_batch(params, 99, 500, StopCondition{});
  for (const auto& s : summaries) CHECK(s.stop_reason == StopReason::Extinction);
}

TEST_CASE("snapshot") {
  const auto params = validate(2.0, 0.5, 0.5);
  const auto trace = simulate(params, 11, capped(1500));
  const auto start = snapshot(trace, 0.0);
  CHECK(start.active_sizes == std::vector<std::uint64_t>{1});
  CHECK(start.isolated_sizes.empty());
  for (double t = 0.0; t <= trace.end_time; t += trace.end_time / 37.0) {
    const auto snap = snapshot(trace, t);
    CHECK(snap.contagious + snap.isolated_individuals == snap.cumulative_infected);
    CHECK(std::accumulate(snap.active_sizes.begin(), snap.active_sizes.end(), std::uint64_t{0}) ==
          snap.contagious);
    CHECK(std::accumulate(snap.isolated_sizes.begin(), snap.isolated_sizes.end(), std::uint64_t{0}) ==
          snap.isolated_individuals);
  }
  CHECK_THROWS_AS(snapshot(trace, trace.end_time + 1.0), std::out_of_range);

  const auto subcritical = validate(1.0, 0.9, 0.5);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto extinct = simulate(subcritical, seed, StopCondition{});
    REQUIRE(extinct.stop_reason == StopReason::Extinction);
    CHECK(snapshot(extinct, extinct.end_time).active_sizes.empty());
  }

  // Replay from the events alone.
  Trace bare{params, 0, {}, trace.events, {}, StopReason::Extinction, trace.end_time, 0};
  const auto replayed = snapshot(bare, trace.end_time);
  const auto direct = snapshot(trace, trace.end_time);
  CHECK(replayed.active_sizes == direct.active_sizes);
  CHECK(replayed.isolated_sizes == direct.isolated_sizes);
}

TEST_CASE("replicate batches") {
  const auto params = validate(2.0, 0.5, 0.5);
  const auto stop = capped(800);
  const auto parallel = replicate_batch(params, 1234, 64, stop);
  const auto serial = replicate_batch_serial(params, 1234, 64, stop);
  CHECK(parallel == serial);
  for (std::size_t i = 0; i < 64; ++i) {
    CHECK(parallel[i].index == i);
    CHECK(parallel[i].seed == derive_seed(1234, i));
  }
  const auto one = replicate_batch(params, 1234, 1, stop);
  CHECK(one[0] == summarize(simulate(params, derive_seed(1234, 0), stop), 0));

  // A failing replicate is reported with its index.
  auto thrower = [](const Trace&, std::size_t i) -> int {
    if (i == 5) throw std::runtime_error("boom");
    return 0;
  };
  try {
    map_replicates(params, 1, 8, stop, thrower);
    FAIL("expected ReplicateError");
  } catch (const ReplicateError& e) {
    CHECK(e.index() == 5);
  }
}

TEST_CASE("rng") {
  Rng a(5);
  Rng b(5);
  for (int i = 0; i < 100; ++i) CHECK(a() == b());
  Rng r(17);
  double sum = 0.0;
  const int n = 200000;
  std::vector<std::uint64_t> bins(7, 0);
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
    ++bins[r.below(7)];
  }
  CHECK(std::abs(sum / n - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / n));
  for (auto c : bins) CHECK(std::abs(static_cast<double>(c) - n / 7.0) < 5.0 * std::sqrt(n / 7.0));
}

TEST_CASE("inter-event times are exponential given the population") {
  const auto params = validate(2.0, 0.5, 0.5);
  std::vector<double> scaled;
  for (std::uint64_t seed = 0; scaled.size() < 20000; ++seed) {
    const auto trace = simulate(params, seed, capped(400));
    Replayer replay(trace);
    double last = 0.0;
    for (const auto& e : trace.events) {
      const double rate = (params.gamma() + params.delta()) * static_cast<double>(replay.contagious());
      scaled.push_back(rate * (e.time - last));
      last = e.time;
      replay.step();
    }
  }
  const auto ks = ks_test(scaled, [](double x) { return -std::expm1(-x); });
  CHECK(ks.p_value > 0.01);
}

TEST_CASE("single cluster projection matches the typical cluster") {
  const auto params = validate(2.0, 0.5, 0.5);
  StopCondition single;
  single.max_generation = 0;
  auto final_size = [](const Trace& trace, std::size_t) { return *trace.clusters[0].final_size; };
  const auto sizes = map_replicates(params, 777, 100000, single, final_size);
  EmpiricalDist dist;
  for (auto k : sizes) dist.add(k);
  Pmf geo;
  const double s = params.rates().iso_success;
  for (std::size_t k = 1; k <= 80; ++k) geo.mass.push_back(geometric_pmf(s, k));
  CHECK(tv_distance(dist, geo) < 0.01);

  // p = 1: the single cluster's final size is geometric as well.
  const auto lineage = validate(2.0, 1.0, 0.5);
  const auto lineage_sizes = map_replicates(lineage, 778, 100000, StopCondition{}, final_size);
  EmpiricalDist ldist;
  for (auto k : lineage_sizes) ldist.add(k);
  Pmf lgeo;
  for (std::size_t k = 1; k <= 200; ++k) lgeo.mass.push_back(geometric_pmf(lineage.rates().iso_success, k));
  CHECK(chi_square(ldist, lgeo).p_value > 0.01);
}
