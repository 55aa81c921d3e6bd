#include "cmj/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

#include "cmj/numerics.hpp"

namespace cmj {

double Characteristic::operator()(std::uint64_t k) const {
  if (k == 0) return 0.0;
  const auto kd = static_cast<double>(k);
  switch (kind_) {
    case Kind::One:
      return 1.0;
    case Kind::Identity:
      return kd;
    case Kind::SquareSize:
      return kd * kd;
    case Kind::IndicatorSize:
      return k == k_ ? 1.0 : 0.0;
    case Kind::ExpSize:
      return std::exp(b_ * kd);
  }
  return 0.0;
}

void Characteristic::check(const Parameters& params) const {
  if (kind_ == Kind::IndicatorSize && k_ == 0) {
    throw std::invalid_argument("Characteristic: indicator size must be >= 1");
  }
  if (kind_ == Kind::ExpSize && !(params.growth_ratio() * std::exp(b_) < 1.0)) {
    throw std::invalid_argument("Characteristic: ExpSize(b) requires (1 - delta/rho) e^b < 1");
  }
}

namespace {

void require_in_run(const Trace& trace, double t) {
  if (!(t >= 0.0) || t > trace.end_time) {
    throw std::out_of_range("time outside [0, end_time] of the trace");
  }
}

double pair_histogram(const std::vector<std::uint64_t>& hist, const Characteristic& f) {
  double sum = 0.0;
  for (std::size_t k = 1; k < hist.size(); ++k) {
    if (hist[k] != 0) sum += static_cast<double>(hist[k]) * f(k);
  }
  return sum;
}

}  // namespace

double active_count(const Trace& trace, double t, const Characteristic& f) {
  f.check(trace.params);
  require_in_run(trace, t);
  Replayer replay(trace);
  replay.advance_to(t);
  return pair_histogram(replay.active_histogram(), f);
}

double isolated_count(const Trace& trace, double t, const Characteristic& f) {
  f.check(trace.params);
  require_in_run(trace, t);
  Replayer replay(trace);
  replay.advance_to(t);
  return pair_histogram(replay.isolated_histogram(), f);
}

void EmpiricalDist::add(std::uint64_t k, std::uint64_t n) {
  if (k == 0) throw std::invalid_argument("EmpiricalDist: sizes start at 1");
  if (counts.size() <= k) counts.resize(k + 1, 0);
  counts[k] += n;
  total += n;
}

void EmpiricalDist::merge(const EmpiricalDist& other) {
  if (counts.size() < other.counts.size()) counts.resize(other.counts.size(), 0);
  for (std::size_t k = 1; k < other.counts.size(); ++k) counts[k] += other.counts[k];
  total += other.total;
}

double EmpiricalDist::weight(std::uint64_t k) const {
  if (total == 0 || k == 0 || k >= counts.size()) return 0.0;
  return static_cast<double>(counts[k]) / static_cast<double>(total);
}

double EmpiricalDist::cdf(std::uint64_t k) const {
  if (total == 0) return 0.0;
  std::uint64_t below = 0;
  for (std::size_t j = 1; j < counts.size() && j <= k; ++j) below += counts[j];
  return static_cast<double>(below) / static_cast<double>(total);
}

EmpiricalDist EmpiricalDist::from_histogram(const std::vector<std::uint64_t>& hist) {
  EmpiricalDist d;
  for (std::size_t k = 1; k < hist.size(); ++k) {
    if (hist[k] != 0) d.add(k, hist[k]);
  }
  return d;
}

EmpiricalDist empirical_active(const Trace& trace, double t) {
  require_in_run(trace, t);
  Replayer replay(trace);
  replay.advance_to(t);
  return EmpiricalDist::from_histogram(replay.active_histogram());
}

EmpiricalDist empirical_isolated(const Trace& trace, double t) {
  require_in_run(trace, t);
  Replayer replay(trace);
  replay.advance_to(t);
  return EmpiricalDist::from_histogram(replay.isolated_histogram());
}

double estimate_alpha(std::span<const double> times, std::span<const double> counts) {
  if (times.size() != counts.size()) throw std::invalid_argument("estimate_alpha: size mismatch");
  if (times.size() < 3) throw std::invalid_argument("estimate_alpha: insufficient data points");
  std::vector<double> logs;
  logs.reserve(counts.size());
  for (double c : counts) {
    if (!(c > 0.0)) throw std::invalid_argument("estimate_alpha: counts must be positive over the window");
    logs.push_back(std::log(c));
  }
  return least_squares_slope(times, logs);
}

std::vector<double> even_grid(double start, double end, std::size_t points) {
  if (points < 2) throw std::invalid_argument("even_grid: need at least two points");
  std::vector<double> grid(points);
  const double span = end - start;
  for (std::size_t i = 0; i < points; ++i) {
    grid[i] = start + span * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  grid.back() = end;
  return grid;
}

std::vector<double> active_cluster_series(const Trace& trace, std::span<const double> times) {
  Replayer replay(trace);
  std::vector<double> series;
  series.reserve(times.size());
  for (double t : times) {
    require_in_run(trace, t);
    replay.advance_to(t);
    series.push_back(static_cast<double>(replay.active_clusters()));
  }
  return series;
}

double estimate_alpha(const Trace& trace, std::optional<AlphaWindow> window) {
  AlphaWindow w = window.value_or(AlphaWindow{trace.end_time / 2.0, trace.end_time, 50});
  if (!(w.end > w.start)) throw std::invalid_argument("estimate_alpha: empty window");
  const auto grid = even_grid(w.start, w.end, w.points);
  const auto series = active_cluster_series(trace, grid);
  return estimate_alpha(grid, series);
}

double intrinsic_martingale(const Trace& trace, double alpha, std::uint32_t n) {
  double w = 0.0;
  for (const auto& c : trace.clusters) {
    if (c.generation == n) w += std::exp(-alpha * c.birth_time);
  }
  return w;
}

double ActiveClusterPath::at(double t) const {
  if (times.empty() || t < times.front()) return 0.0;
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  return static_cast<double>(counts[static_cast<std::size_t>(it - times.begin()) - 1]);
}

ActiveClusterPath active_cluster_path(const Trace& trace) {
  ActiveClusterPath path;
  path.times.push_back(0.0);
  path.counts.push_back(1);
  std::uint64_t active = 1;
  for (const auto& e : trace.events) {
    if (e.kind == EventKind::UntraceableBirth) {
      ++active;
    } else if (e.kind == EventKind::Isolation) {
      --active;
    } else {
      continue;
    }
    path.times.push_back(e.time);
    path.counts.push_back(active);
  }
  return path;
}

SurvivorPool pool_survivors(const Parameters& params, std::uint64_t seed_base, std::size_t n,
                            const StopCondition& stop, std::size_t window_points) {
  struct Digest {
    bool survived = false;
    double end_time = 0.0;
    EmpiricalDist active;
    EmpiricalDist isolated;
    ActiveClusterPath path;
  };
  auto digest = [](const Trace& trace, std::size_t) {
    Digest d;
    Replayer replay(trace);
    replay.advance_to(trace.end_time);
    d.survived = replay.contagious() > 0;
    d.end_time = trace.end_time;
    if (d.survived) {
      d.active = EmpiricalDist::from_histogram(replay.active_histogram());
      d.isolated = EmpiricalDist::from_histogram(replay.isolated_histogram());
      d.path = active_cluster_path(trace);
    }
    return d;
  };
  const auto digests = map_replicates(params, seed_base, n, stop, digest);

  SurvivorPool pool;
  pool.replicates = n;
  double horizon = std::numeric_limits<double>::infinity();
  for (const auto& d : digests) {
    if (!d.survived) continue;
    ++pool.survivors;
    pool.active.merge(d.active);
    pool.isolated.merge(d.isolated);
    horizon = std::min(horizon, d.end_time);
  }
  if (pool.survivors == 0 || !(horizon > 0.0)) return pool;
  pool.grid = even_grid(horizon / 2.0, horizon, window_points);
  pool.series.assign(pool.grid.size(), 0.0);
  for (const auto& d : digests) {
    if (!d.survived) continue;
    for (std::size_t i = 0; i < pool.grid.size(); ++i) pool.series[i] += d.path.at(pool.grid[i]);
  }
  if (std::all_of(pool.series.begin(), pool.series.end(), [](double c) { return c > 0.0; })) {
    pool.alpha_hat = estimate_alpha(pool.grid, pool.series);
  }
  return pool;
}

std::vector<double> size_biased(const EmpiricalDist& d) {
  std::vector<double> out(d.max_size(), 0.0);
  double total = 0.0;
  for (std::size_t k = 1; k <= d.max_size(); ++k) {
    out[k - 1] = static_cast<double>(k) * static_cast<double>(d.counts[k]);
    total += out[k - 1];
  }
  if (total > 0.0) {
    for (double& w : out) w /= total;
  }
  return out;
}

double tv_distance(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = std::max(a.size(), b.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = i < a.size() ? a[i] : 0.0;
    const double y = i < b.size() ? b[i] : 0.0;
    sum += std::abs(x - y);
  }
  return 0.5 * sum;
}

double tv_distance(const EmpiricalDist& a, const EmpiricalDist& b) {
  const std::size_t n = std::max(a.max_size(), b.max_size());
  double sum = 0.0;
  for (std::size_t k = 1; k <= n; ++k) sum += std::abs(a.weight(k) - b.weight(k));
  return 0.5 * sum;
}

double tv_distance(const EmpiricalDist& a, const Pmf& b) {
  if (a.empty()) throw std::invalid_argument("tv_distance: empty distribution");
  const std::size_t K = b.size();
  double sum = 0.0;
  double a_inside = 0.0;
  for (std::size_t k = 1; k <= K; ++k) {
    sum += std::abs(a.weight(k) - b(k));
    a_inside += a.weight(k);
  }
  // Beyond the support of b, compare the lumped remainders.
  const double b_outside = std::max(0.0, 1.0 - b.total());
  sum += std::abs((1.0 - a_inside) - b_outside);
  return 0.5 * sum;
}

ChiSquareResult chi_square(const EmpiricalDist& observed, const Pmf& expected, double min_expected) {
  if (observed.empty() || expected.size() == 0) throw std::invalid_argument("chi_square: empty inputs");
  const auto n = static_cast<double>(observed.total);
  std::vector<double> obs_bins;
  std::vector<double> exp_bins;
  double o_acc = 0.0;
  double e_acc = 0.0;
  double o_inside = 0.0;
  for (std::size_t k = 1; k <= expected.size(); ++k) {
    const double o = static_cast<double>(k < observed.counts.size() ? observed.counts[k] : 0);
    o_acc += o;
    o_inside += o;
    e_acc += n * expected(k);
    if (e_acc >= min_expected) {
      obs_bins.push_back(o_acc);
      exp_bins.push_back(e_acc);
      o_acc = 0.0;
      e_acc = 0.0;
    }
  }
  o_acc += n - o_inside;
  e_acc += n * std::max(0.0, 1.0 - expected.total());
  if (e_acc > 0.0 || o_acc > 0.0) {
    if (e_acc >= min_expected || exp_bins.empty()) {
      obs_bins.push_back(o_acc);
      exp_bins.push_back(e_acc);
    } else {
      obs_bins.back() += o_acc;
      exp_bins.back() += e_acc;
    }
  }
  ChiSquareResult r;
  r.bins = obs_bins.size();
  for (std::size_t i = 0; i < obs_bins.size(); ++i) {
    if (exp_bins[i] <= 0.0) {
      if (obs_bins[i] > 0.0) r.statistic = std::numeric_limits<double>::infinity();
      continue;
    }
    const double d = obs_bins[i] - exp_bins[i];
    r.statistic += d * d / exp_bins[i];
  }
  r.dof = r.bins > 1 ? r.bins - 1 : 0;
  if (r.dof == 0) {
    r.p_value = 1.0;
  } else if (std::isinf(r.statistic)) {
    r.p_value = 0.0;
  } else {
    r.p_value = boost::math::gamma_q(0.5 * static_cast<double>(r.dof), 0.5 * r.statistic);
  }
  return r;
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  constexpr double pi = std::numbers::pi;
  if (lambda < 1.18) {
    // Jacobi-theta form of the CDF converges fast for small lambda.
    double cdf = 0.0;
    for (int j = 1; j <= 20; ++j) {
      const double m = 2.0 * j - 1.0;
      cdf += std::exp(-m * m * pi * pi / (8.0 * lambda * lambda));
    }
    cdf *= std::sqrt(2.0 * pi) / lambda;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double q = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    q += (j % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(q, 0.0, 1.0);
}

KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_test: empty sample");
  std::sort(samples.begin(), samples.end());
  const auto n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::max(f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f));
  }
  const double root = std::sqrt(n);
  return {d, kolmogorov_survival((root + 0.12 + 0.11 / root) * d)};
}

}  // namespace cmj
