#ifndef CMJ_STATS_HPP
#define CMJ_STATS_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "cmj/malthus.hpp"
#include "cmj/model.hpp"
#include "cmj/sim.hpp"

namespace cmj {

/// A function f on cluster sizes with f(0) = 0.
class Characteristic {
 public:
  enum class Kind { One, Identity, SquareSize, IndicatorSize, ExpSize };

  static Characteristic one() { return {Kind::One, 0.0, 0}; }
  static Characteristic identity() { return {Kind::Identity, 0.0, 0}; }
  static Characteristic square_size() { return {Kind::SquareSize, 0.0, 0}; }
  static Characteristic indicator(std::uint64_t k) { return {Kind::IndicatorSize, 0.0, k}; }
  static Characteristic exp_size(double b) { return {Kind::ExpSize, b, 0}; }

  Kind kind() const { return kind_; }
  double operator()(std::uint64_t k) const;

  /// Growth condition of the law of large numbers: for ExpSize(b),
  /// (1 - delta/rho) e^b < 1. Throws std::invalid_argument when violated.
  void check(const Parameters& params) const;

 private:
  Characteristic(Kind kind, double b, std::uint64_t k) : kind_(kind), b_(b), k_(k) {}
  Kind kind_;
  double b_;
  std::uint64_t k_;
};

/// A^f(t): sum of f over current sizes of active clusters.
double active_count(const Trace& trace, double t, const Characteristic& f);
/// I^f(t): sum of f over sizes at detection of clusters isolated by t.
double isolated_count(const Trace& trace, double t, const Characteristic& f);

/// Histogram of cluster sizes; counts[k] for k >= 1 (counts[0] unused).
struct EmpiricalDist {
  std::vector<std::uint64_t> counts = std::vector<std::uint64_t>(1, 0);
  std::uint64_t total = 0;

  bool empty() const { return total == 0; }
  void add(std::uint64_t k, std::uint64_t n = 1);
  /// Pooling: sums counts. Associative and commutative.
  void merge(const EmpiricalDist& other);
  /// Normalized weight at k (0 when empty).
  double weight(std::uint64_t k) const;
  std::size_t max_size() const { return counts.size() - 1; }
  double cdf(std::uint64_t k) const;

  static EmpiricalDist from_histogram(const std::vector<std::uint64_t>& hist);
};

/// Pi^a(t) and Pi^i(t). Empty when there is no cluster of the kind.
EmpiricalDist empirical_active(const Trace& trace, double t);
EmpiricalDist empirical_isolated(const Trace& trace, double t);

/// Least-squares slope of log(counts) against times.
double estimate_alpha(std::span<const double> times, std::span<const double> counts);

struct AlphaWindow {
  double start = 0.0;
  double end = 0.0;
  std::size_t points = 50;
};

/// Number of active clusters A^1 on an even grid of the window.
std::vector<double> active_cluster_series(const Trace& trace, std::span<const double> times);

/// Growth rate from the slope of log A^1(t). Default window: the last half of the run.
double estimate_alpha(const Trace& trace, std::optional<AlphaWindow> window = std::nullopt);

std::vector<double> even_grid(double start, double end, std::size_t points);

/// W_n = sum over generation-n clusters of exp(-alpha * birth time).
double intrinsic_martingale(const Trace& trace, double alpha, std::uint32_t n);

/// Number of active clusters as a right-continuous step function of time.
struct ActiveClusterPath {
  std::vector<double> times;          ///< change points, ascending; times[0] = 0
  std::vector<std::uint64_t> counts;  ///< value on [times[i], times[i + 1])

  double at(double t) const;
};

ActiveClusterPath active_cluster_path(const Trace& trace);

/// Replicates pooled over the runs still alive at their stopping time.
struct SurvivorPool {
  std::size_t replicates = 0;
  std::size_t survivors = 0;
  EmpiricalDist active;    ///< Pi^a at each survivor's end time, counts summed
  EmpiricalDist isolated;  ///< Pi^i likewise
  std::vector<double> grid;    ///< window [T/2, T], T the earliest survivor end time
  std::vector<double> series;  ///< A^1 summed over survivors on the grid
  std::optional<double> alpha_hat;
};

/// Runs n replicates (seeds derive_seed(seed_base, i), in parallel) and pools
/// the survivors. alpha_hat is the log-slope of the pooled A^1 series.
SurvivorPool pool_survivors(const Parameters& params, std::uint64_t seed_base, std::size_t n,
                            const StopCondition& stop, std::size_t window_points = 50);

/// Size-biased version of a histogram: weights proportional to k * count.
std::vector<double> size_biased(const EmpiricalDist& d);

/// Total variation distance between two mass vectors indexed from 1; the
/// shorter one is zero-padded.
double tv_distance(std::span<const double> a, std::span<const double> b);
double tv_distance(const EmpiricalDist& a, const EmpiricalDist& b);
/// Against a reference pmf on 1..K; mass beyond K is compared as one lumped bin.
double tv_distance(const EmpiricalDist& a, const Pmf& b);

struct ChiSquareResult {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
  std::size_t bins = 0;
};

/// Pearson goodness of fit of the histogram against the pmf on 1..K (mass
/// beyond K lumped in the last bin). Adjacent sizes are pooled until each bin
/// expects at least min_expected observations.
ChiSquareResult chi_square(const EmpiricalDist& observed, const Pmf& expected, double min_expected = 5.0);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// One-sample Kolmogorov-Smirnov test against a continuous CDF.
KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf);

/// Asymptotic Kolmogorov survival function Q(lambda) = P(K > lambda).
double kolmogorov_survival(double lambda);

}  // namespace cmj

#endif  // CMJ_STATS_HPP
