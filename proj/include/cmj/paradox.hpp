#ifndef CMJ_PARADOX_HPP
#define CMJ_PARADOX_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "cmj/rng.hpp"

namespace cmj::paradox {

/// Lifespan law lambda on (0, inf).
class LifespanSpec {
 public:
  enum class Kind { PointMass, Exponential, Tabulated };

  static LifespanSpec point_mass(double lifespan);
  static LifespanSpec exponential(double rate);
  /// Inverse CDF given at (u, lifespan) knots, both coordinates strictly
  /// increasing, u spanning [0, 1]; interpolated linearly.
  static LifespanSpec tabulated(std::vector<double> u, std::vector<double> lifespan);

  Kind kind() const { return kind_; }
  double parameter() const { return param_; }
  double quantile(double u) const;
  double sample(Rng& rng) const;

  const std::vector<double>& knots_u() const { return u_; }
  const std::vector<double>& knots_lifespan() const { return ell_; }

 private:
  LifespanSpec(Kind kind, double param) : kind_(kind), param_(param) {}
  Kind kind_;
  double param_;
  std::vector<double> u_;
  std::vector<double> ell_;
};

/// Birth intensity of the cohort: e^b db, or b^r db (sub-exponential control).
struct Intensity {
  enum class Kind { Exponential, Polynomial };
  Kind kind = Kind::Exponential;
  double r = 1.0;

  static Intensity exponential() { return {Kind::Exponential, 0.0}; }
  static Intensity polynomial(double r) { return {Kind::Polynomial, r}; }

  /// Integral of the intensity over [0, t].
  double cumulative(double t) const;
  /// Inverse of cumulative().
  double inverse_cumulative(double s) const;
};

/// Exponential cohorts are capped at this horizon (about 1e13 atoms).
inline constexpr double kMaxExponentialHorizon = 30.0;

struct Atom {
  double birth;
  double lifespan;
};

struct CohortSample {
  std::vector<Atom> atoms;  ///< sorted by birth time
  double horizon = 0.0;
  Intensity intensity;
};

/// Poisson point process on [0, t] x (0, inf) with intensity
/// intensity(b) db lambda(dl): Poisson total, inverse-CDF births, i.i.d. lifespans.
CohortSample sample_cohort(const LifespanSpec& spec, Intensity intensity, double t, std::uint64_t seed);

using LifespanFunction = std::function<double(double)>;

struct DeadMean {
  std::size_t n_dead = 0;
  std::optional<double> mean;  ///< empty when nobody died by t
};

/// Mean of f(lifespan) over atoms with birth + lifespan <= t.
DeadMean dead_mean(const CohortSample& sample, double t, const LifespanFunction& f);

/// <lambda, f>.
double lambda_expectation(const LifespanSpec& spec, const LifespanFunction& f);
/// <lambda_1, f>, lambda_1(dl) proportional to e^{-l} lambda(dl).
double lambda1_expectation(const LifespanSpec& spec, const LifespanFunction& f);

struct ParadoxRow {
  double t;
  std::size_t n_dead;
  std::optional<double> dead_mean;
  double lambda1_expectation;
  double lambda_expectation;
};

/// dead_mean of the identity at each horizon, one fresh cohort per horizon
/// (seed derived from seed_base and the row index). Rows run in parallel.
std::vector<ParadoxRow> paradox_table(const LifespanSpec& spec, Intensity intensity,
                                      const std::vector<double>& horizons, std::uint64_t seed_base);

}  // namespace cmj::paradox

#endif  // CMJ_PARADOX_HPP
