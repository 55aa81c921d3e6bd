#ifndef CMJ_MODEL_HPP
#define CMJ_MODEL_HPP

#include <cstddef>
#include <string_view>

namespace cmj {

/// Rates that every closed form below is written in.
struct DerivedRates {
  double rho = 0.0;                ///< delta + p * gamma: per-individual event rate of a cluster
  double iso_success = 0.0;        ///< delta / rho: a cluster step ends in detection
  double offspring_success = 0.0;  ///< delta / ((1 - p) gamma + delta)
};

enum class Regime { Subcritical, Critical, Supercritical };

std::string_view to_string(Regime regime);

/// Validated epidemic parameters. Only obtainable through validate().
///
/// delta == 0 is accepted and flagged as the degenerate (no detection) mode;
/// operations that divide by delta reject such parameters unless they
/// explicitly implement the no-detection limit.
class Parameters {
 public:
  double gamma() const { return gamma_; }
  double p() const { return p_; }
  double delta() const { return delta_; }
  const DerivedRates& rates() const { return rates_; }
  double rho() const { return rates_.rho; }
  /// 1 - delta/rho, the ratio of the geometric laws of cluster sizes.
  double growth_ratio() const { return 1.0 - rates_.iso_success; }
  bool degenerate_delta() const { return delta_ == 0.0; }

  friend Parameters validate(double gamma, double p, double delta);
  friend bool operator==(const Parameters&, const Parameters&) = default;

 private:
  Parameters(double gamma, double p, double delta);

  double gamma_;
  double p_;
  double delta_;
  DerivedRates rates_;
};

/// Checks gamma > 0, 0 <= p <= 1, delta >= 0 (all finite) and attaches the
/// derived rates. Throws std::invalid_argument otherwise.
Parameters validate(double gamma, double p, double delta);

/// Supercritical iff delta < (1 - p) gamma; Critical on equality.
Regime regime(const Parameters& params);

// Laws of the typical cluster.

/// P(C(t) = k) for k >= 1.
double typical_size_pmf(const Parameters& params, double t, std::size_t k);
/// P(zeta <= t) = P(C(t) = 0).
double isolation_cdf(const Parameters& params, double t);
/// P(C(zeta-) = k, zeta <= t).
double joint_final_size_cdf(const Parameters& params, double t, std::size_t k);
/// P(C(zeta-) = k): geometric with success delta/rho.
double final_size_pmf(const Parameters& params, std::size_t k);
/// P(Z1 = k), Z1 the number of clusters begotten by a typical cluster.
double offspring_pmf(const Parameters& params, std::size_t k);
/// E(Z1) = (1 - p) gamma / delta.
double offspring_mean(const Parameters& params);
/// mu(t) = E(xi([0, t])); the no-detection form is used when delta == 0.
double untraceable_intensity(const Parameters& params, double t);
/// Probability that the epidemic dies out.
double extinction_probability(const Parameters& params);

/// Smallest K with (1 - delta/rho)^K / (delta/rho) < eps. Throws for delta == 0,
/// where no geometric tail exists.
std::size_t tail_truncation(const Parameters& params, double eps = 1e-12);

/// Geometric pmf on {1, 2, ...}: success * (1 - success)^(k - 1).
double geometric_pmf(double success, std::size_t k);

}  // namespace cmj

#endif  // CMJ_MODEL_HPP
