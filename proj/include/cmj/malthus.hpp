#ifndef CMJ_MALTHUS_HPP
#define CMJ_MALTHUS_HPP

#include <cstddef>
#include <functional>
#include <vector>

#include "cmj/model.hpp"

namespace cmj {

/// Probability (or plain nonnegative) masses on {1, ..., K}, with an upper
/// bound on the mass the truncation dropped beyond K.
struct Pmf {
  std::vector<double> mass;  ///< mass[k - 1] is the mass at k
  double tail_bound = 0.0;

  std::size_t size() const { return mass.size(); }
  /// Mass at k; zero outside 1..K.
  double operator()(std::size_t k) const {
    return (k >= 1 && k <= mass.size()) ? mass[k - 1] : 0.0;
  }
  double total() const;
  double mean() const;
  double cdf(std::size_t k) const;
};

enum class LaplaceMethod { Series, Quadrature };

/// Laplace transform L(theta) of the intensity of untraceable births,
///   L(theta) = (1 - p) gamma rho  int_0^1 x^(theta/rho) / ((rho - delta) x + delta)^2 dx
///            = ((1 - p) gamma / rho) sum_j j q^(j-1) B(1 + theta/rho, j),   q = 1 - delta/rho.
/// The series is the default evaluator. Rejects delta == 0.
double laplace_L(const Parameters& params, double theta, LaplaceMethod method = LaplaceMethod::Series);

/// Malthusian parameter: the root of L(alpha) = 1, found by bracketing and
/// bisection. |L(alpha) - 1| < tol is checked before returning. In the
/// no-detection mode this is gamma. Throws std::domain_error unless supercritical.
double solve_alpha(const Parameters& params, double tol = 1e-12,
                   LaplaceMethod method = LaplaceMethod::Series);

/// beta = -L'(alpha), by quadrature of the integral of t against the birth
/// intensity. Closed form 1/((1-p) gamma) without detection.
double beta_const(const Parameters& params, double alpha);

/// The measures m^a and m^i at size k >= 1.
double m_active(const Parameters& params, double alpha, std::size_t k);
double m_isolated(const Parameters& params, double alpha, std::size_t k);

/// Normalizers c_a and c_i (reciprocals of the full, untruncated sums).
double active_normalizer(const Parameters& params, double alpha);
double isolated_normalizer(const Parameters& params, double alpha);

/// Limiting active / isolated cluster-size distributions on 1..K.
Pmf pi_active(const Parameters& params, double alpha, std::size_t K);
Pmf pi_isolated(const Parameters& params, double alpha, std::size_t K);

struct SpectralSolution {
  double alpha = 0.0;
  double beta = 0.0;
  double c_a = 0.0;
  double c_i = 0.0;
  Pmf pi_a;
  Pmf pi_i;
  double solver_tol = 0.0;
};

/// Everything above at once. K == 0 picks the tail-rule truncation.
SpectralSolution solve_spectrum(const Parameters& params, double tol = 1e-12, std::size_t K = 0);

using SizeFunction = std::function<double(std::size_t)>;

/// Generator of the expected active-cluster profile:
///   (A f)(k) = k (p gamma (f(k+1) - f(k)) + (1 - p) gamma f(1) - delta f(k)).
double generator_apply(const Parameters& params, const SizeFunction& f, std::size_t k);

/// max over indicator test functions 1_k, k <= K - 1, of
/// |<pi_a, A 1_k> - alpha <pi_a, 1_k>| with pi_a truncated at K = pi_a.size().
double eigen_residual(const Parameters& params, double alpha, const Pmf& pi_a);

struct NuRecurrence {
  Pmf nu;              ///< unnormalized eigenvector, c = 1
  double balance_gap;  ///< (r + rho) nu(1) - (1 - p) gamma sum_j j nu(j)
};

/// nu(k) = p gamma (k - 1) / (r + rho k) nu(k - 1), nu(1) = rho / (r + rho).
NuRecurrence nu_recurrence(const Parameters& params, double r, std::size_t K);

/// Root in r of the balance gap of nu_recurrence.
double solve_alpha_recurrence(const Parameters& params, std::size_t K);

struct OdeControl {
  double t_max = 30.0;
  std::size_t k_max = 0;      ///< 0: four times the tail-rule truncation
  double step_scale = 1.0;    ///< step = step_scale * min(1 / (rho k_max), 0.005 / gamma)
  std::size_t records = 121;  ///< stored grid points, evenly spaced on [0, t_max]
  double leak_tol = 1e-6;
};

/// Expected active-cluster profile nu_t(k) on a time grid.
struct NuTrajectory {
  std::vector<double> times;
  std::vector<double> log_total;              ///< log sum_k nu_t(k)
  std::vector<std::vector<double>> profiles;  ///< nu_t normalized to unit mass
  double leak_fraction = 0.0;  ///< mass dropped past k_max, relative to the final mass
  std::size_t k_max = 0;
  double step = 0.0;

  /// Least-squares slope of log_total over the last quarter of the grid.
  double growth_rate() const;
};

/// Classical RK4 integration of the truncated forward equations from a unit
/// mass at size 1. Throws NumericalError when the leak exceeds leak_tol.
NuTrajectory integrate_nu(const Parameters& params, const OdeControl& control);

/// Yule-Simon pmf sigma_q(k) = (1/q) B(1 + 1/q, k), q in (0, 1].
double yule_simon_pmf(double q, std::size_t k);
/// P(X > K) for X ~ sigma_q.
double yule_simon_tail(double q, std::size_t K);

}  // namespace cmj

#endif  // CMJ_MALTHUS_HPP
