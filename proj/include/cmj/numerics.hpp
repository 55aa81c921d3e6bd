#ifndef CMJ_NUMERICS_HPP
#define CMJ_NUMERICS_HPP

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>

namespace cmj {

/// Raised when a numerical routine fails to reach its requested accuracy
/// (quadrature not converged, root not bracketed, ODE truncation leak, ...).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// log B(x, y) for x, y > 0, via reentrant log-gamma.
double log_beta(double x, double y);
/// B(x, y) = Gamma(x) Gamma(y) / Gamma(x + y).
double beta_fn(double x, double y);

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  std::size_t intervals = 0;
};

/// Globally adaptive Gauss-Kronrod (7/15) quadrature on [a, b] with an
/// absolute error target. Throws NumericalError if the interval budget is
/// exhausted before the target is met.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double abs_tol = 1e-12, std::size_t max_intervals = 20000);

/// Same, on [a, inf) through the map t = a + u / (1 - u).
QuadratureResult integrate_to_infinity(const std::function<double(double)>& f, double a,
                                       double abs_tol = 1e-12,
                                       std::size_t max_intervals = 20000);

/// Root of a strictly decreasing function g on [lo, hi] with g(lo) > 0 > g(hi),
/// by bisection down to floating-point resolution of the bracket.
double bisect_decreasing(const std::function<double(double)>& g, double lo, double hi,
                         std::size_t max_iter = 400);

/// Ordinary least-squares slope of y on x. Requires at least two distinct x.
double least_squares_slope(std::span<const double> x, std::span<const double> y);

}  // namespace cmj

#endif  // CMJ_NUMERICS_HPP
