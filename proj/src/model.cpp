#include "cmj/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cmj {

namespace {

// base^n with 0^0 = 1, in log space so that large n cannot overflow.
double power(double base, double n) {
  if (n == 0.0) return 1.0;
  if (base <= 0.0) return 0.0;
  return std::exp(n * std::log(base));
}

void require_time(double t, const char* who) {
  if (!(t >= 0.0) || std::isnan(t)) {
    throw std::domain_error(std::string(who) + ": time must be >= 0");
  }
}

void require_size(std::size_t k, const char* who) {
  if (k < 1) throw std::domain_error(std::string(who) + ": size must be >= 1");
}

// 1 - exp(-rho t), exact near t = 0.
double grown_fraction(double rho, double t) { return -std::expm1(-rho * t); }

}  // namespace

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::Subcritical:
      return "subcritical";
    case Regime::Critical:
      return "critical";
    case Regime::Supercritical:
      return "supercritical";
  }
  return "unknown";
}

Parameters::Parameters(double gamma, double p, double delta)
    : gamma_(gamma), p_(p), delta_(delta) {
  rates_.rho = delta + p * gamma;
  rates_.iso_success = rates_.rho > 0.0 ? delta / rates_.rho : 0.0;
  const double ends = (1.0 - p) * gamma + delta;
  // p = 1 and delta = 0: no untraceable births at all, Z1 = 0 surely.
  rates_.offspring_success = ends > 0.0 ? delta / ends : 1.0;
}

Parameters validate(double gamma, double p, double delta) {
  if (!std::isfinite(gamma) || !std::isfinite(p) || !std::isfinite(delta)) {
    throw std::invalid_argument("parameters must be finite");
  }
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be > 0");
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("p must lie in [0, 1]");
  if (delta < 0.0) throw std::invalid_argument("delta must be >= 0");
  return Parameters(gamma, p, delta);
}

Regime regime(const Parameters& params) {
  const double untraceable = (1.0 - params.p()) * params.gamma();
  if (params.delta() < untraceable) return Regime::Supercritical;
  if (params.delta() == untraceable) return Regime::Critical;
  return Regime::Subcritical;
}

double typical_size_pmf(const Parameters& params, double t, std::size_t k) {
  require_time(t, "typical_size_pmf");
  require_size(k, "typical_size_pmf");
  const double rho = params.rho();
  const double base = params.growth_ratio() * grown_fraction(rho, t);
  return power(base, static_cast<double>(k - 1)) * std::exp(-rho * t);
}

double isolation_cdf(const Parameters& params, double t) {
  require_time(t, "isolation_cdf");
  const double delta = params.delta();
  if (delta == 0.0) return 0.0;
  const double grown = delta * std::expm1(params.rho() * t);
  if (std::isinf(grown)) return 1.0;
  if (grown == 0.0) return 0.0;
  return 1.0 / (1.0 + params.rho() / grown);
}

double joint_final_size_cdf(const Parameters& params, double t, std::size_t k) {
  require_time(t, "joint_final_size_cdf");
  require_size(k, "joint_final_size_cdf");
  const DerivedRates& r = params.rates();
  if (r.iso_success == 0.0) return 0.0;
  return r.iso_success * power(params.growth_ratio(), static_cast<double>(k - 1)) *
         power(grown_fraction(r.rho, t), static_cast<double>(k));
}

double final_size_pmf(const Parameters& params, std::size_t k) {
  require_size(k, "final_size_pmf");
  return geometric_pmf(params.rates().iso_success, k);
}

double offspring_pmf(const Parameters& params, std::size_t k) {
  if (params.degenerate_delta()) {
    throw std::domain_error("offspring_pmf: undefined without detection (delta = 0)");
  }
  const double s = params.rates().offspring_success;
  return s * power(1.0 - s, static_cast<double>(k));
}

double offspring_mean(const Parameters& params) {
  if (params.degenerate_delta()) {
    throw std::domain_error("offspring_mean: infinite without detection (delta = 0)");
  }
  return (1.0 - params.p()) * params.gamma() / params.delta();
}

double untraceable_intensity(const Parameters& params, double t) {
  require_time(t, "untraceable_intensity");
  const double gamma = params.gamma();
  const double p = params.p();
  const double delta = params.delta();
  if (delta == 0.0) {
    // Clusters grow as Yule processes of rate p gamma and are never isolated.
    if (p == 0.0) return gamma * t;
    return (1.0 - p) / p * std::expm1(p * gamma * t);
  }
  const double limit = (1.0 - p) * gamma / delta;
  const double x = delta * std::expm1(params.rho() * t) / params.rho();
  if (std::isinf(x)) return limit;
  if (x == 0.0) return 0.0;
  return limit / (1.0 + 1.0 / x);
}

double extinction_probability(const Parameters& params) {
  const double delta = params.delta();
  if (params.p() == 1.0) {
    // A single cluster that never branches; it ends iff it is detected.
    return delta > 0.0 ? 1.0 : 0.0;
  }
  const double ratio = delta / ((1.0 - params.p()) * params.gamma());
  return ratio < 1.0 ? ratio : 1.0;
}

std::size_t tail_truncation(const Parameters& params, double eps) {
  if (params.degenerate_delta()) {
    throw std::invalid_argument("tail_truncation: no geometric tail when delta = 0");
  }
  if (!(eps > 0.0)) throw std::invalid_argument("tail_truncation: eps must be > 0");
  const double s = params.rates().iso_success;
  const double q = 1.0 - s;
  if (q <= 0.0) return 1;
  auto tail = [&](std::size_t k) { return power(q, static_cast<double>(k)) / s; };
  auto k = static_cast<std::size_t>(std::max(1.0, std::ceil(std::log(eps * s) / std::log(q))));
  while (k > 1 && tail(k - 1) < eps) --k;
  while (!(tail(k) < eps)) ++k;
  return k;
}

double geometric_pmf(double success, std::size_t k) {
  require_size(k, "geometric_pmf");
  if (success < 0.0 || success > 1.0) {
    throw std::domain_error("geometric_pmf: success probability outside [0, 1]");
  }
  return success * power(1.0 - success, static_cast<double>(k - 1));
}

}  // namespace cmj
