#include "cmj/malthus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "cmj/numerics.hpp"

namespace cmj {

namespace {

constexpr std::size_t kMaxSeriesTerms = 100'000'000;

void require_detection(const Parameters& params, const char* who) {
  if (params.degenerate_delta()) {
    throw std::domain_error(std::string(who) + ": requires delta > 0");
  }
}

void require_rho(const Parameters& params, const char* who) {
  if (!(params.rho() > 0.0)) {
    throw std::domain_error(std::string(who) + ": requires rho = delta + p gamma > 0");
  }
}

// log(q^(k-1)) with 0^0 = 1; -inf for q = 0 and k > 1.
double log_ratio_power(double q, std::size_t k) {
  if (k == 1) return 0.0;
  if (q <= 0.0) return -std::numeric_limits<double>::infinity();
  return static_cast<double>(k - 1) * std::log(q);
}

// sum_{j >= 1} weight(j) for a positive, eventually decreasing series whose
// terms are given in log space.
template <class LogTerm>
double sum_series(LogTerm log_term, const char* who) {
  double sum = 0.0;
  for (std::size_t j = 1; j <= kMaxSeriesTerms; ++j) {
    const double term = std::exp(log_term(j));
    sum += term;
    if (j > 1 && term <= 1e-18 * sum) return sum;
  }
  throw NumericalError(std::string(who) + ": series did not converge");
}

double laplace_series(const Parameters& params, double theta) {
  const double rho = params.rho();
  const double q = params.growth_ratio();
  const double a = theta / rho;
  const double prefactor = (1.0 - params.p()) * params.gamma() / rho;
  if (q <= 0.0) return prefactor / (1.0 + a);
  const double log_q = std::log(q);
  const double sum = sum_series(
      [&](std::size_t j) {
        const double jd = static_cast<double>(j);
        return std::log(jd) + (jd - 1.0) * log_q + log_beta(1.0 + a, jd);
      },
      "laplace_L");
  return prefactor * sum;
}

double laplace_quadrature(const Parameters& params, double theta) {
  const double rho = params.rho();
  const double delta = params.delta();
  const double a = theta / rho;
  const double prefactor = (1.0 - params.p()) * params.gamma() * rho;
  if (prefactor == 0.0) return 0.0;
  auto integrand = [&](double x) {
    const double d = (rho - delta) * x + delta;
    return std::pow(x, a) / (d * d);
  };
  return prefactor * integrate(integrand, 0.0, 1.0, 1e-13 / prefactor).value;
}

}  // namespace

double Pmf::total() const {
  double s = 0.0;
  for (double m : mass) s += m;
  return s;
}

double Pmf::mean() const {
  double s = 0.0;
  for (std::size_t k = 1; k <= mass.size(); ++k) s += static_cast<double>(k) * mass[k - 1];
  return s;
}

double Pmf::cdf(std::size_t k) const {
  double s = 0.0;
  for (std::size_t j = 1; j <= std::min(k, mass.size()); ++j) s += mass[j - 1];
  return s;
}

double laplace_L(const Parameters& params, double theta, LaplaceMethod method) {
  require_detection(params, "laplace_L");
  if (!(theta >= 0.0)) throw std::domain_error("laplace_L: theta must be >= 0");
  return method == LaplaceMethod::Series ? laplace_series(params, theta)
                                         : laplace_quadrature(params, theta);
}

double solve_alpha(const Parameters& params, double tol, LaplaceMethod method) {
  if (regime(params) != Regime::Supercritical) {
    throw std::domain_error("solve_alpha: no positive Malthusian parameter outside the supercritical regime");
  }
  if (!(tol > 0.0)) throw std::invalid_argument("solve_alpha: tol must be > 0");
  if (params.degenerate_delta()) return params.gamma();

  auto excess = [&](double theta) { return laplace_L(params, theta, method) - 1.0; };
  double lo = 1e-8;
  if (!(excess(lo) > 0.0)) lo = 0.0;
  double hi = params.gamma();
  while (!(excess(hi) < 0.0)) {
    hi *= 2.0;
    if (!std::isfinite(hi)) throw NumericalError("solve_alpha: failed to bracket the root");
  }
  const double alpha = bisect_decreasing(excess, lo, hi);
  const double residual = std::abs(excess(alpha));
  if (!(residual < tol)) {
    throw NumericalError("solve_alpha: |L(alpha) - 1| = " + std::to_string(residual) +
                         " exceeds tolerance");
  }
  return alpha;
}

double beta_const(const Parameters& params, double alpha) {
  if (!(alpha > 0.0)) throw std::domain_error("beta_const: alpha must be > 0");
  const double untraceable = (1.0 - params.p()) * params.gamma();
  if (params.degenerate_delta()) return 1.0 / untraceable;
  const double rho = params.rho();
  const double delta = params.delta();
  // t e^{(rho - alpha) t} / (1 + delta (e^{rho t} - 1) / rho)^2, rewritten in
  // y = e^{-rho t} so that no exponential overflows.
  auto integrand = [&](double t) {
    const double y = std::exp(-rho * t);
    const double d = rho * y + delta * (1.0 - y);
    return t * std::exp(-alpha * t) * rho * rho * y / (d * d);
  };
  return untraceable * integrate_to_infinity(integrand, 0.0, 1e-14 / untraceable).value;
}

double m_active(const Parameters& params, double alpha, std::size_t k) {
  require_rho(params, "m_active");
  if (k < 1) throw std::domain_error("m_active: k must be >= 1");
  const double rho = params.rho();
  const double kd = static_cast<double>(k);
  return std::exp(-std::log(rho) + log_ratio_power(params.growth_ratio(), k) +
                  log_beta(1.0 + alpha / rho, kd));
}

double m_isolated(const Parameters& params, double alpha, std::size_t k) {
  require_rho(params, "m_isolated");
  if (k < 1) throw std::domain_error("m_isolated: k must be >= 1");
  if (!(alpha > 0.0)) throw std::domain_error("m_isolated: alpha must be > 0");
  if (params.degenerate_delta()) return 0.0;
  const double rho = params.rho();
  const double kd = static_cast<double>(k);
  return std::exp(std::log(params.delta()) - 2.0 * std::log(rho) +
                  log_ratio_power(params.growth_ratio(), k) + log_beta(alpha / rho, kd + 1.0));
}

double active_normalizer(const Parameters& params, double alpha) {
  require_rho(params, "active_normalizer");
  const double a = alpha / params.rho();
  const double q = params.growth_ratio();
  if (q <= 0.0) return 1.0 + a;
  // Without detection sum_j B(1 + a, j) = 1/a (Yule-Simon normalization).
  if (q >= 1.0) return a;
  const double log_q = std::log(q);
  const double sum = sum_series(
      [&](std::size_t j) {
        const double jd = static_cast<double>(j);
        return (jd - 1.0) * log_q + log_beta(1.0 + a, jd);
      },
      "active_normalizer");
  return 1.0 / sum;
}

double isolated_normalizer(const Parameters& params, double alpha) {
  require_detection(params, "isolated_normalizer");
  if (!(alpha > 0.0)) throw std::domain_error("isolated_normalizer: alpha must be > 0");
  const double a = alpha / params.rho();
  const double q = params.growth_ratio();
  if (q <= 0.0) return 1.0 / beta_fn(a, 2.0);
  const double log_q = std::log(q);
  const double sum = sum_series(
      [&](std::size_t j) {
        const double jd = static_cast<double>(j);
        return (jd - 1.0) * log_q + log_beta(a, jd + 1.0);
      },
      "isolated_normalizer");
  return 1.0 / sum;
}

Pmf pi_active(const Parameters& params, double alpha, std::size_t K) {
  if (K < 1) throw std::invalid_argument("pi_active: K must be >= 1");
  const double c_a = active_normalizer(params, alpha);
  const double a = alpha / params.rho();
  const double q = params.growth_ratio();
  Pmf pmf;
  pmf.mass.resize(K);
  for (std::size_t k = 1; k <= K; ++k) {
    pmf.mass[k - 1] = std::exp(std::log(c_a) + log_ratio_power(q, k) +
                               log_beta(1.0 + a, static_cast<double>(k)));
  }
  const double Kd = static_cast<double>(K);
  if (q <= 0.0) {
    pmf.tail_bound = 0.0;
  } else if (q >= 1.0) {
    pmf.tail_bound = yule_simon_tail(1.0 / a, K);
  } else {
    pmf.tail_bound = c_a * beta_fn(1.0 + a, Kd + 1.0) * std::pow(q, Kd) / (1.0 - q);
  }
  return pmf;
}

Pmf pi_isolated(const Parameters& params, double alpha, std::size_t K) {
  if (K < 1) throw std::invalid_argument("pi_isolated: K must be >= 1");
  const double c_i = isolated_normalizer(params, alpha);
  const double a = alpha / params.rho();
  const double q = params.growth_ratio();
  Pmf pmf;
  pmf.mass.resize(K);
  for (std::size_t k = 1; k <= K; ++k) {
    pmf.mass[k - 1] = std::exp(std::log(c_i) + log_ratio_power(q, k) +
                               log_beta(a, static_cast<double>(k) + 1.0));
  }
  const double Kd = static_cast<double>(K);
  pmf.tail_bound = q <= 0.0 ? 0.0 : c_i * beta_fn(a, Kd + 2.0) * std::pow(q, Kd) / (1.0 - q);
  return pmf;
}

SpectralSolution solve_spectrum(const Parameters& params, double tol, std::size_t K) {
  if (K == 0) {
    if (params.degenerate_delta()) {
      throw std::invalid_argument("solve_spectrum: an explicit truncation is required when delta = 0");
    }
    K = tail_truncation(params);
  }
  SpectralSolution s;
  s.solver_tol = tol;
  s.alpha = solve_alpha(params, tol);
  s.beta = beta_const(params, s.alpha);
  s.c_a = active_normalizer(params, s.alpha);
  s.pi_a = pi_active(params, s.alpha, K);
  if (!params.degenerate_delta()) {
    s.c_i = isolated_normalizer(params, s.alpha);
    s.pi_i = pi_isolated(params, s.alpha, K);
  }
  return s;
}

double generator_apply(const Parameters& params, const SizeFunction& f, std::size_t k) {
  if (k < 1) throw std::domain_error("generator_apply: k must be >= 1");
  const double pg = params.p() * params.gamma();
  const double upg = (1.0 - params.p()) * params.gamma();
  const double fk = f(k);
  return static_cast<double>(k) * (pg * (f(k + 1) - fk) + upg * f(1) - params.delta() * fk);
}

double eigen_residual(const Parameters& params, double alpha, const Pmf& pi_a) {
  const std::size_t K = pi_a.size();
  if (K < 2) throw std::invalid_argument("eigen_residual: need K >= 2");
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 <= K; ++k) {
    const SizeFunction indicator = [k](std::size_t j) { return j == k ? 1.0 : 0.0; };
    double pairing = 0.0;
    for (std::size_t j = 1; j <= K; ++j) pairing += pi_a(j) * generator_apply(params, indicator, j);
    worst = std::max(worst, std::abs(pairing - alpha * pi_a(k)));
  }
  return worst;
}

NuRecurrence nu_recurrence(const Parameters& params, double r, std::size_t K) {
  require_rho(params, "nu_recurrence");
  if (!(r > 0.0)) throw std::domain_error("nu_recurrence: r must be > 0");
  if (K < 1) throw std::invalid_argument("nu_recurrence: K must be >= 1");
  const double rho = params.rho();
  const double pg = params.p() * params.gamma();
  NuRecurrence out;
  out.nu.mass.resize(K);
  out.nu.mass[0] = rho / (r + rho);
  for (std::size_t k = 2; k <= K; ++k) {
    const double kd = static_cast<double>(k);
    out.nu.mass[k - 1] = pg * (kd - 1.0) / (r + rho * kd) * out.nu.mass[k - 2];
  }
  // Successive ratios are below q = 1 - delta/rho.
  const double q = params.growth_ratio();
  out.nu.tail_bound = q < 1.0 ? out.nu.mass[K - 1] * q / (1.0 - q)
                              : std::numeric_limits<double>::infinity();
  out.balance_gap = (r + rho) * out.nu.mass[0] - (1.0 - params.p()) * params.gamma() * out.nu.mean();
  return out;
}

double solve_alpha_recurrence(const Parameters& params, std::size_t K) {
  if (regime(params) != Regime::Supercritical) {
    throw std::domain_error("solve_alpha_recurrence: requires the supercritical regime");
  }
  auto deficit = [&](double r) { return -nu_recurrence(params, r, K).balance_gap; };
  const double lo = 1e-10;
  double hi = params.gamma();
  while (!(deficit(hi) < 0.0)) {
    hi *= 2.0;
    if (!std::isfinite(hi)) throw NumericalError("solve_alpha_recurrence: failed to bracket");
  }
  return bisect_decreasing(deficit, lo, hi);
}

double NuTrajectory::growth_rate() const {
  if (times.size() < 4) throw std::invalid_argument("growth_rate: trajectory too short");
  const double start = 0.75 * times.back();
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] >= start) {
      x.push_back(times[i]);
      y.push_back(log_total[i]);
    }
  }
  return least_squares_slope(x, y);
}

NuTrajectory integrate_nu(const Parameters& params, const OdeControl& control) {
  require_rho(params, "integrate_nu");
  if (!(control.t_max > 0.0)) throw std::invalid_argument("integrate_nu: t_max must be > 0");
  if (control.records < 2) throw std::invalid_argument("integrate_nu: need at least two records");
  std::size_t K = control.k_max;
  if (K == 0) {
    if (params.degenerate_delta()) {
      throw std::invalid_argument("integrate_nu: k_max is required when delta = 0");
    }
    K = 4 * tail_truncation(params);
  }
  const double rho = params.rho();
  const double pg = params.p() * params.gamma();
  const double upg = (1.0 - params.p()) * params.gamma();

  // state[0..K-1] = nu(1..K), state[K] = cumulative leak past K.
  const std::size_t n = K + 1;
  auto derivative = [&](const std::vector<double>& s, std::vector<double>& ds) {
    double first_moment = 0.0;
    for (std::size_t k = 1; k <= K; ++k) first_moment += static_cast<double>(k) * s[k - 1];
    ds[0] = -rho * s[0] + upg * first_moment;
    for (std::size_t k = 2; k <= K; ++k) {
      const double kd = static_cast<double>(k);
      ds[k - 1] = -rho * kd * s[k - 1] + pg * (kd - 1.0) * s[k - 2];
    }
    ds[K] = pg * static_cast<double>(K) * s[K - 1];
  };

  NuTrajectory traj;
  traj.k_max = K;
  const double interval = control.t_max / static_cast<double>(control.records - 1);
  const double h_max =
      control.step_scale * std::min(1.0 / (rho * static_cast<double>(K)), 0.005 / params.gamma());
  const auto substeps = static_cast<std::size_t>(std::ceil(interval / h_max));
  const double h = interval / static_cast<double>(substeps);
  traj.step = h;

  std::vector<double> state(n, 0.0);
  state[0] = 1.0;
  double log_scale = 0.0;
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);

  auto record = [&](double t) {
    double total = 0.0;
    for (std::size_t k = 0; k < K; ++k) total += state[k];
    traj.times.push_back(t);
    traj.log_total.push_back(log_scale + std::log(total));
    std::vector<double> profile(state.begin(), state.begin() + static_cast<std::ptrdiff_t>(K));
    for (double& v : profile) v /= total;
    traj.profiles.push_back(std::move(profile));
  };

  record(0.0);
  for (std::size_t r = 1; r < control.records; ++r) {
    for (std::size_t s = 0; s < substeps; ++s) {
      derivative(state, k1);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + 0.5 * h * k1[i];
      derivative(tmp, k2);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + 0.5 * h * k2[i];
      derivative(tmp, k3);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = state[i] + h * k3[i];
      derivative(tmp, k4);
      for (std::size_t i = 0; i < n; ++i) {
        state[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      }
      // Keep the linear system in range; the leak is rescaled with it.
      double total = 0.0;
      for (std::size_t k = 0; k < K; ++k) total += state[k];
      if (total > 1e100 || (total < 1e-100 && total > 0.0)) {
        for (double& v : state) v /= total;
        log_scale += std::log(total);
      }
    }
    record(static_cast<double>(r) * interval);
  }

  double final_total = 0.0;
  for (std::size_t k = 0; k < K; ++k) final_total += state[k];
  traj.leak_fraction = state[K] / final_total;
  if (traj.leak_fraction > control.leak_tol) {
    throw NumericalError("integrate_nu: truncation leak " + std::to_string(traj.leak_fraction) +
                         " exceeds tolerance; raise k_max");
  }
  return traj;
}

double yule_simon_pmf(double q, std::size_t k) {
  if (!(q > 0.0 && q <= 1.0)) throw std::domain_error("yule_simon_pmf: q must lie in (0, 1]");
  if (k < 1) throw std::domain_error("yule_simon_pmf: k must be >= 1");
  return std::exp(-std::log(q) + log_beta(1.0 + 1.0 / q, static_cast<double>(k)));
}

double yule_simon_tail(double q, std::size_t K) {
  if (!(q > 0.0 && q <= 1.0)) throw std::domain_error("yule_simon_tail: q must lie in (0, 1]");
  if (K == 0) return 1.0;
  const double Kd = static_cast<double>(K);
  return Kd * beta_fn(Kd, 1.0 / q + 1.0);
}

}  // namespace cmj
