#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "cmj/malthus.hpp"
#include "cmj/numerics.hpp"

using namespace cmj;

namespace {

const std::vector<Parameters>& supercritical_sets() {
  static const std::vector<Parameters> sets = {
      validate(2.0, 0.5, 0.5), validate(1.0, 0.3, 0.2), validate(3.0, 0.7, 0.4),
      validate(1.5, 0.1, 1.0), validate(0.8, 0.6, 0.05)};
  return sets;
}

double tv(const std::vector<double>& a, const Pmf& b) {
  double s = 0.0;
  for (std::size_t k = 1; k <= a.size(); ++k) s += std::abs(a[k - 1] - b(k));
  return 0.5 * s;
}

}  // namespace

TEST_CASE("numerics: beta function and quadrature") {
  CHECK(beta_fn(2.0, 3.0) == doctest::Approx(1.0 / 12.0).epsilon(1e-14));
  CHECK(beta_fn(0.5, 0.5) == doctest::Approx(M_PI).epsilon(1e-14));
  CHECK(std::exp(log_beta(400.0, 300.0)) == doctest::Approx(beta_fn(400.0, 300.0)).epsilon(1e-10));
  CHECK(integrate([](double x) { return std::sqrt(x); }, 0.0, 1.0).value ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(integrate_to_infinity([](double x) { return std::exp(-x); }, 0.0).value ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bisect_decreasing([](double x) { return 2.0 - x * x; }, 0.0, 2.0) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  const std::vector<double> x = {0.0, 1.0, 2.0, 3.0};
  const std::vector<double> y = {1.0, 3.0, 5.0, 7.0};
  CHECK(least_squares_slope(x, y) == doctest::Approx(2.0));
}

TEST_CASE("laplace transform: closed forms and monotonicity") {
  for (const auto& params : supercritical_sets()) {
    const double l0 = (1.0 - params.p()) * params.gamma() / params.delta();
    CHECK(laplace_L(params, 0.0) == doctest::Approx(l0).epsilon(1e-12));
    double prev = laplace_L(params, 0.0);
    for (double theta = 0.05; theta <= 2.0 * params.gamma(); theta += 0.05) {
      const double series = laplace_L(params, theta, LaplaceMethod::Series);
      const double quad = laplace_L(params, theta, LaplaceMethod::Quadrature);
      CHECK(series < prev);
      CHECK(std::abs(series - quad) < 1e-9);
      prev = series;
    }
  }
  const auto p0 = validate(2.0, 0.0, 0.5);
  for (double theta : {0.0, 0.3, 1.5, 4.0}) {
    CHECK(laplace_L(p0, theta) == doctest::Approx(2.0 / (theta + 0.5)).epsilon(1e-14));
    CHECK(laplace_L(p0, theta, LaplaceMethod::Quadrature) ==
          doctest::Approx(2.0 / (theta + 0.5)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(laplace_L(validate(2.0, 0.5, 0.0), 1.0), std::domain_error);
}

TEST_CASE("solve_alpha") {
  CHECK(std::abs(solve_alpha(validate(2.0, 0.0, 0.5)) - 1.5) < 1e-12);
  CHECK(solve_alpha(validate(2.0, 0.5, 0.0)) == 2.0);
  CHECK_THROWS_AS(solve_alpha(validate(2.0, 0.5, 1.0)), std::domain_error);
  CHECK_THROWS_AS(solve_alpha(validate(1.0, 0.9, 0.5)), std::domain_error);
  for (const auto& params : supercritical_sets()) {
    const double tol = 1e-12;
    const double alpha = solve_alpha(params, tol);
    CHECK(alpha > 0.0);
    CHECK(alpha < params.gamma());
    CHECK(std::abs(laplace_L(params, alpha) - 1.0) < tol);
    CHECK(laplace_L(params, alpha - 10.0 * tol) > 1.0);
    CHECK(laplace_L(params, alpha + 10.0 * tol) < 1.0);
    CHECK(solve_alpha(params, tol, LaplaceMethod::Quadrature) == doctest::Approx(alpha).epsilon(1e-10));
  }
}

TEST_CASE("beta constant") {
  CHECK(beta_const(validate(2.0, 0.0, 0.5), 1.5) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(beta_const(validate(2.0, 0.5, 0.0), 2.0) == doctest::Approx(1.0).epsilon(1e-15));
  for (const auto& params : supercritical_sets()) {
    const double alpha = solve_alpha(params);
    const double beta = beta_const(params, alpha);
    CHECK(beta > 0.0);
    double previous_error = 0.0;
    for (double h : {1e-2, 1e-3}) {
      const double fd = (laplace_L(params, alpha - h) - laplace_L(params, alpha + h)) / (2.0 * h);
      const double error = std::abs(beta - fd);
      CHECK(error < 10.0 * h * h);
      if (previous_error > 0.0) CHECK(error < previous_error);
      previous_error = error;
    }
  }
}

TEST_CASE("m_active and m_isolated") {
  for (const auto& params : supercritical_sets()) {
    const double alpha = solve_alpha(params);
    const double rho = params.rho();
    CHECK(m_active(params, alpha, 1) == doctest::Approx(1.0 / (rho + alpha)).epsilon(1e-13));
    for (std::size_t k : {1, 2, 3, 7, 20}) {
      auto integrand = [&](double t) { return std::exp(-alpha * t) * typical_size_pmf(params, t, k); };
      const double oracle = integrate_to_infinity(integrand, 0.0, 1e-14).value;
      CHECK(std::abs(m_active(params, alpha, k) - oracle) < 1e-9);
      // m^i(k) = int e^{-alpha t} P(C(zeta-) = k, zeta <= t) dt.
      auto cumulative = [&](double t) { return std::exp(-alpha * t) * joint_final_size_cdf(params, t, k); };
      const double oracle_i = integrate_to_infinity(cumulative, 0.0, 1e-14).value;
      CHECK(std::abs(m_isolated(params, alpha, k) - oracle_i) < 1e-9);
    }
    const double a = alpha / rho;
    for (std::size_t k = 1; k <= 100; ++k) {
      const double kd = static_cast<double>(k);
      CHECK(a * beta_fn(a, kd + 1.0) == doctest::Approx(kd * beta_fn(1.0 + a, kd)).epsilon(1e-12));
    }
  }
}

TEST_CASE("limiting profiles") {
  for (const auto& params : supercritical_sets()) {
    const auto spec = solve_spectrum(params);
    const std::size_t K = tail_truncation(params);
    REQUIRE(spec.pi_a.size() == K);
    CHECK(spec.pi_a.total() == doctest::Approx(1.0).epsilon(1e-11));
    CHECK(spec.pi_i.total() == doctest::Approx(1.0).epsilon(1e-11));
    CHECK(1.0 - spec.pi_a.total() <= spec.pi_a.tail_bound + 1e-14);
    CHECK(1.0 - spec.pi_i.total() <= spec.pi_i.tail_bound + 1e-14);
    const double mean_a = spec.pi_a.mean();
    for (std::size_t k = 1; k <= K; ++k) {
      CHECK(spec.pi_a(k) >= 0.0);
      CHECK(std::abs(spec.pi_i(k) * mean_a - static_cast<double>(k) * spec.pi_a(k)) < 1e-10);
    }
    // Stochastically smaller than the typical final size.
    const double s = params.rates().iso_success;
    double geo_cdf = 0.0;
    for (std::size_t k = 1; k <= K; ++k) {
      geo_cdf += geometric_pmf(s, k);
      CHECK(spec.pi_i.cdf(k) >= geo_cdf - 1e-12);
    }
    double sum_a = 0.0;
    double sum_i = 0.0;
    for (std::size_t k = 1; k <= K; ++k) {
      sum_a += m_active(params, spec.alpha, k);
      sum_i += m_isolated(params, spec.alpha, k);
    }
    const double rho = params.rho();
    CHECK(spec.c_a * rho * sum_a == doctest::Approx(1.0).epsilon(1e-11));
    CHECK(spec.c_i * rho * rho / params.delta() * sum_i == doctest::Approx(1.0).epsilon(1e-11));
  }
}

TEST_CASE("generator") {
  const auto params = validate(2.0, 0.3, 0.5);
  const SizeFunction zero = [](std::size_t) { return 0.0; };
  const SizeFunction one = [](std::size_t) { return 1.0; };
  const SizeFunction first = [](std::size_t j) { return j == 1 ? 1.0 : 0.0; };
  for (std::size_t k = 1; k < 10; ++k) {
    CHECK(generator_apply(params, zero, k) == 0.0);
    CHECK(generator_apply(params, one, k) == doctest::Approx(static_cast<double>(k) * (0.7 * 2.0 - 0.5)));
  }
  CHECK(generator_apply(params, first, 1) == doctest::Approx(2.0 * (1.0 - 0.6) - 0.5));
}

TEST_CASE("eigen residual") {
  for (const auto& params : supercritical_sets()) {
    const double alpha = solve_alpha(params);
    const std::size_t K = std::max<std::size_t>(tail_truncation(params), 2);
    CHECK(eigen_residual(params, alpha, pi_active(params, alpha, K)) < 1e-8);
  }
  const auto p0 = validate(2.0, 0.0, 0.5);
  CHECK(eigen_residual(p0, 1.5, pi_active(p0, 1.5, 2)) < 1e-12);

  // Residual grows as the truncation shrinks.
  const auto params = validate(2.0, 0.5, 0.5);
  const double alpha = solve_alpha(params);
  double prev = 0.0;
  for (std::size_t K : {71, 40, 20, 10, 5}) {
    const double r = eigen_residual(params, alpha, pi_active(params, alpha, K));
    CHECK(r >= prev);
    prev = r;
  }
  CHECK(prev > 1e-3);
}

TEST_CASE("eigen recurrence") {
  for (const auto& params : supercritical_sets()) {
    const double alpha = solve_alpha(params);
    const std::size_t K = tail_truncation(params);
    const auto rec = nu_recurrence(params, alpha, K);
    CHECK(std::abs(rec.balance_gap) < 1e-9);
    const auto pi_a = pi_active(params, alpha, K);
    const double total = rec.nu.total();
    for (std::size_t k = 1; k <= K; ++k) {
      CHECK(std::abs(rec.nu(k) / total - pi_a(k)) < 1e-10);
      // nu(k) = c q^{k-1} B(1 + r/rho, k) with c = 1.
      const double closed = std::pow(params.growth_ratio(), static_cast<double>(k - 1)) *
                            beta_fn(1.0 + alpha / params.rho(), static_cast<double>(k));
      CHECK(rec.nu(k) == doctest::Approx(closed).epsilon(1e-10));
    }
    // L(2 alpha) < 1: the gap is positive there.
    CHECK(nu_recurrence(params, 2.0 * alpha, K).balance_gap > 1e-3);
    CHECK(solve_alpha_recurrence(params, K) == doctest::Approx(alpha).epsilon(1e-10));
  }
  CHECK(std::abs(solve_alpha_recurrence(validate(2.0, 0.0, 0.5), 1) - 1.5) < 1e-12);
}

TEST_CASE("forward equations") {
  for (const auto& params : supercritical_sets()) {
    const double alpha = solve_alpha(params);
    OdeControl control;
    control.t_max = 40.0;
    const auto traj = integrate_nu(params, control);
    CHECK(std::abs(traj.growth_rate() - alpha) < 1e-4);
    CHECK(traj.leak_fraction < 1e-10);
    REQUIRE(traj.profiles.size() == control.records);
    CHECK(traj.profiles.front()[0] == 1.0);
    for (const auto& row : traj.profiles) {
      for (double v : row) CHECK(v >= 0.0);
    }
    const auto pi_a = pi_active(params, alpha, traj.k_max);
    CHECK(tv(traj.profiles.back(), pi_a) < 1e-3);
  }
  OdeControl control;
  control.t_max = 30.0;
  const auto p0 = integrate_nu(validate(2.0, 0.0, 0.5), control);
  CHECK(std::abs(p0.growth_rate() - 1.5) < 1e-8);

  // p = 1: a single cluster, so nu_t is the law of C(t) on survival.
  const auto lineage = validate(1.0, 1.0, 0.4);
  control.t_max = 5.0;
  control.k_max = 400;
  const auto single = integrate_nu(lineage, control);
  for (std::size_t i = 0; i < single.times.size(); ++i) {
    const double t = single.times[i];
    CHECK(std::exp(single.log_total[i]) == doctest::Approx(1.0 - isolation_cdf(lineage, t)).epsilon(1e-9));
    for (std::size_t k = 1; k <= 30; ++k) {
      const double mass = single.profiles[i][k - 1] * std::exp(single.log_total[i]);
      CHECK(std::abs(mass - typical_size_pmf(lineage, t, k)) < 1e-9);
    }
  }
}

TEST_CASE("Yule-Simon") {
  CHECK(yule_simon_pmf(1.0, 1) == doctest::Approx(0.5).epsilon(1e-15));
  for (std::size_t k = 1; k < 50; ++k) {
    const double kd = static_cast<double>(k);
    CHECK(yule_simon_pmf(1.0, k) == doctest::Approx(1.0 / (kd * (kd + 1.0))).epsilon(1e-12));
  }
  for (double q : {0.3, 0.5, 0.9}) {
    double total = 0.0;
    const std::size_t K = 2000;
    for (std::size_t k = 1; k <= K; ++k) total += yule_simon_pmf(q, k);
    CHECK(total + yule_simon_tail(q, K) == doctest::Approx(1.0).epsilon(1e-12));
  }
  // No detection: pi_a is the Yule-Simon law with parameter p.
  const auto params = validate(2.0, 0.5, 0.0);
  const auto spec = solve_spectrum(params, 1e-12, 500);
  CHECK(spec.alpha == 2.0);
  CHECK(spec.alpha / params.rho() == doctest::Approx(1.0 / 0.5));
  for (std::size_t k = 1; k <= 500; ++k) {
    CHECK(spec.pi_a(k) == doctest::Approx(yule_simon_pmf(0.5, k)).epsilon(1e-12));
  }
  CHECK(spec.pi_a.tail_bound == doctest::Approx(yule_simon_tail(0.5, 500)).epsilon(1e-10));
  CHECK_THROWS(solve_spectrum(params));
}
