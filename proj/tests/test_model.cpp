#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "cmj/model.hpp"
#include "cmj/rng.hpp"

using namespace cmj;

namespace {

// Supercritical and subcritical triples used by the property checks.
std::vector<Parameters> parameter_grid() {
  std::vector<Parameters> grid;
  Rng rng(20240611);
  for (int i = 0; i < 40; ++i) {
    const double gamma = 0.2 + 3.0 * rng.uniform();
    const double p = 0.05 + 0.9 * rng.uniform();
    const double delta = 0.05 + 2.0 * rng.uniform();
    grid.push_back(validate(gamma, p, delta));
  }
  return grid;
}

}  // namespace

TEST_CASE("validate") {
  const auto params = validate(2.0, 0.5, 0.5);
  CHECK(params.rho() == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(params.rates().iso_success == doctest::Approx(1.0 / 3.0));
  CHECK(params.rates().offspring_success == doctest::Approx(1.0 / 3.0));
  CHECK_FALSE(params.degenerate_delta());

  CHECK_THROWS_AS(validate(-1.0, 0.5, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(validate(0.0, 0.5, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(validate(2.0, 1.5, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(validate(2.0, -0.1, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(validate(2.0, 0.5, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(validate(NAN, 0.5, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(validate(INFINITY, 0.5, 0.5), std::invalid_argument);

  const auto degenerate = validate(2.0, 0.5, 0.0);
  CHECK(degenerate.degenerate_delta());
  CHECK(degenerate.rho() == 1.0);

  for (const auto& q : parameter_grid()) {
    CHECK(q.rho() > 0.0);
    CHECK(q.rates().iso_success >= 0.0);
    CHECK(q.rates().iso_success <= 1.0);
    CHECK(q.rates().offspring_success >= 0.0);
    CHECK(q.rates().offspring_success <= 1.0);
  }
}

TEST_CASE("regime") {
  CHECK(regime(validate(2.0, 0.5, 0.5)) == Regime::Supercritical);
  CHECK(regime(validate(2.0, 0.5, 1.0)) == Regime::Critical);
  CHECK(regime(validate(1.0, 0.9, 0.5)) == Regime::Subcritical);
  CHECK(regime(validate(1.0, 1.0, 0.5)) == Regime::Subcritical);
  CHECK(regime(validate(1.0, 0.3, 0.0)) == Regime::Supercritical);
  CHECK(to_string(Regime::Critical) == "critical");
}

TEST_CASE("typical cluster at t = 0") {
  for (const auto& params : parameter_grid()) {
    CHECK(typical_size_pmf(params, 0.0, 1) == 1.0);
    CHECK(typical_size_pmf(params, 0.0, 2) == 0.0);
    CHECK(isolation_cdf(params, 0.0) == 0.0);
    CHECK(joint_final_size_cdf(params, 0.0, 3) == 0.0);
  }
}

TEST_CASE("typical_size_pmf direct substitution") {
  // rho = 1: delta = 0.5, p gamma = 0.5.
  const auto params = validate(1.0, 0.5, 0.5);
  CHECK(typical_size_pmf(params, std::log(2.0), 1) == doctest::Approx(0.5).epsilon(1e-14));
  // k = 2: q (1 - e^{-t}) e^{-t} with q = 1/2.
  CHECK(typical_size_pmf(params, std::log(2.0), 2) == doctest::Approx(0.125).epsilon(1e-14));
}

TEST_CASE("size pmf and isolation cdf are complementary") {
  for (const auto& params : parameter_grid()) {
    const std::size_t K = tail_truncation(params, 1e-14);
    for (double t : {0.1, 0.5, 1.0, 3.0, 10.0}) {
      double total = isolation_cdf(params, t);
      for (std::size_t k = 1; k <= K; ++k) total += typical_size_pmf(params, t, k);
      CHECK(total == doctest::Approx(1.0).epsilon(1e-11));
    }
  }
}

TEST_CASE("isolation cdf limits and monotonicity") {
  for (const auto& params : parameter_grid()) {
    double prev = 0.0;
    for (double t = 0.05; t < 20.0; t += 0.05) {
      const double f = isolation_cdf(params, t);
      CHECK(f >= prev);
      prev = f;
    }
    CHECK(isolation_cdf(params, 1e3) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("joint law converges to the geometric final size") {
  for (const auto& params : parameter_grid()) {
    const double s = params.rates().iso_success;
    // e^{-rho t} < 1e-12
    const double t = 28.0 / params.rho() + 1.0;
    double total = 0.0;
    for (std::size_t k = 1; k <= 60; ++k) {
      const double geo = s * std::pow(1.0 - s, static_cast<double>(k - 1));
      CHECK(std::abs(joint_final_size_cdf(params, t, k) - geo) < 1e-10);
      CHECK(final_size_pmf(params, k) == doctest::Approx(geo).epsilon(1e-12));
      total += final_size_pmf(params, k);
    }
    CHECK(total <= 1.0 + 1e-12);
  }
  // Summing the joint law over k gives the isolation cdf.
  const auto params = validate(2.0, 0.5, 0.5);
  for (double t : {0.3, 1.0, 2.0}) {
    double s = 0.0;
    for (std::size_t k = 1; k <= 400; ++k) s += joint_final_size_cdf(params, t, k);
    CHECK(s == doctest::Approx(isolation_cdf(params, t)).epsilon(1e-12));
  }
}

TEST_CASE("offspring law") {
  CHECK(offspring_pmf(validate(2.0, 0.5, 1.0), 0) == doctest::Approx(0.5));
  for (const auto& params : parameter_grid()) {
    double total = 0.0;
    double mean = 0.0;
    for (std::size_t k = 0; k < 20000; ++k) {
      const double w = offspring_pmf(params, k);
      total += w;
      mean += static_cast<double>(k) * w;
      if (w < 1e-20 && k > 10) break;
    }
    const double expected = (1.0 - params.p()) * params.gamma() / params.delta();
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mean == doctest::Approx(expected).epsilon(1e-12));
    CHECK(offspring_mean(params) == doctest::Approx(expected).epsilon(1e-15));
  }
  CHECK_THROWS_AS(offspring_pmf(validate(2.0, 0.5, 0.0), 1), std::domain_error);
}

TEST_CASE("untraceable intensity") {
  for (const auto& params : parameter_grid()) {
    const double limit = (1.0 - params.p()) * params.gamma() / params.delta();
    CHECK(untraceable_intensity(params, 0.0) == 0.0);
    double prev = 0.0;
    for (double t = 0.1; t < 50.0; t += 0.1) {
      const double mu = untraceable_intensity(params, t);
      CHECK(mu >= prev);
      CHECK(mu <= limit * (1.0 + 1e-14));
      prev = mu;
    }
    CHECK(untraceable_intensity(params, 1e4) == doctest::Approx(limit).epsilon(1e-12));
  }
  // mu(t) = (1 - p) gamma int_0^t P(zeta > s) E(C(s) | zeta > s) ds, checked by a Riemann sum.
  const auto params = validate(2.0, 0.5, 0.5);
  const double t = 2.0;
  const std::size_t n = 20000;
  double integral = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = (static_cast<double>(i) + 0.5) * t / static_cast<double>(n);
    double mean_size = 0.0;
    for (std::size_t k = 1; k <= 300; ++k) mean_size += static_cast<double>(k) * typical_size_pmf(params, s, k);
    integral += mean_size * t / static_cast<double>(n);
  }
  CHECK(untraceable_intensity(params, t) == doctest::Approx(0.5 * 2.0 * integral).epsilon(1e-7));

  // No detection: ((1 - p)/p)(e^{p gamma t} - 1).
  const auto yule = validate(2.0, 0.5, 0.0);
  CHECK(untraceable_intensity(yule, 1.0) == doctest::Approx(std::expm1(1.0)).epsilon(1e-14));
  const auto plain = validate(2.0, 0.0, 0.0);
  CHECK(untraceable_intensity(plain, 1.5) == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("extinction probability") {
  CHECK(extinction_probability(validate(2.0, 0.5, 0.5)) == doctest::Approx(0.5));
  CHECK(extinction_probability(validate(1.0, 0.9, 0.5)) == 1.0);
  CHECK(extinction_probability(validate(2.0, 0.5, 1.0)) == 1.0);
  CHECK(extinction_probability(validate(1.0, 1.0, 0.5)) == 1.0);
  CHECK(extinction_probability(validate(2.0, 0.5, 0.0)) == 0.0);
  for (const auto& params : parameter_grid()) {
    const double e = extinction_probability(params);
    CHECK(e > 0.0);
    CHECK(e <= 1.0);
    CHECK((e < 1.0) == (regime(params) == Regime::Supercritical));
  }
}

TEST_CASE("tail truncation") {
  const auto params = validate(2.0, 0.5, 0.5);
  const std::size_t K = tail_truncation(params);
  const double s = 1.0 / 3.0;
  CHECK(std::pow(1.0 - s, static_cast<double>(K)) / s < 1e-12);
  CHECK(std::pow(1.0 - s, static_cast<double>(K - 1)) / s >= 1e-12);
  CHECK(tail_truncation(validate(2.0, 0.0, 0.5)) == 1);
  CHECK_THROWS_AS(tail_truncation(validate(2.0, 0.5, 0.0)), std::invalid_argument);
}

TEST_CASE("degenerate p") {
  const auto singletons = validate(2.0, 0.0, 0.5);
  CHECK(typical_size_pmf(singletons, 1.0, 1) == doctest::Approx(std::exp(-0.5)));
  CHECK(typical_size_pmf(singletons, 1.0, 2) == 0.0);
  CHECK(final_size_pmf(singletons, 1) == 1.0);
  const auto lineage = validate(2.0, 1.0, 0.5);
  CHECK(untraceable_intensity(lineage, 3.0) == 0.0);
  CHECK(offspring_pmf(lineage, 0) == 1.0);
}
