#include "cmj/paradox.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "cmj/numerics.hpp"

namespace cmj::paradox {

LifespanSpec LifespanSpec::point_mass(double lifespan) {
  if (!(lifespan > 0.0) || !std::isfinite(lifespan)) {
    throw std::invalid_argument("point_mass: lifespan must be positive and finite");
  }
  return {Kind::PointMass, lifespan};
}

LifespanSpec LifespanSpec::exponential(double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw std::invalid_argument("exponential: rate must be positive and finite");
  }
  return {Kind::Exponential, rate};
}

LifespanSpec LifespanSpec::tabulated(std::vector<double> u, std::vector<double> lifespan) {
  if (u.size() != lifespan.size() || u.size() < 2) {
    throw std::invalid_argument("tabulated: need at least two (u, lifespan) knots");
  }
  if (u.front() != 0.0 || u.back() != 1.0) throw std::invalid_argument("tabulated: u must span [0, 1]");
  if (!(lifespan.front() >= 0.0) || !std::isfinite(lifespan.back())) {
    throw std::invalid_argument("tabulated: lifespans must be finite and nonnegative");
  }
  for (std::size_t i = 1; i < u.size(); ++i) {
    if (!(u[i] > u[i - 1]) || !(lifespan[i] > lifespan[i - 1])) {
      throw std::invalid_argument("tabulated: knots must be strictly increasing in both coordinates");
    }
  }
  LifespanSpec spec(Kind::Tabulated, 0.0);
  spec.u_ = std::move(u);
  spec.ell_ = std::move(lifespan);
  return spec;
}

double LifespanSpec::quantile(double u) const {
  switch (kind_) {
    case Kind::PointMass:
      return param_;
    case Kind::Exponential:
      return -std::log1p(-u) / param_;
    case Kind::Tabulated: {
      const auto it = std::upper_bound(u_.begin(), u_.end(), u);
      if (it == u_.end()) return ell_.back();
      const auto hi = static_cast<std::size_t>(it - u_.begin());
      const std::size_t lo = hi - 1;
      const double w = (u - u_[lo]) / (u_[hi] - u_[lo]);
      return ell_[lo] + w * (ell_[hi] - ell_[lo]);
    }
  }
  return 0.0;
}

double LifespanSpec::sample(Rng& rng) const {
  if (kind_ == Kind::PointMass) return param_;
  if (kind_ == Kind::Exponential) return rng.exponential(param_);
  return quantile(rng.uniform());
}

double Intensity::cumulative(double t) const {
  if (kind == Kind::Exponential) return std::expm1(t);
  return std::pow(t, r + 1.0) / (r + 1.0);
}

double Intensity::inverse_cumulative(double s) const {
  if (kind == Kind::Exponential) return std::log1p(s);
  return std::pow(s * (r + 1.0), 1.0 / (r + 1.0));
}

CohortSample sample_cohort(const LifespanSpec& spec, Intensity intensity, double t, std::uint64_t seed) {
  if (!(t > 0.0)) throw std::invalid_argument("sample_cohort: horizon must be > 0");
  if (intensity.kind == Intensity::Kind::Exponential && t > kMaxExponentialHorizon) {
    throw std::invalid_argument("sample_cohort: exponential horizon capped at 30");
  }
  if (intensity.kind == Intensity::Kind::Polynomial && !(intensity.r > 0.0)) {
    throw std::invalid_argument("sample_cohort: polynomial exponent must be > 0");
  }
  Rng rng(seed);
  const double mass = intensity.cumulative(t);
  std::poisson_distribution<std::uint64_t> count(mass);
  const std::uint64_t n = count(rng);

  CohortSample sample;
  sample.horizon = t;
  sample.intensity = intensity;
  sample.atoms.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const double b = std::min(t, intensity.inverse_cumulative(rng.uniform() * mass));
    sample.atoms.push_back({b, spec.sample(rng)});
  }
  std::sort(sample.atoms.begin(), sample.atoms.end(),
            [](const Atom& x, const Atom& y) { return x.birth < y.birth; });
  return sample;
}

DeadMean dead_mean(const CohortSample& sample, double t, const LifespanFunction& f) {
  DeadMean out;
  double sum = 0.0;
  for (const Atom& a : sample.atoms) {
    if (a.birth > t) break;
    if (a.birth + a.lifespan <= t) {
      sum += f(a.lifespan);
      ++out.n_dead;
    }
  }
  if (out.n_dead > 0) out.mean = sum / static_cast<double>(out.n_dead);
  return out;
}

namespace {

// <lambda, g> for a generic integrand g of the lifespan.
double integrate_against(const LifespanSpec& spec, const LifespanFunction& g) {
  switch (spec.kind()) {
    case LifespanSpec::Kind::PointMass:
      return g(spec.parameter());
    case LifespanSpec::Kind::Exponential: {
      const double rate = spec.parameter();
      return integrate_to_infinity([&](double l) { return g(l) * rate * std::exp(-rate * l); }, 0.0)
          .value;
    }
    case LifespanSpec::Kind::Tabulated: {
      const auto& u = spec.knots_u();
      double total = 0.0;
      for (std::size_t i = 1; i < u.size(); ++i) {
        total += integrate([&](double v) { return g(spec.quantile(v)); }, u[i - 1], u[i]).value;
      }
      return total;
    }
  }
  return 0.0;
}

}  // namespace

double lambda_expectation(const LifespanSpec& spec, const LifespanFunction& f) {
  return integrate_against(spec, f);
}

double lambda1_expectation(const LifespanSpec& spec, const LifespanFunction& f) {
  const double norm = integrate_against(spec, [](double l) { return std::exp(-l); });
  if (!(norm > 0.0)) throw NumericalError("lambda1_expectation: vanishing normalizer");
  return integrate_against(spec, [&](double l) { return f(l) * std::exp(-l); }) / norm;
}

std::vector<ParadoxRow> paradox_table(const LifespanSpec& spec, Intensity intensity,
                                      const std::vector<double>& horizons, std::uint64_t seed_base) {
  const auto identity = [](double l) { return l; };
  const double lambda1 = lambda1_expectation(spec, identity);
  const double lambda = lambda_expectation(spec, identity);
  std::vector<ParadoxRow> rows(horizons.size());
  std::vector<std::exception_ptr> errors(horizons.size());
  const auto n = static_cast<std::int64_t>(horizons.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    try {
      const double t = horizons[idx];
      const CohortSample sample = sample_cohort(spec, intensity, t, derive_seed(seed_base, idx));
      const DeadMean dm = dead_mean(sample, t, identity);
      rows[idx] = {t, dm.n_dead, dm.mean, lambda1, lambda};
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

}  // namespace cmj::paradox
