#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "cmj/io.hpp"
#include "cmj/malthus.hpp"
#include "cmj/model.hpp"
#include "cmj/paradox.hpp"
#include "cmj/sim.hpp"
#include "cmj/stats.hpp"
#include "output.hpp"

namespace cmjtrace {

using cmj::io::Cell;
using cmj::io::Table;

namespace {

constexpr std::uint64_t kDefaultCompareCap = 20000;
constexpr std::uint64_t kDefaultYuleClusters = 100000;
constexpr std::size_t kDefaultYuleTruncation = 100000;

Format parse_format(const std::string& name) {
  if (name == "csv") return Format::Csv;
  if (name == "json") return Format::Json;
  throw UsageError("unknown --format '" + name + "' (expected csv or json)");
}

cmj::Parameters params_of(const RunConfig& cfg, double default_delta = 0.5) {
  return cmj::validate(cfg.gamma, cfg.p, cfg.delta.value_or(default_delta));
}

cmj::StopCondition stop_of(const RunConfig& cfg) {
  cmj::StopCondition stop;
  stop.t_max = cfg.t_max;
  stop.max_individuals = cfg.max_individuals;
  stop.max_clusters = cfg.max_clusters;
  stop.max_events = cfg.max_events;
  stop.max_generation = cfg.max_generation;
  return stop;
}

template <class T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

Cell optional_cell(const std::optional<double>& v) { return v ? Cell(*v) : Cell(); }

Json base_config(const RunConfig& cfg, const cmj::Parameters& params) {
  Json c;
  c["gamma"] = params.gamma();
  c["p"] = params.p();
  c["delta"] = params.delta();
  c["seed"] = cfg.seed;
  c["replicates"] = cfg.replicates;
  c["format"] = cfg.format;
  c["trunc_k"] = cfg.trunc_k;
  c["tol"] = cfg.tol;
  return c;
}

Json stop_json(const cmj::StopCondition& stop) {
  Json s;
  s["t_max"] = optional_json(stop.t_max);
  s["max_individuals"] = optional_json(stop.max_individuals);
  s["max_clusters"] = optional_json(stop.max_clusters);
  s["max_events"] = optional_json(stop.max_events);
  s["max_generation"] = optional_json(stop.max_generation);
  return s;
}

Json chi_square_json(const cmj::ChiSquareResult& r) {
  Json j;
  j["statistic"] = r.statistic;
  j["dof"] = r.dof;
  j["p_value"] = r.p_value;
  j["bins"] = r.bins;
  return j;
}

std::size_t truncation(const RunConfig& cfg, const cmj::Parameters& params) {
  if (cfg.trunc_k > 0) return cfg.trunc_k;
  if (params.degenerate_delta()) throw UsageError("--trunc-k is required when delta = 0");
  return cmj::tail_truncation(params);
}

cmj::Pmf geometric_reference(const cmj::Parameters& params, std::size_t K) {
  cmj::Pmf geo;
  const double s = params.rates().iso_success;
  for (std::size_t k = 1; k <= K; ++k) geo.mass.push_back(cmj::geometric_pmf(s, k));
  geo.tail_bound = std::pow(1.0 - s, static_cast<double>(K));
  return geo;
}

std::string replicate_dir(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "rep_%04zu", i);
  return buf;
}

}  // namespace

int cmd_analyze(const RunConfig& cfg) {
  const auto params = params_of(cfg);
  OutputDir out(cfg.out, parse_format(cfg.format));
  const auto reg = cmj::regime(params);
  const bool supercritical = reg == cmj::Regime::Supercritical;

  Json spectral;
  spectral["regime"] = std::string(cmj::to_string(reg));
  spectral["rho"] = params.rho();
  spectral["extinction_probability"] = cmj::extinction_probability(params);
  Table dist(cmj::io::kDistHeader);

  std::size_t K = cfg.trunc_k;
  if (K == 0 && !params.degenerate_delta()) K = cmj::tail_truncation(params);
  if (supercritical) {
    K = truncation(cfg, params);
    const auto spec = cmj::solve_spectrum(params, cfg.tol, K);
    spectral["alpha"] = spec.alpha;
    spectral["beta"] = spec.beta;
    spectral["c_a"] = spec.c_a;
    spectral["c_i"] = spec.c_i;
    spectral["truncation"] = K;
    spectral["tail_bound_pi_a"] = spec.pi_a.tail_bound;
    spectral["tail_bound_pi_i"] = spec.pi_i.tail_bound;
    for (std::size_t k = 1; k <= K; ++k) {
      Cell geo;
      if (!params.degenerate_delta()) geo = cmj::geometric_pmf(params.rates().iso_success, k);
      dist.add({std::uint64_t{k}, spec.pi_a(k), spec.pi_i(k), geo, cmj::m_active(params, spec.alpha, k),
                cmj::m_isolated(params, spec.alpha, k)});
    }
  } else {
    spectral["alpha"] = nullptr;
    spectral["beta"] = nullptr;
    spectral["c_a"] = nullptr;
    spectral["c_i"] = nullptr;
    spectral["truncation"] = K;
    spectral["error"] = "no Malthusian parameter: the epidemic is " + std::string(cmj::to_string(reg));
    for (std::size_t k = 1; k <= K; ++k) {
      Cell geo;
      if (!params.degenerate_delta()) geo = cmj::geometric_pmf(params.rates().iso_success, k);
      dist.add({std::uint64_t{k}, Cell(), Cell(), geo, Cell(), Cell()});
    }
  }
  out.write_json("spectral.json", spectral);
  out.write_table("dist", dist);

  Json config = base_config(cfg, params);
  config["require_alpha"] = cfg.require_alpha;
  out.write_manifest("analyze", config);
  if (!supercritical && cfg.require_alpha) {
    std::fprintf(stderr, "error: %s\n", spectral["error"].get<std::string>().c_str());
    return kNumerical;
  }
  return kOk;
}

int cmd_simulate(const RunConfig& cfg) {
  const auto params = params_of(cfg);
  const auto stop = stop_of(cfg);
  const bool explosive = cmj::regime(params) == cmj::Regime::Supercritical || params.degenerate_delta();
  if (explosive && !stop.bounded()) {
    throw UsageError(
        "this parameter set can grow forever: give --t-max, --max-individuals, --max-clusters, "
        "--max-events or --max-generation");
  }
  if (cfg.grid_points < 2) throw UsageError("--grid-points must be >= 2");
  if (cfg.replicates < 1) throw UsageError("--replicates must be >= 1");
  OutputDir out(cfg.out, parse_format(cfg.format));

  auto emit = [&](const cmj::Trace& trace, std::size_t i) {
    const std::string dir = replicate_dir(i);
    out.write(dir + "/events.jsonl", [&](std::ostream& os) { cmj::io::write_events_jsonl(os, trace); });
    out.write_table(dir + "/clusters", cmj::io::clusters_table(trace));
    const auto grid = cmj::even_grid(0.0, trace.end_time, cfg.grid_points);
    out.write_table(dir + "/snapshots", cmj::io::snapshots_table(trace, grid));
    return cmj::summarize(trace, i);
  };
  const auto summaries = cmj::map_replicates(params, cfg.seed, cfg.replicates, stop, emit);
  out.write_table("summary", cmj::io::summary_table(summaries));

  Json config = base_config(cfg, params);
  config["stop"] = stop_json(stop);
  config["grid_points"] = cfg.grid_points;
  out.write_manifest("simulate", config);
  return kOk;
}

int cmd_compare(const RunConfig& cfg) {
  const auto params = params_of(cfg);
  if (params.degenerate_delta()) throw UsageError("compare needs delta > 0 (use yule for delta = 0)");
  auto stop = stop_of(cfg);
  if (!stop.bounded()) stop.max_individuals = kDefaultCompareCap;
  if (cfg.replicates < 1) throw UsageError("--replicates must be >= 1");
  OutputDir out(cfg.out, parse_format(cfg.format));

  Json config = base_config(cfg, params);
  config["stop"] = stop_json(stop);
  config["tv_tol"] = cfg.tv_tol;
  config["paradox_factor"] = cfg.paradox_factor;
  config["alpha_band"] = cfg.alpha_band;
  config["window_points"] = cfg.window_points;

  Json verdict;
  verdict["replicates"] = cfg.replicates;
  auto inconclusive = [&](const std::string& reason) {
    verdict["status"] = "inconclusive";
    verdict["reason"] = reason;
    out.write_json("verdict.json", verdict);
    out.write_manifest("compare", config);
    std::fprintf(stderr, "compare: inconclusive (%s)\n", reason.c_str());
    return kVerdict;
  };

  if (cmj::regime(params) != cmj::Regime::Supercritical) {
    verdict["survivors"] = 0;
    return inconclusive("the epidemic is " + std::string(cmj::to_string(cmj::regime(params))));
  }
  const std::size_t K = truncation(cfg, params);
  const auto spec = cmj::solve_spectrum(params, cfg.tol, K);
  const auto pool = cmj::pool_survivors(params, cfg.seed, cfg.replicates, stop, cfg.window_points);
  verdict["survivors"] = pool.survivors;
  verdict["isolated_clusters"] = pool.isolated.total;
  verdict["active_clusters"] = pool.active.total;
  if (pool.survivors == 0) return inconclusive("no surviving replicate");
  if (pool.isolated.empty()) return inconclusive("no isolated cluster among survivors");

  const auto geo = geometric_reference(params, K);
  const double tv_active = cmj::tv_distance(pool.active, spec.pi_a);
  const double tv_isolated = cmj::tv_distance(pool.isolated, spec.pi_i);
  const double tv_geometric = cmj::tv_distance(pool.isolated, geo);
  std::vector<double> isolated_weights(pool.isolated.max_size());
  for (std::size_t k = 1; k <= pool.isolated.max_size(); ++k) isolated_weights[k - 1] = pool.isolated.weight(k);
  const double tv_size_bias = cmj::tv_distance(isolated_weights, cmj::size_biased(pool.active));
  bool dominates = true;
  for (std::size_t k = 1; k <= 10; ++k) dominates = dominates && pool.isolated.cdf(k) >= geo.cdf(k);

  verdict["alpha"] = spec.alpha;
  verdict["alpha_hat"] = optional_json(pool.alpha_hat);
  verdict["alpha_window"] = {pool.grid.front(), pool.grid.back()};
  verdict["tv_active_vs_pi_a"] = tv_active;
  verdict["tv_isolated_vs_pi_i"] = tv_isolated;
  verdict["tv_isolated_vs_geometric"] = tv_geometric;
  verdict["tv_isolated_vs_size_biased_active"] = tv_size_bias;
  verdict["chi_square_isolated_vs_pi_i"] = chi_square_json(cmj::chi_square(pool.isolated, spec.pi_i));
  verdict["chi_square_isolated_vs_geometric"] = chi_square_json(cmj::chi_square(pool.isolated, geo));

  Json checks;
  checks["tv_isolated_within_tol"] = tv_isolated < cfg.tv_tol;
  checks["paradox_separation"] = tv_geometric > cfg.paradox_factor * tv_isolated;
  checks["stochastically_smaller"] = dominates;
  const bool alpha_ok = pool.alpha_hat && std::abs(*pool.alpha_hat - spec.alpha) <= cfg.alpha_band * spec.alpha;
  checks["alpha_within_band"] = alpha_ok;
  bool pass = true;
  for (const auto& [name, ok] : checks.items()) pass = pass && ok.get<bool>();
  verdict["checks"] = checks;
  verdict["status"] = pass ? "pass" : "fail";

  Table table(cmj::io::kComparisonHeader);
  const std::size_t rows = std::max({K, pool.active.max_size(), pool.isolated.max_size()});
  for (std::size_t k = 1; k <= rows; ++k) {
    table.add({std::uint64_t{k}, pool.active.weight(k), pool.isolated.weight(k), spec.pi_a(k), spec.pi_i(k),
               geo(k)});
  }
  out.write_table("comparison", table);
  out.write_json("verdict.json", verdict);
  out.write_manifest("compare", config);
  return pass ? kOk : kVerdict;
}

int cmd_ode(const RunConfig& cfg) {
  const auto params = params_of(cfg);
  OutputDir out(cfg.out, parse_format(cfg.format));
  cmj::OdeControl control;
  control.t_max = cfg.t_max.value_or(30.0);
  control.records = cfg.records;
  control.step_scale = cfg.step_scale;
  control.k_max = cfg.trunc_k;
  if (control.k_max == 0 && params.degenerate_delta()) throw UsageError("--trunc-k is required when delta = 0");
  if (control.records < 4) throw UsageError("--records must be >= 4");
  const auto traj = cmj::integrate_nu(params, control);

  Table table(cmj::io::kOdeHeader);
  const std::size_t n = traj.times.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = i + 1 == n ? i : i + 1;
    const double slope = (traj.log_total[hi] - traj.log_total[lo]) / (traj.times[hi] - traj.times[lo]);
    table.add({traj.times[i], traj.log_total[i], slope});
  }
  out.write_table("ode", table);

  const bool supercritical = cmj::regime(params) == cmj::Regime::Supercritical;
  std::optional<double> alpha;
  cmj::Pmf pi_a;
  if (supercritical) {
    alpha = cmj::solve_alpha(params, cfg.tol);
    pi_a = cmj::pi_active(params, *alpha, traj.k_max);
  }
  Table profile(cmj::io::kProfileHeader);
  for (std::size_t k = 1; k <= traj.k_max; ++k) {
    profile.add({std::uint64_t{k}, traj.profiles.back()[k - 1], supercritical ? Cell(pi_a(k)) : Cell()});
  }
  out.write_table("profile", profile);

  const double rate = traj.growth_rate();
  Json report;
  report["growth_rate"] = rate;
  report["alpha"] = optional_json(alpha);
  report["abs_difference"] = alpha ? Json(std::abs(rate - *alpha)) : Json(nullptr);
  report["tolerance"] = cfg.ode_tol;
  report["leak_fraction"] = traj.leak_fraction;
  report["k_max"] = traj.k_max;
  report["step"] = traj.step;
  report["t_max"] = control.t_max;
  const bool agree = !alpha || std::abs(rate - *alpha) <= cfg.ode_tol;
  report["agrees"] = alpha ? Json(agree) : Json(nullptr);
  out.write_json("ode_report.json", report);

  Json config = base_config(cfg, params);
  config["t_max"] = control.t_max;
  config["records"] = control.records;
  config["step_scale"] = control.step_scale;
  config["ode_tol"] = cfg.ode_tol;
  out.write_manifest("ode", config);
  return agree ? kOk : kVerdict;
}

int cmd_paradox(const RunConfig& cfg) {
  namespace px = cmj::paradox;
  auto lifespan = [&]() {
    if (cfg.lifespan == "exponential") return px::LifespanSpec::exponential(cfg.lifespan_param);
    if (cfg.lifespan == "point_mass") return px::LifespanSpec::point_mass(cfg.lifespan_param);
    if (cfg.lifespan == "tabulated") return px::LifespanSpec::tabulated(cfg.quantile_u, cfg.quantile_l);
    throw UsageError("unknown --lifespan '" + cfg.lifespan + "' (exponential, point_mass or tabulated)");
  }();
  px::Intensity intensity;
  if (cfg.intensity == "exponential") {
    intensity = px::Intensity::exponential();
  } else if (cfg.intensity == "polynomial") {
    intensity = px::Intensity::polynomial(cfg.exponent);
  } else {
    throw UsageError("unknown --intensity '" + cfg.intensity + "' (exponential or polynomial)");
  }
  if (cfg.horizons.empty()) throw UsageError("--horizons must list at least one time");
  OutputDir out(cfg.out, parse_format(cfg.format));
  const auto rows = px::paradox_table(lifespan, intensity, cfg.horizons, cfg.seed);
  Table table(cmj::io::kParadoxHeader);
  for (const auto& row : rows) {
    table.add({row.t, std::uint64_t{row.n_dead}, optional_cell(row.dead_mean), row.lambda1_expectation,
               row.lambda_expectation});
  }
  out.write_table("paradox", table);

  Json config;
  config["seed"] = cfg.seed;
  config["format"] = cfg.format;
  config["lifespan"] = cfg.lifespan;
  config["lifespan_param"] = cfg.lifespan_param;
  config["quantile_u"] = cfg.quantile_u;
  config["quantile_l"] = cfg.quantile_l;
  config["intensity"] = cfg.intensity;
  config["exponent"] = cfg.exponent;
  config["horizons"] = cfg.horizons;
  out.write_manifest("paradox", config);
  return kOk;
}

int cmd_yule(const RunConfig& cfg) {
  if (cfg.delta.value_or(0.0) != 0.0) throw UsageError("yule runs without detection: --delta must be 0");
  const auto params = params_of(cfg, 0.0);
  if (!(params.p() > 0.0)) throw UsageError("yule needs p > 0");
  auto stop = stop_of(cfg);
  if (!stop.bounded()) stop.max_clusters = kDefaultYuleClusters;
  if (cfg.replicates < 1) throw UsageError("--replicates must be >= 1");
  OutputDir out(cfg.out, parse_format(cfg.format));

  auto profile = [](const cmj::Trace& trace, std::size_t) { return cmj::empirical_active(trace, trace.end_time); };
  const auto dists = cmj::map_replicates(params, cfg.seed, cfg.replicates, stop, profile);
  cmj::EmpiricalDist pooled;
  for (const auto& d : dists) pooled.merge(d);

  const std::size_t K = cfg.trunc_k > 0 ? cfg.trunc_k : kDefaultYuleTruncation;
  cmj::Pmf sigma;
  for (std::size_t k = 1; k <= K; ++k) sigma.mass.push_back(cmj::yule_simon_pmf(params.p(), k));
  sigma.tail_bound = cmj::yule_simon_tail(params.p(), K);
  const double tv = cmj::tv_distance(pooled, sigma);

  Table table(cmj::io::kYuleHeader);
  for (std::size_t k = 1; k <= pooled.max_size(); ++k) {
    table.add({std::uint64_t{k}, pooled.weight(k), cmj::yule_simon_pmf(params.p(), k)});
  }
  out.write_table("yule", table);

  Json report;
  report["clusters"] = pooled.total;
  report["replicates"] = cfg.replicates;
  report["yule_simon_parameter"] = params.p();
  report["tv_vs_yule_simon"] = tv;
  report["tv_tol"] = cfg.tv_tol;
  report["status"] = tv < cfg.tv_tol ? "pass" : "fail";
  out.write_json("yule_report.json", report);

  Json config = base_config(cfg, params);
  config["stop"] = stop_json(stop);
  config["tv_tol"] = cfg.tv_tol;
  out.write_manifest("yule", config);
  return tv < cfg.tv_tol ? kOk : kVerdict;
}

}  // namespace cmjtrace
