#include <omp.h>

#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <stdexcept>

#include "commands.hpp"

namespace {

using cmjtrace::RunConfig;

void add_model_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--gamma", cfg.gamma, "infection rate per contagious individual")->capture_default_str();
  cmd->add_option("--p", cfg.p, "probability an infection is traceable")->capture_default_str();
  cmd->add_option("--delta", cfg.delta, "detection rate per individual (default 0.5; yule: 0)");
  cmd->add_option("--format", cfg.format, "table format: csv or json")->capture_default_str();
  cmd->add_option("--out", cfg.out, "output directory")->capture_default_str();
  cmd->add_option("--trunc-k", cfg.trunc_k, "size truncation (0: tail rule)")->capture_default_str();
  cmd->add_option("--tol", cfg.tol, "root-finding tolerance")->capture_default_str();
}

void add_sim_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--seed", cfg.seed, "base seed")->capture_default_str();
  cmd->add_option("--replicates", cfg.replicates, "number of replicates")->capture_default_str();
  cmd->add_option("--t-max", cfg.t_max, "stop at this time");
  cmd->add_option("--max-individuals", cfg.max_individuals, "stop once this many were ever infected");
  cmd->add_option("--max-clusters", cfg.max_clusters, "stop once this many clusters were born");
  cmd->add_option("--max-events", cfg.max_events, "stop after this many events");
  cmd->add_option("--max-generation", cfg.max_generation, "suppress untraceable births beyond this generation");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cluster-level simulation and analysis of epidemics with contact tracing"};
  app.set_version_flag("--version", CMJTRACE_VERSION);
  app.set_config("--config", "", "TOML or INI file with flag values (section per subcommand)");
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "OpenMP threads (0: runtime default)");

  RunConfig cfg;
  auto* analyze = app.add_subcommand("analyze", "Malthusian parameter and limiting cluster-size laws");
  add_model_flags(analyze, cfg);
  analyze->add_flag("--require-alpha", cfg.require_alpha, "exit 2 unless the epidemic is supercritical");

  auto* simulate = app.add_subcommand("simulate", "event-driven simulation with full traces");
  add_model_flags(simulate, cfg);
  add_sim_flags(simulate, cfg);
  simulate->add_option("--grid-points", cfg.grid_points, "snapshot grid size")->capture_default_str();

  auto* compare = app.add_subcommand("compare", "pooled survivor histograms against the limiting laws");
  add_model_flags(compare, cfg);
  add_sim_flags(compare, cfg);
  compare->add_option("--tv-tol", cfg.tv_tol, "TV bound for isolated clusters")->capture_default_str();
  compare->add_option("--paradox-factor", cfg.paradox_factor, "required TV separation from the geometric law")
      ->capture_default_str();
  compare->add_option("--alpha-band", cfg.alpha_band, "relative band for the growth-rate estimate")
      ->capture_default_str();
  compare->add_option("--window-points", cfg.window_points, "grid points in the fitting window")
      ->capture_default_str();

  auto* ode = app.add_subcommand("ode", "forward equations for the expected active-cluster profile");
  add_model_flags(ode, cfg);
  ode->add_option("--t-max", cfg.t_max, "integration horizon (default 30)");
  ode->add_option("--records", cfg.records, "stored time points")->capture_default_str();
  ode->add_option("--step-scale", cfg.step_scale, "multiplier on the RK4 step")->capture_default_str();
  ode->add_option("--ode-tol", cfg.ode_tol, "tolerance on |slope - alpha|")->capture_default_str();

  auto* paradox = app.add_subcommand("paradox", "dead-mean lifespan bias in growing cohorts");
  paradox->add_option("--seed", cfg.seed, "base seed")->capture_default_str();
  paradox->add_option("--format", cfg.format, "table format: csv or json")->capture_default_str();
  paradox->add_option("--out", cfg.out, "output directory")->capture_default_str();
  paradox->add_option("--lifespan", cfg.lifespan, "exponential, point_mass or tabulated")->capture_default_str();
  paradox->add_option("--lifespan-param", cfg.lifespan_param, "rate (exponential) or value (point_mass)")
      ->capture_default_str();
  paradox->add_option("--quantile-u", cfg.quantile_u, "tabulated inverse CDF: u knots")->delimiter(',');
  paradox->add_option("--quantile-l", cfg.quantile_l, "tabulated inverse CDF: lifespan knots")->delimiter(',');
  paradox->add_option("--intensity", cfg.intensity, "exponential or polynomial")->capture_default_str();
  paradox->add_option("--exponent", cfg.exponent, "polynomial exponent r")->capture_default_str();
  paradox->add_option("--horizons", cfg.horizons, "observation times")->delimiter(',')->capture_default_str();

  auto* yule = app.add_subcommand("yule", "no-detection active profile against the Yule-Simon law");
  add_model_flags(yule, cfg);
  add_sim_flags(yule, cfg);
  yule->add_option("--tv-tol", cfg.tv_tol, "TV bound")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? cmjtrace::kOk : cmjtrace::kUsage;
  }
  if (threads < 0) {
    std::fprintf(stderr, "error: --threads must be >= 0\n");
    return cmjtrace::kUsage;
  }
  if (threads > 0) omp_set_num_threads(threads);

  try {
    if (analyze->parsed()) return cmjtrace::cmd_analyze(cfg);
    if (simulate->parsed()) return cmjtrace::cmd_simulate(cfg);
    if (compare->parsed()) return cmjtrace::cmd_compare(cfg);
    if (ode->parsed()) return cmjtrace::cmd_ode(cfg);
    if (paradox->parsed()) return cmjtrace::cmd_paradox(cfg);
    if (yule->parsed()) return cmjtrace::cmd_yule(cfg);
  } catch (const cmjtrace::UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return cmjtrace::kUsage;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return cmjtrace::kUsage;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return cmjtrace::kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return cmjtrace::kNumerical;
  }
  return cmjtrace::kUsage;
}
