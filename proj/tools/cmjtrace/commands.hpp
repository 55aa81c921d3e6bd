#ifndef CMJTRACE_COMMANDS_HPP
#define CMJTRACE_COMMANDS_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cmjtrace {

/// Exit statuses.
enum Exit : int { kOk = 0, kUsage = 1, kNumerical = 2, kVerdict = 3 };

/// Bad configuration detected after parsing; maps to kUsage.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  double gamma = 2.0;
  double p = 0.5;
  std::optional<double> delta;  ///< default 0.5, or 0 for yule
  std::uint64_t seed = 1;
  std::size_t replicates = 1;
  std::optional<double> t_max;
  std::optional<std::uint64_t> max_individuals;
  std::optional<std::uint64_t> max_clusters;
  std::optional<std::uint64_t> max_events;
  std::optional<std::uint32_t> max_generation;
  std::string out = "out";
  std::string format = "csv";
  std::size_t trunc_k = 0;  ///< 0: tail rule
  double tol = 1e-12;

  // analyze
  bool require_alpha = false;
  // simulate
  std::size_t grid_points = 101;
  // compare
  double tv_tol = 0.02;
  double paradox_factor = 5.0;
  double alpha_band = 0.05;
  std::size_t window_points = 50;
  // ode
  std::size_t records = 121;
  double step_scale = 1.0;
  double ode_tol = 1e-4;
  // paradox
  std::string lifespan = "exponential";
  double lifespan_param = 1.0;
  std::vector<double> quantile_u;
  std::vector<double> quantile_l;
  std::string intensity = "exponential";
  double exponent = 1.0;
  std::vector<double> horizons = {2.0, 4.0, 6.0, 8.0, 10.0, 12.0};
};

int cmd_analyze(const RunConfig& cfg);
int cmd_simulate(const RunConfig& cfg);
int cmd_compare(const RunConfig& cfg);
int cmd_ode(const RunConfig& cfg);
int cmd_paradox(const RunConfig& cfg);
int cmd_yule(const RunConfig& cfg);

}  // namespace cmjtrace

#endif  // CMJTRACE_COMMANDS_HPP
