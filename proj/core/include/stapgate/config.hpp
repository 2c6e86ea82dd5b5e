#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "stapgate/gate.hpp"
#include "stapgate/model.hpp"
#include "stapgate/schedule.hpp"

namespace stapgate {

/// Schema or parse failure, carrying the offending key and 1-based line
/// (0 when unknown).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, std::string key, int line);
  const std::string& key() const noexcept { return key_; }
  int line() const noexcept { return line_; }

 private:
  std::string key_;
  int line_;
};

struct AxisSpec {
  std::string name;
  double min = 0.0;
  double max = 0.0;
  int points = 2;

  /// Equally spaced, endpoints included.
  std::vector<double> values() const;
};

/// Which part of the product space simulations run on. The sector with at
/// most one branch excitation (see HilbertSpace::branch_excitation_number)
/// is closed under H(t) and the Lindblad operators, so it is exact for the
/// gate inputs used here.
enum class Truncation { full, single_excitation };

std::string_view to_string(Truncation t);

struct ScheduleConfig {
  Scheme scheme = Scheme::stap;
  double epsilon = 0.258;
  /// Overrides epsilon with arcsin(1/(4ζ)).
  std::optional<int> zeta;
  /// t_f in units of 1/λ.
  double lambda_tf = 50.0;
  /// Ω₀′ in units of λ, for the adiabatic and Zeno schemes.
  double omega0_prime = 0.2;
};

struct ExperimentConfig {
  std::vector<std::string> run;
  int workers = 1;
  std::uint64_t seed = 0;
  int record_points = 201;
  double max_phase_step = 0.02;
  Truncation truncation = Truncation::single_excitation;
  int cluster_sites = 3;
  /// Per-experiment axis overrides, keyed by experiment id.
  std::map<std::string, std::vector<AxisSpec>> grids;
};

struct RunConfig {
  SystemParams system;
  ScheduleConfig schedule;
  NoiseModel noise;
  ExperimentConfig experiment;
};

/// Every experiment id known to the sweep engine, in run order.
const std::vector<std::string>& experiment_ids();

/// Axis names accepted for `experiment_id` (empty for fixed experiments).
std::vector<std::string> allowed_axes(std::string_view experiment_id);

/// Default grid for `experiment_id`.
std::vector<AxisSpec> default_axes(std::string_view experiment_id);

RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Noise-free SystemParams from the `system` section.
SystemParams nominal_params(const RunConfig& config);

/// Rates from the `noise` section applied to the nominal params.
SystemParams noisy_params(const RunConfig& config);

/// t_f in the configured time unit (lambda_tf / λ).
double schedule_duration(const RunConfig& config);

/// Schedule described by the `schedule` section (f-branch).
PulseSchedule build_schedule(const RunConfig& config);

/// Grid for an experiment: the override when present, else the default.
std::vector<AxisSpec> axes_for(const RunConfig& config,
                               std::string_view experiment_id);

}  // namespace stapgate
