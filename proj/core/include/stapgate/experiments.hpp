#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cstddef>
#include <exception>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

#include "stapgate/config.hpp"
#include "stapgate/dynamics.hpp"
#include "stapgate/gate.hpp"
#include "stapgate/model.hpp"
#include "stapgate/schedule.hpp"

namespace stapgate {

using Cell = std::variant<double, long long, std::string>;

/// Column-named result table written as RFC-4180 CSV.
class Table {
 public:
  Table() = default;
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

  const std::vector<std::string>& header() const { return header_; }
  std::size_t size() const { return rows_.size(); }
  const std::vector<Cell>& row(std::size_t i) const { return rows_.at(i); }

  void add_row(std::vector<Cell> row);
  void append(const Table& other);

  std::size_t column(std::string_view name) const;
  double number(std::size_t row, std::string_view name) const;
  std::string text(std::size_t row, std::string_view name) const;
  /// Rows whose `error` column is non-empty (0 without such a column).
  std::size_t error_count() const;

  void write_csv(std::ostream& os) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

/// Calls fn(i) for i in [0, n) on `workers` threads. Each index runs exactly
/// once; the first exception is rethrown after all workers finish.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn fn) {
  const std::size_t w =
      std::max<std::size_t>(1, std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers))));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(w);
  auto body = [&](std::size_t slot) {
    try {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    } catch (...) {
      errors[slot] = std::current_exception();
      next = n;
    }
  };
  if (w == 1) {
    body(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t s = 0; s < w; ++s) pool.emplace_back(body, s);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct SimulationSettings {
  int record_points = 201;
  double max_phase_step = 0.02;
  Truncation truncation = Truncation::single_excitation;

  static SimulationSettings from(const RunConfig& config);
};

struct RunResult {
  /// Population of `target` at the end: |⟨target|ψ⟩|² or ⟨target|ρ|target⟩.
  double fidelity = 0.0;
  /// ⟨target|ψ(T)⟩ for closed runs; NaN for Lindblad runs.
  cplx overlap{std::numeric_limits<double>::quiet_NaN(), 0.0};
  Trajectory trajectory;
};

/// Evolves basis state `initial` (fields in vacuum) under `schedule` with the
/// rates in `params` (Lindblad when any is nonzero, with `set`). The target
/// is the initial state. Probes are given on the full space.
RunResult run_population(const PulseSchedule& schedule,
                         const SystemParams& params, const BasisState& initial,
                         const SimulationSettings& settings,
                         DissipationSet set = DissipationSet::full,
                         const std::vector<PopulationProbe>& probes = {});

/// F₁ = ⟨ψ₁|ρ(T)|ψ₁⟩ of the l-stage gate from |ψ₁⟩.
RunResult run_f1(const PulseSchedule& schedule, const SystemParams& params,
                 const SimulationSettings& settings,
                 const std::vector<PopulationProbe>& probes = {});

// --- Robustness -----------------------------------------------------------

/// Relative deviations δx/x applied to a nominal design.
struct Deviation {
  double lambda = 0.0;
  double v = 0.0;
  double omega0 = 0.0;
  double T = 0.0;
};

/// Pulses are designed for the nominal params and scaled by (1 + δΩ₀); the
/// Hamiltonian uses λ(1 + δλ), v(1 + δv); the operation stops at
/// T = t_f(1 + δT) with the pulses off after t_f.
double deviated_fidelity(const PulseSchedule& nominal,
                         const SystemParams& params, const Deviation& d,
                         const SimulationSettings& settings);

// --- Spectator subspace ---------------------------------------------------

struct SpectatorRun {
  int zeta = 1;
  double t_f = 0.0;
  double epsilon = 0.0;
  double omega0 = 0.0;
  std::vector<double> times;
  /// Simulated P₁, P₃, P₅ over (|φ₁⟩..|φ₅⟩).
  std::array<std::vector<double>, 3> simulated;
  /// Dark-state P₁, P₃, P₅.
  std::array<std::vector<double>, 3> dark;
  int oscillations = 0;
  double max_deviation = 0.0;
};

/// Spectator-model run from |φ₁⟩ with ε = arcsin(1/(4ζ)).
SpectatorRun run_spectator(int zeta, double t_f, const SystemParams& params,
                           int record_points = 2001,
                           double max_phase_step = 0.02);

// --- Comparison -----------------------------------------------------------

struct SchemeRun {
  std::string scheme;
  PulseSchedule schedule;
  double fidelity = 0.0;
  cplx overlap;
  double theta0_peak = 0.0;
  double psi2_peak = 0.0;
  double psi6_peak = 0.0;
  Trajectory trajectory;
};

struct ComparisonReport {
  std::vector<SchemeRun> runs;

  const SchemeRun& get(std::string_view scheme) const;
  Table summary() const;
  Table trajectories() const;
};

/// stap (ε=0.258, t_f=50/λ), adiabatic (Ω₀′=0.2λ, t_f=100/λ) and Zeno
/// (Ω₀′=0.1λ) at v = 2λ.
ComparisonReport run_comparison(const RunConfig& config);

/// Probes ψ₁..ψ₇, θ₀, θ₁₂, θ₃₄.
std::vector<PopulationProbe> comparison_probes(const HilbertSpace& space,
                                               const SystemParams& params);

// --- Decoherence ----------------------------------------------------------

/// One channel at a time (Γ, κ, κ_f) over `rates` given in units of λ.
/// ψ case: |ψ₁⟩ → |ψ₁⟩ with the 7 operators; φ case: |φ₁⟩ → |φ₁⟩ with 5.
Table run_decoherence(DissipationSet subspace, const std::vector<double>& rates,
                      const RunConfig& config);

// --- Sweeps and config runs ----------------------------------------------

struct SweepSpec {
  std::string experiment_id;
  std::vector<AxisSpec> axes;
};

struct NamedTable {
  std::string name;
  Table table;
};

/// All tables produced by one experiment (the first is the primary one).
std::vector<NamedTable> run_experiment(const SweepSpec& spec,
                                       const RunConfig& config);

/// Primary table of run_experiment().
Table run_sweep(const SweepSpec& spec, const RunConfig& config);

struct ExperimentRecord {
  std::string id;
  std::vector<std::string> files;
  double seconds = 0.0;
  std::size_t rows = 0;
  std::size_t errors = 0;
};

struct RunSummary {
  std::vector<ExperimentRecord> experiments;
  std::filesystem::path manifest;
  std::size_t total_errors() const;
};

/// Writes `tables` as <out_dir>/<name>.csv and returns the file names.
std::vector<std::string> write_tables(const std::vector<NamedTable>& tables,
                                      const std::filesystem::path& out_dir);

/// Writes manifest.json (parameters, versions, timings, files).
std::filesystem::path write_manifest(const RunConfig& config,
                                     const std::string& command,
                                     const std::vector<ExperimentRecord>& records,
                                     const std::filesystem::path& out_dir);

/// Runs experiment.run in order, writing CSVs and the manifest to out_dir.
RunSummary run_config(const RunConfig& config,
                      const std::filesystem::path& out_dir,
                      const std::string& command = "sweep");

}  // namespace stapgate
