#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "stapgate/dynamics.hpp"
#include "stapgate/model.hpp"
#include "stapgate/schedule.hpp"
#include "stapgate/types.hpp"

namespace stapgate {

/// l-stage: lasers on f↔e (first atom in {f, g}, second in {g, s}).
/// r-stage: lasers on s↔e (first atom in {s, g}, second in {g, f}).
enum class StageType { l_branch, r_branch };

std::string_view to_string(StageType stage);
DriveBranch drive_branch(StageType stage);

/// Computational inputs (|d g⟩, |d q⟩, |g g⟩, |g q⟩) with d the driven level
/// and q the spectator level of the stage.
std::array<std::pair<Level, Level>, 4> computational_inputs(StageType stage);

struct NoiseModel {
  double gamma = 0.0;
  double kappa_c = 0.0;
  double kappa_f = 0.0;
  DissipationSet set = DissipationSet::full;
};

struct GateMatrix {
  StageType stage = StageType::l_branch;
  /// u(i, j) = ⟨input_i, vac| out_j⟩.
  Matrix u = Matrix::Identity(4, 4);
  std::array<double, 4> leakage{};
  /// ⟨input_j|ρ_j(t_f)|input_j⟩ (equals |u(j,j)|² without noise).
  std::array<double, 4> diagonal_fidelity{1.0, 1.0, 1.0, 1.0};
  bool failed = false;

  std::string input_label(int j) const;
};

GateMatrix ideal_gate(StageType stage);

struct GateExtractOptions {
  /// Uses default_grid() when unset.
  std::optional<TimeGrid> grid;
  /// Diagonal fidelities from full Lindblad runs when noise is present.
  bool lindblad_diagonals = true;
  /// Simulate in the closed sector with at most one branch excitation
  /// instead of the full product space (same result, smaller matrices).
  bool restrict_sector = true;
};

/// Runs each computational input ⊗ vacuum through the schedule and
/// projects back onto the computational manifold. With noise the columns
/// are no-jump amplitudes. Leakage above 0.5 marks the gate as failed.
GateMatrix extract_gate(const PulseSchedule& schedule,
                        const SystemParams& params,
                        const std::optional<NoiseModel>& noise = std::nullopt,
                        const GateExtractOptions& options = {});

struct PhaseCheck {
  /// arg(u₀₀ / u₂₂) in (−π, π].
  double phase = 0.0;
  /// |tr(U_ideal† U)| / 4.
  double fidelity = 0.0;
};

PhaseCheck gate_phase_check(const GateMatrix& gate);

/// Rows (row, col, input_row, input_col, re, im, abs); then one leakage
/// row per column with row = -1.
void write_gate_csv(std::ostream& os, const GateMatrix& gate);

/// N qutrits with levels g = 0, f = 1, s = 2; site 1 is the most
/// significant digit.
class ClusterRegister {
 public:
  static constexpr int kMaxSites = 12;

  /// All sites in |g⟩. Throws CapacityError above kMaxSites.
  explicit ClusterRegister(int n_sites);

  /// Product of single-site states (g, f, s amplitudes).
  static ClusterRegister product(const std::vector<std::array<cplx, 3>>& sites);

  int size() const { return n_; }
  std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }
  int stage() const { return stage_; }
  void set_stage(int stage) { stage_ = stage; }

  const Vector& amplitudes() const { return amps_; }
  Vector& amplitudes() { return amps_; }

  /// Level of `site` (1-based) in basis index `index`.
  int digit(std::size_t index, int site) const;
  /// Basis string such as "fsg".
  std::string label(std::size_t index) const;
  std::size_t index_of(std::string_view label) const;
  cplx amplitude(std::string_view label) const;

  double norm() const { return amps_.norm(); }

  /// Rows (basis, re, im) for nonzero amplitudes (|a| > threshold).
  void write_csv(std::ostream& os, double threshold = 0.0) const;

 private:
  int n_;
  int stage_ = 0;
  Vector amps_;
};

/// Applies `gate` to sites (site, site + 1), 1-based. Throws ProtocolError
/// if the gate's stage differs from `stage` or the active sites carry more
/// than 1e-6 population outside the stage's levels.
ClusterRegister apply_two_atom_gate(const ClusterRegister& reg, int site,
                                    const GateMatrix& gate, StageType stage);

/// l-stage for odd `site`, r-stage for even.
StageType stage_for_site(int site);

/// Odd sites (|f⟩+|g⟩)/√2, even sites (|s⟩+|g⟩)/√2.
ClusterRegister cluster_initial_state(int n_sites);

ClusterRegister ideal_cluster_state(int n_sites);

struct IdealGates {};
struct SimulatedGates {
  /// f-branch schedule; the r-stage uses the same envelopes on s↔e.
  PulseSchedule schedule;
  SystemParams params;
  std::optional<NoiseModel> noise;
  GateExtractOptions options;
};
using GateSource = std::variant<IdealGates, SimulatedGates>;

struct ClusterResult {
  ClusterRegister reg{2};
  /// |⟨ideal_k|ψ_k⟩|² after each stage k = 1..N−1.
  std::vector<double> stage_fidelities;
  /// |⟨ideal_k|G_k|ideal_{k−1}⟩|²: the stage gate on an ideal input.
  std::vector<double> gate_fidelities;
  std::optional<GateMatrix> l_gate;
  std::optional<GateMatrix> r_gate;
};

ClusterResult cluster_protocol(int n_sites, const GateSource& source);

/// Rows (stage, sites, type, gate_fidelity, cumulative_fidelity).
void write_cluster_stages_csv(std::ostream& os, const ClusterResult& result);

}  // namespace stapgate
