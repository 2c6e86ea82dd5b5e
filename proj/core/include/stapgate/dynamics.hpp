#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stapgate/model.hpp"
#include "stapgate/schedule.hpp"
#include "stapgate/types.hpp"

namespace stapgate {

/// H(t) = H₀ + Σ_k [f_k(t) C_k + conj(f_k(t)) C_k†], applied through sparse
/// copies of H₀ and C_k. H₀ may be non-Hermitian (no-jump evolution).
class TimeDependentHamiltonian {
 public:
  struct DriveTerm {
    Matrix coupling;
    Envelope envelope;
  };

  TimeDependentHamiltonian(const Matrix& static_part,
                           std::vector<DriveTerm> terms);

  /// Arbitrary dense H(t); used for small models.
  static TimeDependentHamiltonian from_function(
      Eigen::Index dim, std::function<Matrix(double)> fn);

  /// Full-space Hamiltonian driven by `schedule`.
  static TimeDependentHamiltonian driven(const SystemHamiltonian& h,
                                         const PulseSchedule& schedule);
  /// 3×3 effective model on (|ψ₁⟩, |θ₀⟩, |ψ₇⟩).
  static TimeDependentHamiltonian effective(const SystemParams& params,
                                            const PulseSchedule& schedule);
  /// 9×9 restriction to (|ψ₁⟩..|ψ₉⟩).
  static TimeDependentHamiltonian single_excitation(
      const SystemParams& params, const PulseSchedule& schedule);
  /// 5×5 spectator model on (|φ₁⟩..|φ₅⟩).
  static TimeDependentHamiltonian spectator(const SystemParams& params,
                                            const PulseSchedule& schedule);

  Eigen::Index dim() const { return dim_; }
  /// True for from_function() sources, which only support dense().
  bool is_function() const { return static_cast<bool>(fn_); }
  const Matrix& static_part() const { return static_dense_; }
  const std::vector<DriveTerm>& drive_terms() const { return dense_terms_; }
  Matrix dense(double t) const;
  Matrix apply(double t, const Matrix& x) const;
  Vector apply(double t, const Vector& x) const;

  /// Returns a copy with `extra` added to the static part.
  TimeDependentHamiltonian with_static_term(const Matrix& extra) const;

  /// P† H(t) P for an isometry P (dim × k).
  TimeDependentHamiltonian projected(const Matrix& p) const;

 private:
  struct SparseTerm {
    SparseMatrix coupling;
    SparseMatrix coupling_adjoint;
    Envelope envelope;
  };

  TimeDependentHamiltonian() = default;

  template <typename State>
  State apply_impl(double t, const State& x) const;

  Eigen::Index dim_ = 0;
  SparseMatrix static_;
  std::vector<SparseTerm> terms_;
  std::vector<DriveTerm> dense_terms_;
  Matrix static_dense_;
  std::function<Matrix(double)> fn_;
};

struct TimeGrid {
  double t0 = 0.0;
  double t_f = 0.0;
  int n_steps = 100;
  int record_stride = 1;

  double dt() const { return (t_f - t0) / n_steps; }
  double time(int step) const { return t0 + (t_f - t0) * step / n_steps; }

  /// Throws DomainError unless n_steps ≥ 100, t_f > t0, stride ≥ 1.
  void validate() const;

  /// Uniform grid with dt · fastest_rate ≤ max_phase_step and roughly
  /// `record_points` recorded samples.
  static TimeGrid for_rate(double t_f, double fastest_rate,
                           int record_points = 201,
                           double max_phase_step = 0.02);
};

/// max(λ, χ, peak |Ω|) for the dt rule.
double fastest_rate(const SystemParams& params, const PulseSchedule& schedule);

TimeGrid default_grid(const SystemParams& params, const PulseSchedule& schedule,
                      int record_points = 201);

/// Population of the span of `states` (assumed orthonormal).
struct PopulationProbe {
  std::string name;
  std::vector<Vector> states;
};

/// P_psi1, P_psi7, P_theta0, P_theta12, P_theta34 on the full space.
std::vector<PopulationProbe> standard_probes(const HilbertSpace& space,
                                             const SystemParams& params);

double population(const Vector& psi, const PopulationProbe& probe);
double population(const Matrix& rho, const PopulationProbe& probe);

struct EvolutionOptions {
  std::vector<PopulationProbe> probes;
  /// When set, the trajectory records F = ⟨target|ρ|target⟩.
  std::optional<Vector> target;
  bool record_states = false;
  bool renormalize = false;
  /// Skip the norm-drift check (non-Hermitian no-jump evolution).
  bool allow_norm_decay = false;
  double drift_tolerance = 1e-4;
  /// Minimum-eigenvalue check of ρ at every recorded point (mixed runs).
  bool check_positivity = false;
  /// Step-doubling RK4 between recorded points instead of fixed steps.
  bool adaptive = false;
  double adaptive_tolerance = 1e-10;
};

struct Trajectory {
  bool mixed = false;
  std::vector<double> times;
  std::vector<std::string> probe_names;
  std::vector<std::vector<double>> populations;
  std::vector<double> norm_or_trace;
  /// Target population F at each record (empty without a target).
  std::vector<double> fidelity;
  std::vector<Vector> states;
  std::vector<Matrix> density_matrices;
  Vector final_state;
  Matrix final_density;
  double final_fidelity = std::numeric_limits<double>::quiet_NaN();
  double min_eigenvalue = std::numeric_limits<double>::quiet_NaN();
  double max_hermiticity_error = 0.0;

  const std::vector<double>& population(std::string_view name) const;

  /// Header: t, P_<probe>..., norm_or_trace, F.
  void write_csv(std::ostream& os) const;
};

Trajectory evolve_schrodinger(const TimeDependentHamiltonian& h,
                              const Vector& psi0, const TimeGrid& grid,
                              const EvolutionOptions& options = {});

Trajectory evolve_lindblad(const TimeDependentHamiltonian& h,
                           std::span<const Matrix> lindblad_ops,
                           const Matrix& rho0, const TimeGrid& grid,
                           const EvolutionOptions& options = {});

Trajectory evolve_lindblad(const TimeDependentHamiltonian& h,
                           const std::vector<CollapseOperator>& lindblad_ops,
                           const Matrix& rho0, const TimeGrid& grid,
                           const EvolutionOptions& options = {});

/// |⟨target|ψ⟩|.
double fidelity_pure(const Vector& psi, const Vector& target);
/// ⟨target|ψ⟩, carrying the gate phase.
cplx overlap_signed(const Vector& psi, const Vector& target);
/// ⟨target|ρ|target⟩.
double fidelity_mixed(const Matrix& rho, const Vector& target);

/// Strict local maxima whose prominence (height above the higher of the two
/// adjacent minima, series endpoints included) is at least `noise_floor`.
int count_oscillations(std::span<const double> series,
                       double noise_floor = 1e-3);

}  // namespace stapgate
