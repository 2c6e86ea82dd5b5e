#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "stapgate/schedule.hpp"
#include "stapgate/types.hpp"

namespace stapgate {

/// Atomic levels; the numeric values are the per-atom basis indices.
enum class Level : std::uint8_t { g = 0, f = 1, s = 2, e = 3 };

char to_char(Level level);

enum class UnitMode {
  natural,   ///< λ = 1, time in 1/λ
  physical,  ///< rates in MHz, time in µs
};

/// Physical rates and truncation of the two-atom, two-cavity, one-fiber
/// system. Spontaneous emission Γ is split equally between the e→f and e→g
/// branches; both cavities share κ.
struct SystemParams {
  double lambda_coupling = 1.0;
  double hop_v = 2.0;
  double gamma = 0.0;
  double kappa_c = 0.0;
  double kappa_f = 0.0;
  int n_max = 1;
  UnitMode unit_mode = UnitMode::natural;

  /// Throws DomainError on negative rates, λ ≤ 0, n_max < 1, or λ ≠ 1 in
  /// natural mode.
  void validate() const;

  /// √(2v² + λ²).
  double chi() const;

  bool has_noise() const { return gamma > 0 || kappa_c > 0 || kappa_f > 0; }
};

/// Product basis label (atom 1, atom 2, n_c1, n_c2, n_fiber).
struct BasisState {
  Level atom1 = Level::g;
  Level atom2 = Level::g;
  int c1 = 0;
  int c2 = 0;
  int fiber = 0;

  auto operator<=>(const BasisState&) const = default;
  std::string label() const;
};

/// Mixed-radix product space: 4 levels per atom, n_max + 1 Fock states per
/// mode (c₁, c₂, fiber). Atom 1 is the most significant digit.
class HilbertSpace {
 public:
  explicit HilbertSpace(int n_max = 1);

  int n_max() const { return n_max_; }
  int mode_dim() const { return n_max_ + 1; }
  std::size_t dim() const { return dim_; }

  std::size_t index(const BasisState& state) const;
  BasisState state(std::size_t index) const;
  Vector ket(const BasisState& state) const;

  /// |ψ_i⟩, i = 1..9, of the single-excitation basis seeded by |f,g⟩.
  static BasisState psi(int i);
  /// |φ_i⟩, i = 1..5, of the spectator basis seeded by |f,s⟩.
  static BasisState phi(int i);

  Vector psi_ket(int i) const { return ket(psi(i)); }
  Vector phi_ket(int i) const { return ket(phi(i)); }

  /// Columns are |ψ₁⟩..|ψ₉⟩ embedded in the full space (dim × 9).
  Matrix psi_embedding() const;
  /// Columns are |φ₁⟩..|φ₅⟩ embedded in the full space (dim × 5).
  Matrix phi_embedding() const;

  /// Total excitation number Σ_k |e⟩_k⟨e| + Σ_modes n (diagonal).
  Matrix excitation_number() const;

  /// Σ_k (|b⟩_k⟨b| + |e⟩_k⟨e|) + Σ_modes n with b the branch level. The
  /// driven H(t) conserves it and no Lindblad operator raises it.
  Matrix branch_excitation_number(DriveBranch branch) const;

  /// Isometry (dim × k) onto basis states whose branch excitation number is
  /// at most `max_excitations`, in flat-index order.
  Matrix excitation_subspace(int max_excitations, DriveBranch branch) const;

 private:
  int n_max_;
  std::size_t dim_;
};

HilbertSpace build_space(const SystemParams& params);

// Elementary operators on the full space.
Matrix atom_transition(const HilbertSpace& space, int atom, Level to,
                       Level from);
Matrix cavity_annihilation(const HilbertSpace& space, int cavity);
Matrix fiber_annihilation(const HilbertSpace& space);

/// H(t) = H_al(t) + H_ac + H_cf with the static part cached. The drive part
/// is Ω₁(t)·A₁ + Ω₂(t)·A₂ + h.c. with A_k = |e⟩_k⟨b| and b the schedule's
/// branch level.
class SystemHamiltonian {
 public:
  SystemHamiltonian(const HilbertSpace& space, const SystemParams& params,
                    DriveBranch branch = DriveBranch::f_branch);

  const HilbertSpace& space() const { return space_; }
  DriveBranch branch() const { return branch_; }

  /// H_ac + H_cf.
  const Matrix& static_part() const { return static_; }
  /// A_k for atom k ∈ {1, 2}.
  const Matrix& drive_coupling(int atom) const;

  Matrix at(cplx omega1, cplx omega2) const;
  /// Throws DomainError when t is outside the schedule's [0, t_f] or the
  /// schedule addresses a different branch.
  Matrix at(const PulseSchedule& drives, double t) const;

 private:
  HilbertSpace space_;
  DriveBranch branch_;
  Matrix static_;
  std::array<Matrix, 2> couplings_;
};

Matrix build_hamiltonian(const HilbertSpace& space, const SystemParams& params,
                         const PulseSchedule& drives, double t);

enum class DissipationSet {
  psi,   ///< 7 channels: e→f, e→g per atom, both cavities, fiber
  phi,   ///< 5 channels: e→f per atom, both cavities, fiber
  full,  ///< union of the above (equals the ψ set)
};

struct CollapseOperator {
  std::string name;
  Matrix op;
};

std::vector<CollapseOperator> build_lindblad_ops(const HilbertSpace& space,
                                                 const SystemParams& params,
                                                 DissipationSet set);

/// Eigenvectors |θ₀⟩..|θ₄⟩ of H_ac + H_cf on the single-excitation block,
/// as 9-component vectors over (|ψ₁⟩..|ψ₉⟩).
struct ZenoEigensystem {
  std::array<Vector, 5> theta;
  std::array<double, 5> xi{};
  double chi = 0.0;

  /// |θ_m⟩ embedded in the full space.
  Vector embedded(const HilbertSpace& space, int m) const;
};

ZenoEigensystem zeno_eigensystem(const SystemParams& params);

/// (H_ac + H_cf) restricted to span{|ψ₁⟩..|ψ₉⟩}.
Matrix single_excitation_block(const SystemParams& params);

/// H_eff on (|ψ₁⟩, |θ₀⟩, |ψ₇⟩).
Matrix effective_hamiltonian(const SystemParams& params, cplx omega1,
                             cplx omega2);
Matrix effective_hamiltonian(const SystemParams& params,
                             const PulseSchedule& drives, double t);

/// Spectator-subspace Hamiltonian on (|φ₁⟩..|φ₅⟩) for the f-branch drive.
Matrix spectator_hamiltonian(const SystemParams& params, cplx omega1);

}  // namespace stapgate
