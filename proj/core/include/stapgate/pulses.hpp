#pragma once

#include <array>

#include "stapgate/model.hpp"
#include "stapgate/schedule.hpp"
#include "stapgate/types.hpp"

namespace stapgate {

// Invariant-based inverse engineering on the effective three-state model
// (|ψ₁⟩, |θ₀⟩, |ψ₇⟩). All 3-vectors and 3×3 matrices use that ordering.

/// Ω₁, Ω₂ from the invariant angles. Throws SingularityError when
/// γ(t) ≡ 0 (mod π) somewhere on [0, t_f].
PulseSchedule invariant_pulses(const InvariantSpec& spec,
                               const SystemParams& params);

/// Ω₀ = χ π cot ε / (v t_f).
double stap_amplitude(double epsilon, double t_f, const SystemParams& params);

/// Ω₁ = Ω₀ sin(π t/t_f), Ω₂ = Ω₀ cos(π t/t_f). Throws DomainError unless
/// 0 < ε < π/2 and t_f > 0. Records ζ when 1/(4 sin ε) is an integer.
PulseSchedule stap_schedule(double epsilon, double t_f,
                            const SystemParams& params);

/// ε = arcsin(1/(4ζ)), the phase-closing choice.
double epsilon_for_zeta(int zeta);

/// The invariant I(t) for given angles (ω₀ and v/χ prefactor included).
Matrix invariant_matrix(double gamma, double beta, double omega0,
                        const SystemParams& params);

/// Eigenvectors |φ₀⟩, |φ₊⟩, |φ₋⟩ of I(t) (eigenvalues 0, +1, −1 in units of
/// ω₀ v/χ).
std::array<Vector, 3> invariant_eigenvectors(double gamma, double beta);

struct LRPhaseResult {
  double alpha0 = 0.0;
  double alpha_plus = 0.0;
  double alpha_minus = 0.0;
  /// C_n = ⟨φ_n(0)|ψ₁⟩ for n = 0, +, −.
  std::array<cplx, 3> c_coeffs{};
};

/// LR phases by composite Simpson quadrature (≥ 10⁴ panels). Requires a
/// schedule carrying its InvariantSpec.
LRPhaseResult lr_phases(const PulseSchedule& schedule,
                        const SystemParams& params, int panels = 20000);

/// Σ_n C_n e^{iα_n} |φ_n(t)⟩, with α_n accumulated up to t.
Vector invariant_mode_state(const PulseSchedule& schedule,
                            const SystemParams& params, double t,
                            int panels = 20000);

/// Closed-form final state of the stap ansatz starting from |ψ₁⟩:
/// (−cos²ε − cos α sin²ε, −i sinε cosε + i cos α sinε cosε, sinε sin α)
/// with α = α₊ = −π / sin ε.
Vector predicted_final_state(double epsilon);

struct AdiabaticPlan {
  PulseSchedule schedule;
  /// π χ / (√2 v Ω₀′); the schedule must be long compared with this.
  double threshold = 0.0;
  /// t_f / threshold.
  double margin = 0.0;
  /// t_f · Ω₀′, the rule-of-thumb length in units of the inverse amplitude.
  double drive_periods = 0.0;
};

/// Ω₁ = Ω₀′ sin(π t/t_f), Ω₂ = Ω₀′ cos(π t/t_f).
AdiabaticPlan adiabatic_schedule(double omega0_prime, double t_f,
                                 const SystemParams& params);

/// Ω₁ = Ω₂ = iΩ₀′ held for t_f = 2π/θ with θ = v √2 Ω₀′ / χ.
PulseSchedule zeno_schedule(double omega0_prime, const SystemParams& params);

/// Exact H_eff evolution of |ψ₁⟩ under constant drives (Ω₁, Ω₂).
Vector zeno_closed_form(const SystemParams& params, cplx omega1, cplx omega2,
                        double t);

struct SpectatorDark {
  /// Over (|φ₁⟩..|φ₅⟩).
  Vector state;
  /// λ² / (2Ω₁² + λ²).
  double p1 = 1.0;
};

SpectatorDark dark_state_spectator(const PulseSchedule& schedule,
                                   const SystemParams& params, double t);

/// Instantaneous dark state of the full drive over (|ψ₁⟩..|ψ₉⟩).
Vector full_dark_state(const PulseSchedule& schedule,
                       const SystemParams& params, double t);

}  // namespace stapgate
