#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string_view>
#include <utility>

#include "stapgate/types.hpp"

namespace stapgate {

enum class Scheme { stap, adiabatic, zeno, custom };

/// Which ground level the two lasers couple to |e⟩: f (Ω_l) or s (Ω_r).
enum class DriveBranch { f_branch, s_branch };

std::string_view to_string(Scheme scheme);
std::string_view to_string(DriveBranch branch);

using Envelope = std::function<cplx(double)>;
using RealFn = std::function<double(double)>;

/// Angles (γ, β) parametrising the SU(2) invariant of the three-state
/// effective model. Derivatives are optional; missing ones are taken by
/// central differences.
struct InvariantSpec {
  RealFn gamma;
  RealFn beta;
  RealFn gamma_dot;
  RealFn beta_dot;
  double omega0 = 1.0;
  double t_f = 0.0;

  /// γ(t) = ε, β(t) = π t / t_f.
  static InvariantSpec stap_ansatz(double epsilon, double t_f);

  double gamma_rate(double t) const;
  double beta_rate(double t) const;
};

/// Drive envelopes Ω₁(t), Ω₂(t) for the two atoms of a gate stage.
struct PulseSchedule {
  Scheme scheme = Scheme::custom;
  double t_f = 0.0;
  Envelope omega1;
  Envelope omega2;
  DriveBranch transition = DriveBranch::f_branch;

  // Design knobs the schedule was built from; NaN when not applicable.
  double epsilon = std::numeric_limits<double>::quiet_NaN();
  double amplitude = std::numeric_limits<double>::quiet_NaN();
  std::optional<int> zeta;
  std::optional<InvariantSpec> invariant;

  /// (Ω₁(t), Ω₂(t)); throws DomainError outside [0, t_f].
  std::pair<cplx, cplx> at(double t) const;

  /// Same envelopes on [0, t_f], zero on (t_f, duration]. Models an
  /// operation window that overruns the designed pulses.
  PulseSchedule extended_to(double duration) const;

  /// Envelopes of *this truncated to [0, duration] (duration ≤ t_f).
  PulseSchedule truncated_to(double duration) const;

  PulseSchedule with_transition(DriveBranch branch) const;

  /// Multiplies both envelopes by `factor` (amplitude miscalibration).
  PulseSchedule scaled(double factor) const;
};

/// CSV rows (t, Re Ω₁, Im Ω₁, Re Ω₂, Im Ω₂) on `samples` equally spaced times.
void write_schedule_csv(std::ostream& os, const PulseSchedule& schedule,
                        int samples);

}  // namespace stapgate
