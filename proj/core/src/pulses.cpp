#include "stapgate/pulses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace stapgate {

namespace {

constexpr int kSingularityScan = 10000;
constexpr double kSingularSin = 1e-9;

void check_gamma_regular(const InvariantSpec& spec, double t) {
  if (std::abs(std::sin(spec.gamma(t))) < kSingularSin) {
    throw SingularityError(
        "invariant angle gamma hits a multiple of pi at t = " +
            std::to_string(t),
        t);
  }
}

// Composite Simpson on [a, b] with an even number of panels.
template <typename Fn>
double simpson(const Fn& fn, double a, double b, int panels) {
  if (panels % 2) ++panels;
  if (b <= a) return 0.0;
  const double h = (b - a) / panels;
  double sum = fn(a) + fn(b);
  for (int i = 1; i < panels; ++i) {
    sum += (i % 2 ? 4.0 : 2.0) * fn(a + i * h);
  }
  return sum * h / 3.0;
}

// Integrand of α₊ up to sign: β̇ sin γ + (v/χ)(Ω₁ sin β + Ω₂ cos β) cos γ.
double lr_integrand(const PulseSchedule& schedule, const SystemParams& params,
                    double t) {
  const InvariantSpec& spec = *schedule.invariant;
  const double gamma = spec.gamma(t);
  const double beta = spec.beta(t);
  const auto [o1, o2] = schedule.at(t);
  const double r = params.hop_v / params.chi();
  return spec.beta_rate(t) * std::sin(gamma) +
         r * (o1.real() * std::sin(beta) + o2.real() * std::cos(beta)) *
             std::cos(gamma);
}

void require_invariant(const PulseSchedule& schedule) {
  if (!schedule.invariant) {
    throw DomainError("schedule carries no invariant angles");
  }
}

}  // namespace

PulseSchedule invariant_pulses(const InvariantSpec& spec,
                               const SystemParams& params) {
  if (!(spec.t_f > 0.0)) throw DomainError("t_f must be positive");
  if (!spec.gamma || !spec.beta) {
    throw DomainError("invariant spec needs gamma and beta");
  }
  for (int i = 0; i <= kSingularityScan; ++i) {
    check_gamma_regular(spec, spec.t_f * i / kSingularityScan);
  }

  const double ratio = params.chi() / params.hop_v;
  PulseSchedule out;
  out.scheme = Scheme::custom;
  out.t_f = spec.t_f;
  out.invariant = spec;
  out.omega1 = [spec, ratio](double t) -> cplx {
    check_gamma_regular(spec, t);
    const double g = spec.gamma(t);
    const double b = spec.beta(t);
    return ratio * (spec.beta_rate(t) / std::tan(g) * std::sin(b) +
                    spec.gamma_rate(t) * std::cos(b));
  };
  out.omega2 = [spec, ratio](double t) -> cplx {
    check_gamma_regular(spec, t);
    const double g = spec.gamma(t);
    const double b = spec.beta(t);
    return ratio * (spec.beta_rate(t) / std::tan(g) * std::cos(b) -
                    spec.gamma_rate(t) * std::sin(b));
  };

  double peak = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const auto [o1, o2] = out.at(spec.t_f * i / 1000);
    peak = std::max({peak, std::abs(o1), std::abs(o2)});
  }
  out.amplitude = peak;
  return out;
}

double stap_amplitude(double epsilon, double t_f, const SystemParams& params) {
  return params.chi() * kPi / (std::tan(epsilon) * params.hop_v * t_f);
}

PulseSchedule stap_schedule(double epsilon, double t_f,
                            const SystemParams& params) {
  if (!(epsilon > 0.0) || !(epsilon < kPi / 2)) {
    throw DomainError("epsilon must lie in (0, pi/2)");
  }
  if (!(t_f > 0.0)) throw DomainError("t_f must be positive");
  if (!(params.hop_v > 0.0)) throw DomainError("stap needs v > 0");

  const double amp = stap_amplitude(epsilon, t_f, params);
  PulseSchedule out;
  out.scheme = Scheme::stap;
  out.t_f = t_f;
  out.epsilon = epsilon;
  out.amplitude = amp;
  out.invariant = InvariantSpec::stap_ansatz(epsilon, t_f);
  out.omega1 = [amp, t_f](double t) -> cplx {
    return amp * std::sin(kPi * t / t_f);
  };
  out.omega2 = [amp, t_f](double t) -> cplx {
    return amp * std::cos(kPi * t / t_f);
  };

  const double z = 1.0 / (4.0 * std::sin(epsilon));
  const double zr = std::round(z);
  if (zr >= 1.0 && std::abs(z - zr) < 1e-9) out.zeta = static_cast<int>(zr);
  return out;
}

double epsilon_for_zeta(int zeta) {
  if (zeta < 1) throw DomainError("zeta must be a positive integer");
  return std::asin(1.0 / (4.0 * zeta));
}

Matrix invariant_matrix(double gamma, double beta, double omega0,
                        const SystemParams& params) {
  const cplx i{0.0, 1.0};
  const double cg = std::cos(gamma), sg = std::sin(gamma);
  const double cb = std::cos(beta), sb = std::sin(beta);
  Matrix m(3, 3);
  m << 0.0, cg * sb, -i * sg,
       cg * sb, 0.0, cg * cb,
       i * sg, cg * cb, 0.0;
  return (params.hop_v / params.chi()) * omega0 * m;
}

std::array<Vector, 3> invariant_eigenvectors(double gamma, double beta) {
  const cplx i{0.0, 1.0};
  const double cg = std::cos(gamma), sg = std::sin(gamma);
  const double cb = std::cos(beta), sb = std::sin(beta);
  std::array<Vector, 3> phi;
  phi[0] = Vector(3);
  phi[0] << cg * cb, -i * sg, -cg * sb;
  for (int k = 1; k <= 2; ++k) {
    const double sign = k == 1 ? 1.0 : -1.0;
    Vector v(3);
    v << sg * cb + sign * i * sb, i * cg, -sg * sb + sign * i * cb;
    phi[static_cast<std::size_t>(k)] = v / std::sqrt(2.0);
  }
  return phi;
}

LRPhaseResult lr_phases(const PulseSchedule& schedule,
                        const SystemParams& params, int panels) {
  require_invariant(schedule);
  if (panels < 10000) panels = 10000;
  const double integral = simpson(
      [&](double t) { return lr_integrand(schedule, params, t); }, 0.0,
      schedule.t_f, panels);

  LRPhaseResult out;
  out.alpha0 = 0.0;
  out.alpha_plus = -integral;
  out.alpha_minus = integral;
  const InvariantSpec& spec = *schedule.invariant;
  const auto phi0 = invariant_eigenvectors(spec.gamma(0.0), spec.beta(0.0));
  for (std::size_t n = 0; n < 3; ++n) out.c_coeffs[n] = std::conj(phi0[n](0));
  return out;
}

Vector invariant_mode_state(const PulseSchedule& schedule,
                            const SystemParams& params, double t,
                            int panels) {
  require_invariant(schedule);
  const InvariantSpec& spec = *schedule.invariant;
  const double integral = simpson(
      [&](double s) { return lr_integrand(schedule, params, s); }, 0.0, t,
      panels);
  const std::array<double, 3> alpha{0.0, -integral, integral};

  const auto phi0 = invariant_eigenvectors(spec.gamma(0.0), spec.beta(0.0));
  const auto phit = invariant_eigenvectors(spec.gamma(t), spec.beta(t));
  Vector psi = Vector::Zero(3);
  for (std::size_t n = 0; n < 3; ++n) {
    const cplx c = std::conj(phi0[n](0));
    psi += c * std::exp(cplx{0.0, alpha[n]}) * phit[n];
  }
  return psi;
}

Vector predicted_final_state(double epsilon) {
  if (!(epsilon > 0.0) || !(epsilon < kPi / 2)) {
    throw DomainError("epsilon must lie in (0, pi/2)");
  }
  const cplx i{0.0, 1.0};
  const double se = std::sin(epsilon), ce = std::cos(epsilon);
  const double alpha = -kPi / se;
  const double ca = std::cos(alpha);
  Vector out(3);
  out << -ce * ce - ca * se * se,
         -i * se * ce + i * ca * se * ce,
         se * std::sin(alpha);
  return out;
}

AdiabaticPlan adiabatic_schedule(double omega0_prime, double t_f,
                                 const SystemParams& params) {
  if (!(omega0_prime > 0.0)) throw DomainError("omega0_prime must be positive");
  if (!(t_f > 0.0)) throw DomainError("t_f must be positive");
  AdiabaticPlan plan;
  PulseSchedule& s = plan.schedule;
  s.scheme = Scheme::adiabatic;
  s.t_f = t_f;
  s.amplitude = omega0_prime;
  s.omega1 = [omega0_prime, t_f](double t) -> cplx {
    return omega0_prime * std::sin(kPi * t / t_f);
  };
  s.omega2 = [omega0_prime, t_f](double t) -> cplx {
    return omega0_prime * std::cos(kPi * t / t_f);
  };
  plan.threshold =
      kPi * params.chi() / (std::sqrt(2.0) * params.hop_v * omega0_prime);
  plan.margin = t_f / plan.threshold;
  plan.drive_periods = t_f * omega0_prime;
  return plan;
}

PulseSchedule zeno_schedule(double omega0_prime, const SystemParams& params) {
  if (!(omega0_prime > 0.0)) throw DomainError("omega0_prime must be positive");
  const double theta =
      params.hop_v * std::sqrt(2.0) * omega0_prime / params.chi();
  PulseSchedule s;
  s.scheme = Scheme::zeno;
  s.t_f = 2.0 * kPi / theta;
  s.amplitude = omega0_prime;
  const cplx drive{0.0, omega0_prime};
  s.omega1 = [drive](double) { return drive; };
  s.omega2 = [drive](double) { return drive; };
  return s;
}

Vector zeno_closed_form(const SystemParams& params, cplx omega1, cplx omega2,
                        double t) {
  const double r = params.hop_v / params.chi();
  const double theta = r * std::sqrt(std::norm(omega1) + std::norm(omega2));
  Vector out = Vector::Zero(3);
  out(0) = 1.0;
  if (theta == 0.0) return out;
  const double k = r / theta;
  const double c = std::cos(theta * t) - 1.0;
  out(0) += k * k * std::norm(omega1) * c;
  out(1) = cplx{0.0, -1.0} * k * omega1 * std::sin(theta * t);
  out(2) = k * k * omega1 * std::conj(omega2) * c;
  return out;
}

SpectatorDark dark_state_spectator(const PulseSchedule& schedule,
                                   const SystemParams& params, double t) {
  const cplx o1 = schedule.at(t).first;
  const double lam = params.lambda_coupling;
  const double norm2 = 2.0 * std::norm(o1) + lam * lam;
  SpectatorDark out;
  out.state = Vector::Zero(5);
  out.state(0) = lam;
  out.state(2) = -o1;
  out.state(4) = o1;
  out.state /= std::sqrt(norm2);
  out.p1 = lam * lam / norm2;
  return out;
}

Vector full_dark_state(const PulseSchedule& schedule,
                       const SystemParams& params, double t) {
  const auto [o1, o2] = schedule.at(t);
  const double lam = params.lambda_coupling;
  Vector d = Vector::Zero(9);
  d(0) = o2;
  d(6) = -o1;
  d(2) = -o1 * o2 / lam;
  d(4) = o1 * o2 / lam;
  const double n = d.norm();
  if (n == 0.0) {
    d(0) = 1.0;
    return d;
  }
  return d / n;
}

}  // namespace stapgate
