#include "stapgate/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "stapgate/csv.hpp"

namespace stapgate {

namespace {

// Round-off slack when a caller asks for exactly t_f after summing steps.
constexpr double kTimeSlack = 1e-9;

}  // namespace

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::stap: return "stap";
    case Scheme::adiabatic: return "adiabatic";
    case Scheme::zeno: return "zeno";
    case Scheme::custom: return "custom";
  }
  return "unknown";
}

std::string_view to_string(DriveBranch branch) {
  return branch == DriveBranch::f_branch ? "f_branch" : "s_branch";
}

InvariantSpec InvariantSpec::stap_ansatz(double epsilon, double t_f) {
  InvariantSpec spec;
  spec.t_f = t_f;
  spec.gamma = [epsilon](double) { return epsilon; };
  spec.gamma_dot = [](double) { return 0.0; };
  spec.beta = [t_f](double t) { return kPi * t / t_f; };
  spec.beta_dot = [t_f](double) { return kPi / t_f; };
  return spec;
}

namespace {

double central_difference(const RealFn& fn, double t, double t_f) {
  const double h = t_f * 1e-6;
  const double lo = std::max(0.0, t - h);
  const double hi = std::min(t_f, t + h);
  return (fn(hi) - fn(lo)) / (hi - lo);
}

}  // namespace

double InvariantSpec::gamma_rate(double t) const {
  return gamma_dot ? gamma_dot(t) : central_difference(gamma, t, t_f);
}

double InvariantSpec::beta_rate(double t) const {
  return beta_dot ? beta_dot(t) : central_difference(beta, t, t_f);
}

std::pair<cplx, cplx> PulseSchedule::at(double t) const {
  const double slack = kTimeSlack * std::max(1.0, t_f);
  if (!(t >= -slack && t <= t_f + slack)) {
    throw DomainError("time " + std::to_string(t) + " outside schedule [0, " +
                      std::to_string(t_f) + "]");
  }
  const double tc = std::clamp(t, 0.0, t_f);
  return {omega1(tc), omega2(tc)};
}

PulseSchedule PulseSchedule::extended_to(double duration) const {
  PulseSchedule out = *this;
  const double end = t_f;
  out.scheme = Scheme::custom;
  out.t_f = duration;
  out.invariant.reset();
  out.omega1 = [f = omega1, end](double t) { return t <= end ? f(t) : cplx{}; };
  out.omega2 = [f = omega2, end](double t) { return t <= end ? f(t) : cplx{}; };
  return out;
}

PulseSchedule PulseSchedule::truncated_to(double duration) const {
  if (duration > t_f) return extended_to(duration);
  PulseSchedule out = *this;
  out.scheme = Scheme::custom;
  out.t_f = duration;
  out.invariant.reset();
  return out;
}

PulseSchedule PulseSchedule::with_transition(DriveBranch branch) const {
  PulseSchedule out = *this;
  out.transition = branch;
  return out;
}

PulseSchedule PulseSchedule::scaled(double factor) const {
  PulseSchedule out = *this;
  out.scheme = Scheme::custom;
  out.amplitude = amplitude * factor;
  out.invariant.reset();
  out.omega1 = [f = omega1, factor](double t) { return factor * f(t); };
  out.omega2 = [f = omega2, factor](double t) { return factor * f(t); };
  return out;
}

void write_schedule_csv(std::ostream& os, const PulseSchedule& schedule,
                        int samples) {
  if (samples < 2) throw DomainError("need at least two samples");
  CsvWriter csv(os, {"t", "re_omega1", "im_omega1", "re_omega2", "im_omega2"});
  for (int i = 0; i < samples; ++i) {
    const double t = schedule.t_f * i / (samples - 1);
    const auto [o1, o2] = schedule.at(t);
    csv.row(t, o1.real(), o1.imag(), o2.real(), o2.imag());
  }
}

}  // namespace stapgate
