#include "stapgate/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>

#include <unsupported/Eigen/KroneckerProduct>

#include "stapgate/csv.hpp"
#include "stapgate/pulses.hpp"

namespace stapgate {

namespace {

SparseMatrix to_sparse(const Matrix& m) {
  return m.sparseView(cplx{1.0, 0.0}, 1e-300);
}

}  // namespace

// --- Hamiltonian sources ----------------------------------------------------

TimeDependentHamiltonian::TimeDependentHamiltonian(
    const Matrix& static_part, std::vector<DriveTerm> terms)
    : dim_(static_part.rows()),
      static_(to_sparse(static_part)),
      dense_terms_(std::move(terms)),
      static_dense_(static_part) {
  for (const auto& t : dense_terms_) {
    if (t.coupling.rows() != dim_ || t.coupling.cols() != dim_) {
      throw std::invalid_argument("drive coupling dimension mismatch");
    }
    terms_.push_back(
        {to_sparse(t.coupling), to_sparse(t.coupling.adjoint()), t.envelope});
  }
}

TimeDependentHamiltonian TimeDependentHamiltonian::from_function(
    Eigen::Index dim, std::function<Matrix(double)> fn) {
  TimeDependentHamiltonian h;
  h.dim_ = dim;
  h.fn_ = std::move(fn);
  return h;
}

TimeDependentHamiltonian TimeDependentHamiltonian::driven(
    const SystemHamiltonian& h, const PulseSchedule& schedule) {
  if (schedule.transition != h.branch()) {
    throw DomainError("schedule addresses a different transition branch");
  }
  auto s1 = [schedule](double t) { return schedule.at(t).first; };
  auto s2 = [schedule](double t) { return schedule.at(t).second; };
  return TimeDependentHamiltonian(
      h.static_part(),
      {{h.drive_coupling(1), s1}, {h.drive_coupling(2), s2}});
}

TimeDependentHamiltonian TimeDependentHamiltonian::effective(
    const SystemParams& params, const PulseSchedule& schedule) {
  const double r = params.hop_v / params.chi();
  Matrix c1 = Matrix::Zero(3, 3);
  Matrix c2 = Matrix::Zero(3, 3);
  c1(1, 0) = r;
  c2(1, 2) = r;
  auto s1 = [schedule](double t) { return schedule.at(t).first; };
  auto s2 = [schedule](double t) { return schedule.at(t).second; };
  return TimeDependentHamiltonian(Matrix::Zero(3, 3), {{c1, s1}, {c2, s2}});
}

TimeDependentHamiltonian TimeDependentHamiltonian::single_excitation(
    const SystemParams& params, const PulseSchedule& schedule) {
  Matrix c1 = Matrix::Zero(9, 9);
  Matrix c2 = Matrix::Zero(9, 9);
  c1(1, 0) = 1.0;  // |ψ₂⟩⟨ψ₁|
  c2(5, 6) = 1.0;  // |ψ₆⟩⟨ψ₇|
  auto s1 = [schedule](double t) { return schedule.at(t).first; };
  auto s2 = [schedule](double t) { return schedule.at(t).second; };
  return TimeDependentHamiltonian(single_excitation_block(params),
                                  {{c1, s1}, {c2, s2}});
}

TimeDependentHamiltonian TimeDependentHamiltonian::spectator(
    const SystemParams& params, const PulseSchedule& schedule) {
  Matrix c1 = Matrix::Zero(5, 5);
  c1(1, 0) = 1.0;  // |φ₂⟩⟨φ₁|
  auto s1 = [schedule](double t) { return schedule.at(t).first; };
  return TimeDependentHamiltonian(spectator_hamiltonian(params, 0.0),
                                  {{c1, s1}});
}

Matrix TimeDependentHamiltonian::dense(double t) const {
  if (fn_) return fn_(t);
  Matrix h = static_dense_;
  for (const auto& term : dense_terms_) {
    const cplx f = term.envelope(t);
    h += f * term.coupling + std::conj(f) * term.coupling.adjoint();
  }
  return h;
}

template <typename State>
State TimeDependentHamiltonian::apply_impl(double t, const State& x) const {
  if (fn_) return fn_(t) * x;
  State out = static_ * x;
  for (const auto& term : terms_) {
    const cplx f = term.envelope(t);
    if (f == cplx{}) continue;
    out += f * (term.coupling * x);
    out += std::conj(f) * (term.coupling_adjoint * x);
  }
  return out;
}

Matrix TimeDependentHamiltonian::apply(double t, const Matrix& x) const {
  return apply_impl(t, x);
}

Vector TimeDependentHamiltonian::apply(double t, const Vector& x) const {
  return apply_impl(t, x);
}

TimeDependentHamiltonian TimeDependentHamiltonian::with_static_term(
    const Matrix& extra) const {
  if (fn_) {
    return from_function(dim_,
                         [fn = fn_, extra](double t) { return Matrix(fn(t) + extra); });
  }
  return TimeDependentHamiltonian(static_dense_ + extra, dense_terms_);
}

TimeDependentHamiltonian TimeDependentHamiltonian::projected(
    const Matrix& p) const {
  if (p.rows() != dim_) throw DomainError("projector dimension mismatch");
  if (fn_) {
    return from_function(p.cols(), [fn = fn_, p](double t) {
      return Matrix(p.adjoint() * fn(t) * p);
    });
  }
  std::vector<DriveTerm> terms;
  for (const auto& t : dense_terms_) {
    terms.push_back({p.adjoint() * t.coupling * p, t.envelope});
  }
  return TimeDependentHamiltonian(p.adjoint() * static_dense_ * p,
                                  std::move(terms));
}

// --- Grids and probes -------------------------------------------------------

void TimeGrid::validate() const {
  if (!(t_f > t0)) throw DomainError("time grid needs t_f > t0");
  if (n_steps < 100) throw DomainError("time grid needs at least 100 steps");
  if (record_stride < 1) throw DomainError("record stride must be >= 1");
}

TimeGrid TimeGrid::for_rate(double t_f, double fastest, int record_points,
                            double max_phase_step) {
  TimeGrid g;
  g.t_f = t_f;
  const double raw = std::ceil(t_f * fastest / max_phase_step);
  g.n_steps = std::max(100, static_cast<int>(raw));
  const int intervals = std::max(1, record_points - 1);
  g.record_stride = std::max(1, g.n_steps / intervals);
  return g;
}

double fastest_rate(const SystemParams& params, const PulseSchedule& schedule) {
  double peak = std::isnan(schedule.amplitude) ? 0.0 : schedule.amplitude;
  if (std::isnan(schedule.amplitude)) {
    for (int i = 0; i <= 200; ++i) {
      const auto [o1, o2] = schedule.at(schedule.t_f * i / 200);
      peak = std::max({peak, std::abs(o1), std::abs(o2)});
    }
  }
  return std::max({params.lambda_coupling, params.chi(), peak});
}

TimeGrid default_grid(const SystemParams& params, const PulseSchedule& schedule,
                      int record_points) {
  return TimeGrid::for_rate(schedule.t_f, fastest_rate(params, schedule),
                            record_points);
}

std::vector<PopulationProbe> standard_probes(const HilbertSpace& space,
                                             const SystemParams& params) {
  const ZenoEigensystem z = zeno_eigensystem(params);
  return {
      {"psi1", {space.psi_ket(1)}},
      {"psi7", {space.psi_ket(7)}},
      {"theta0", {z.embedded(space, 0)}},
      {"theta12", {z.embedded(space, 1), z.embedded(space, 2)}},
      {"theta34", {z.embedded(space, 3), z.embedded(space, 4)}},
  };
}

double population(const Vector& psi, const PopulationProbe& probe) {
  double p = 0.0;
  for (const auto& s : probe.states) p += std::norm(s.dot(psi));
  return p;
}

double population(const Matrix& rho, const PopulationProbe& probe) {
  double p = 0.0;
  for (const auto& s : probe.states) p += s.dot(rho * s).real();
  return p;
}

const std::vector<double>& Trajectory::population(std::string_view name) const {
  for (std::size_t i = 0; i < probe_names.size(); ++i) {
    if (probe_names[i] == name) return populations[i];
  }
  throw std::out_of_range("no population series named " + std::string(name));
}

void Trajectory::write_csv(std::ostream& os) const {
  std::vector<std::string> header{"t"};
  for (const auto& n : probe_names) header.push_back("P_" + n);
  header.push_back("norm_or_trace");
  header.push_back("F");
  CsvWriter csv(os, header);
  for (std::size_t r = 0; r < times.size(); ++r) {
    std::vector<std::string> cells{format_number(times[r])};
    for (const auto& series : populations) cells.push_back(format_number(series[r]));
    cells.push_back(format_number(norm_or_trace[r]));
    cells.push_back(fidelity.empty() ? std::string("nan")
                                     : format_number(fidelity[r]));
    csv.cells(cells);
  }
}

// --- Integrators ------------------------------------------------------------

namespace {

template <typename State, typename Rhs>
State rk4_step(const Rhs& rhs, double t, const State& y, double dt) {
  const State k1 = rhs(t, y);
  const State k2 = rhs(t + dt / 2, State(y + (dt / 2) * k1));
  const State k3 = rhs(t + dt / 2, State(y + (dt / 2) * k2));
  const State k4 = rhs(t + dt, State(y + dt * k3));
  return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Drives rk4 over the grid, calling `post` after each accepted step and
// `observe` at every record point (including t0 and t_f).
template <typename State, typename Rhs, typename Post, typename Observe>
void integrate(const Rhs& rhs, State y, const TimeGrid& grid,
               const EvolutionOptions& options, Post post, Observe observe) {
  grid.validate();
  observe(grid.t0, y);
  if (!options.adaptive) {
    for (int step = 1; step <= grid.n_steps; ++step) {
      y = rk4_step(rhs, grid.time(step - 1), y, grid.dt());
      post(y);
      if (step % grid.record_stride == 0 || step == grid.n_steps) {
        observe(grid.time(step), y);
      }
    }
    return;
  }

  double h = grid.dt();
  int last = 0;
  for (int step = grid.record_stride;; step += grid.record_stride) {
    step = std::min(step, grid.n_steps);
    double t = grid.time(last);
    const double t_end = grid.time(step);
    while (t < t_end) {
      h = std::min(h, t_end - t);
      const State full = rk4_step(rhs, t, y, h);
      const State half = rk4_step(rhs, t, y, h / 2);
      const State two = rk4_step(rhs, t + h / 2, half, h / 2);
      const double err = (two - full).cwiseAbs().maxCoeff() / 15.0;
      if (err <= options.adaptive_tolerance || h < 1e-12 * grid.t_f) {
        t += h;
        y = two + (two - full) / 15.0;
        post(y);
        const double grow =
            err == 0.0 ? 2.0 : 0.9 * std::pow(options.adaptive_tolerance / err, 0.2);
        h *= std::clamp(grow, 0.2, 2.0);
      } else {
        h *= std::clamp(0.9 * std::pow(options.adaptive_tolerance / err, 0.25),
                        0.1, 0.5);
      }
    }
    observe(t_end, y);
    last = step;
    if (step == grid.n_steps) break;
  }
}

template <typename State>
void start_series(Trajectory& traj, const EvolutionOptions& options) {
  for (const auto& p : options.probes) traj.probe_names.push_back(p.name);
  traj.populations.resize(options.probes.size());
}

}  // namespace

Trajectory evolve_schrodinger(const TimeDependentHamiltonian& h,
                              const Vector& psi0, const TimeGrid& grid,
                              const EvolutionOptions& options) {
  if (psi0.size() != h.dim()) throw DomainError("psi0 dimension mismatch");
  if (std::abs(psi0.norm() - 1.0) > 1e-8) {
    throw DomainError("psi0 must be normalized");
  }

  Trajectory traj;
  traj.mixed = false;
  start_series<Vector>(traj, options);
  const cplx minus_i{0.0, -1.0};
  auto rhs = [&h, minus_i](double t, const Vector& y) -> Vector {
    return minus_i * h.apply(t, y);
  };
  auto post = [&options](Vector& y) {
    if (options.renormalize) y.normalize();
  };
  auto observe = [&](double t, const Vector& y) {
    const double norm = y.norm();
    if (!options.allow_norm_decay &&
        std::abs(norm - 1.0) > options.drift_tolerance) {
      throw AccuracyError("norm drift " + std::to_string(norm - 1.0) +
                          " at t = " + std::to_string(t) +
                          "; reduce the time step");
    }
    traj.times.push_back(t);
    for (std::size_t i = 0; i < options.probes.size(); ++i) {
      traj.populations[i].push_back(population(y, options.probes[i]));
    }
    traj.norm_or_trace.push_back(norm);
    if (options.target) {
      traj.fidelity.push_back(std::norm(options.target->dot(y)));
    }
    if (options.record_states) traj.states.push_back(y);
    traj.final_state = y;
  };
  integrate<Vector>(rhs, psi0, grid, options, post, observe);
  if (!traj.fidelity.empty()) traj.final_fidelity = traj.fidelity.back();
  return traj;
}

namespace {

void check_density(const Matrix& rho0, Eigen::Index n) {
  if (rho0.rows() != n || rho0.cols() != n) {
    throw DomainError("rho0 dimension mismatch");
  }
  if ((rho0 - rho0.adjoint()).cwiseAbs().maxCoeff() > 1e-10) {
    throw DomainError("rho0 must be Hermitian");
  }
  if (std::abs(rho0.trace().real() - 1.0) > 1e-8) {
    throw DomainError("rho0 must have unit trace");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho0, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-8) {
    throw DomainError("rho0 must be positive semidefinite");
  }
}

// Column-major vec: vec(A X B) = (Bᵀ ⊗ A) vec(X).
SparseMatrix commutator_super(const SparseMatrix& a, const SparseMatrix& id) {
  const cplx i{0.0, 1.0};
  SparseMatrix left = Eigen::kroneckerProduct(id, a);
  SparseMatrix right = Eigen::kroneckerProduct(SparseMatrix(a.transpose()), id);
  return SparseMatrix(-i * left + i * right);
}

// Shared recording for both Lindblad kernels.
struct MixedRecorder {
  const EvolutionOptions& options;
  Trajectory& traj;
  double min_eig = std::numeric_limits<double>::infinity();

  void operator()(double t, const Matrix& rho) {
    const double tr = rho.trace().real();
    if (std::abs(tr - 1.0) > options.drift_tolerance) {
      throw AccuracyError("trace drift " + std::to_string(tr - 1.0) +
                          " at t = " + std::to_string(t) +
                          "; reduce the time step");
    }
    traj.max_hermiticity_error =
        std::max(traj.max_hermiticity_error,
                 (rho - rho.adjoint()).cwiseAbs().maxCoeff());
    if (options.check_positivity) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
      min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
    }
    traj.times.push_back(t);
    for (std::size_t i = 0; i < options.probes.size(); ++i) {
      traj.populations[i].push_back(population(rho, options.probes[i]));
    }
    traj.norm_or_trace.push_back(tr);
    if (options.target) {
      traj.fidelity.push_back(fidelity_mixed(rho, *options.target));
    }
    if (options.record_states) traj.density_matrices.push_back(rho);
    traj.final_density = rho;
  }
};

}  // namespace

Trajectory evolve_lindblad(const TimeDependentHamiltonian& h,
                           std::span<const Matrix> lindblad_ops,
                           const Matrix& rho0, const TimeGrid& grid,
                           const EvolutionOptions& options) {
  const Eigen::Index n = h.dim();
  check_density(rho0, n);
  for (const auto& l : lindblad_ops) {
    if (l.rows() != n || l.cols() != n) {
      throw DomainError("Lindblad operator dimension mismatch");
    }
  }

  Trajectory traj;
  traj.mixed = true;
  start_series<Matrix>(traj, options);
  MixedRecorder recorder{options, traj};

  if (h.is_function()) {
    // Dense fallback: ρ̇ = Y + Y† + Σ L ρ L†, Y = −iHρ − ½Kρ.
    Matrix k_half = Matrix::Zero(n, n);
    for (const auto& l : lindblad_ops) k_half += 0.5 * l.adjoint() * l;
    const cplx minus_i{0.0, -1.0};
    auto rhs = [&](double t, const Matrix& rho) -> Matrix {
      Matrix y = minus_i * (h.dense(t) * rho) - k_half * rho;
      Matrix out = y + y.adjoint();
      for (const auto& l : lindblad_ops) out += l * rho * l.adjoint();
      return out;
    };
    auto post = [](Matrix& rho) { rho = 0.5 * (rho + rho.adjoint()).eval(); };
    integrate<Matrix>(rhs, rho0, grid, options, post, std::ref(recorder));
  } else {
    // Sparse Liouvillian on vec(ρ): L₀ + Σ_k f_k S_k + conj(f_k) S_k†'.
    SparseMatrix id(n, n);
    id.setIdentity();
    SparseMatrix l0 = commutator_super(to_sparse(h.static_part()), id);
    for (const auto& m : lindblad_ops) {
      if (m.cwiseAbs().maxCoeff() == 0.0) continue;
      const SparseMatrix l = to_sparse(m);
      const SparseMatrix k = to_sparse(0.5 * m.adjoint() * m);
      SparseMatrix jump = Eigen::kroneckerProduct(SparseMatrix(l.conjugate()), l);
      SparseMatrix left = Eigen::kroneckerProduct(id, k);
      SparseMatrix right = Eigen::kroneckerProduct(SparseMatrix(k.transpose()), id);
      l0 += jump;
      l0 -= left;
      l0 -= right;
    }
    l0.makeCompressed();
    struct SuperTerm {
      SparseMatrix forward;
      SparseMatrix backward;
      Envelope envelope;
    };
    std::vector<SuperTerm> terms;
    for (const auto& t : h.drive_terms()) {
      const SparseMatrix c = to_sparse(t.coupling);
      const SparseMatrix cd = to_sparse(t.coupling.adjoint());
      terms.push_back({commutator_super(c, id), commutator_super(cd, id),
                       t.envelope});
    }
    auto rhs = [&](double t, const Vector& x) -> Vector {
      Vector out(x.size());
      out.noalias() = l0 * x;
      for (const auto& term : terms) {
        const cplx f = term.envelope(t);
        if (f == cplx{}) continue;
        out.noalias() += f * (term.forward * x);
        out.noalias() += std::conj(f) * (term.backward * x);
      }
      return out;
    };
    auto post = [n](Vector& x) {
      Eigen::Map<Matrix> rho(x.data(), n, n);
      rho = 0.5 * (rho + rho.adjoint()).eval();
    };
    auto observe = [&](double t, const Vector& x) {
      recorder(t, Eigen::Map<const Matrix>(x.data(), n, n));
    };
    const Vector x0 = Eigen::Map<const Vector>(rho0.data(), n * n);
    integrate<Vector>(rhs, x0, grid, options, post, observe);
  }

  if (!traj.fidelity.empty()) traj.final_fidelity = traj.fidelity.back();
  if (options.check_positivity) traj.min_eigenvalue = recorder.min_eig;
  return traj;
}

Trajectory evolve_lindblad(const TimeDependentHamiltonian& h,
                           const std::vector<CollapseOperator>& lindblad_ops,
                           const Matrix& rho0, const TimeGrid& grid,
                           const EvolutionOptions& options) {
  std::vector<Matrix> ops;
  ops.reserve(lindblad_ops.size());
  for (const auto& c : lindblad_ops) ops.push_back(c.op);
  return evolve_lindblad(h, std::span<const Matrix>(ops), rho0, grid, options);
}

// --- Metrics ----------------------------------------------------------------

double fidelity_pure(const Vector& psi, const Vector& target) {
  return std::abs(target.dot(psi));
}

cplx overlap_signed(const Vector& psi, const Vector& target) {
  return target.dot(psi);
}

double fidelity_mixed(const Matrix& rho, const Vector& target) {
  return target.dot(rho * target).real();
}

int count_oscillations(std::span<const double> series, double noise_floor) {
  const std::size_t n = series.size();
  if (n < 3) return 0;
  // Compress plateaus so strictness is judged between distinct values.
  std::vector<double> v;
  v.reserve(n);
  for (double x : series) {
    if (v.empty() || x != v.back()) v.push_back(x);
  }
  int count = 0;
  double left_min = v.front();
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (v[i] < v[i - 1] && v[i] < v[i + 1]) left_min = v[i];
    if (!(v[i] > v[i - 1] && v[i] > v[i + 1])) continue;
    // Right base: the minimum reached before the series next exceeds v[i].
    double right_min = v[i];
    for (std::size_t j = i + 1; j < v.size(); ++j) {
      right_min = std::min(right_min, v[j]);
      if (v[j] > v[i]) break;
      if (j + 1 < v.size() && v[j] < v[j - 1] && v[j] < v[j + 1]) break;
    }
    const double base = std::max(left_min, right_min);
    if (v[i] - base >= noise_floor) ++count;
    left_min = v[i];
  }
  return count;
}

}  // namespace stapgate
