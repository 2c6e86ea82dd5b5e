#include "stapgate/gate.hpp"

#include <cmath>
#include <ostream>

#include "stapgate/csv.hpp"

namespace stapgate {

namespace {

constexpr double kProtocolTolerance = 1e-6;

// Qutrit digit of a ground level (g = 0, f = 1, s = 2).
int qutrit(Level level) {
  if (level == Level::e) throw ProtocolError("excited level in a register");
  return static_cast<int>(level);
}

char qutrit_char(int d) { return "gfs"[d]; }

}  // namespace

std::string_view to_string(StageType stage) {
  return stage == StageType::l_branch ? "l_branch" : "r_branch";
}

DriveBranch drive_branch(StageType stage) {
  return stage == StageType::l_branch ? DriveBranch::f_branch
                                      : DriveBranch::s_branch;
}

std::array<std::pair<Level, Level>, 4> computational_inputs(StageType stage) {
  const Level d = stage == StageType::l_branch ? Level::f : Level::s;
  const Level q = stage == StageType::l_branch ? Level::s : Level::f;
  return {{{d, Level::g}, {d, q}, {Level::g, Level::g}, {Level::g, q}}};
}

std::string GateMatrix::input_label(int j) const {
  const auto in = computational_inputs(stage).at(static_cast<std::size_t>(j));
  return {to_char(in.first), to_char(in.second)};
}

GateMatrix ideal_gate(StageType stage) {
  GateMatrix g;
  g.stage = stage;
  g.u = Matrix::Identity(4, 4);
  g.u(0, 0) = -1.0;
  return g;
}

GateMatrix extract_gate(const PulseSchedule& schedule,
                        const SystemParams& params,
                        const std::optional<NoiseModel>& noise,
                        const GateExtractOptions& options) {
  const StageType stage = schedule.transition == DriveBranch::f_branch
                              ? StageType::l_branch
                              : StageType::r_branch;
  SystemParams p = params;
  if (noise) {
    p.gamma = noise->gamma;
    p.kappa_c = noise->kappa_c;
    p.kappa_f = noise->kappa_f;
  }
  p.validate();

  const HilbertSpace space = build_space(p);
  const SystemHamiltonian sys(space, p, schedule.transition);
  TimeDependentHamiltonian h = TimeDependentHamiltonian::driven(sys, schedule);
  const TimeGrid grid = options.grid ? *options.grid : default_grid(p, schedule);

  std::vector<Matrix> ops;
  const bool noisy = p.has_noise();
  if (noisy) {
    for (auto& c : build_lindblad_ops(space, p,
                                      noise ? noise->set : DissipationSet::full)) {
      ops.push_back(std::move(c.op));
    }
  }

  const auto inputs = computational_inputs(stage);
  std::array<Vector, 4> kets;
  for (std::size_t j = 0; j < 4; ++j) {
    kets[j] = space.ket({inputs[j].first, inputs[j].second, 0, 0, 0});
  }

  if (options.restrict_sector) {
    const Matrix proj = space.excitation_subspace(1, schedule.transition);
    h = h.projected(proj);
    for (auto& op : ops) op = proj.adjoint() * op * proj;
    for (auto& k : kets) k = proj.adjoint() * k;
  }
  const TimeDependentHamiltonian closed = h;
  if (noisy) {
    Matrix k = Matrix::Zero(h.dim(), h.dim());
    for (const auto& op : ops) k += op.adjoint() * op;
    h = h.with_static_term(cplx{0.0, -0.5} * k);
  }

  GateMatrix gate;
  gate.stage = stage;
  gate.u = Matrix::Zero(4, 4);
  EvolutionOptions evo;
  evo.allow_norm_decay = noisy;
  for (std::size_t j = 0; j < 4; ++j) {
    const Trajectory traj = evolve_schrodinger(h, kets[j], grid, evo);
    double kept = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
      const cplx a = kets[i].dot(traj.final_state);
      gate.u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a;
      kept += std::norm(a);
    }
    gate.leakage[j] = std::max(0.0, 1.0 - kept);
    gate.diagonal_fidelity[j] = std::norm(gate.u(static_cast<Eigen::Index>(j),
                                                 static_cast<Eigen::Index>(j)));
    if (gate.leakage[j] > 0.5) gate.failed = true;
  }

  if (noisy && options.lindblad_diagonals) {
    for (std::size_t j = 0; j < 4; ++j) {
      EvolutionOptions lo;
      lo.target = kets[j];
      const Matrix rho0 = kets[j] * kets[j].adjoint();
      gate.diagonal_fidelity[j] =
          evolve_lindblad(closed, std::span<const Matrix>(ops), rho0, grid, lo)
              .final_fidelity;
    }
  }
  return gate;
}

PhaseCheck gate_phase_check(const GateMatrix& gate) {
  PhaseCheck out;
  double phase = std::arg(gate.u(0, 0) / gate.u(2, 2));
  if (phase <= -kPi) phase += 2 * kPi;
  out.phase = phase;
  const Matrix ideal = ideal_gate(gate.stage).u;
  out.fidelity = std::abs((ideal.adjoint() * gate.u).trace()) / 4.0;
  return out;
}

void write_gate_csv(std::ostream& os, const GateMatrix& gate) {
  CsvWriter csv(os, {"stage", "row", "col", "input_row", "input_col", "re",
                     "im", "abs"});
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const cplx a = gate.u(i, j);
      csv.row(to_string(gate.stage), i, j, gate.input_label(i),
              gate.input_label(j), a.real(), a.imag(), std::abs(a));
    }
  }
  for (int j = 0; j < 4; ++j) {
    csv.row(to_string(gate.stage), -1, j, "leakage", gate.input_label(j),
            gate.leakage[static_cast<std::size_t>(j)], 0.0,
            gate.leakage[static_cast<std::size_t>(j)]);
  }
}

// --- Cluster register -------------------------------------------------------

ClusterRegister::ClusterRegister(int n_sites) : n_(n_sites) {
  if (n_sites < 1) throw DomainError("register needs at least one site");
  if (n_sites > kMaxSites) {
    throw CapacityError("register size " + std::to_string(n_sites) +
                        " exceeds the maximum of " + std::to_string(kMaxSites));
  }
  std::size_t d = 1;
  for (int i = 0; i < n_sites; ++i) d *= 3;
  amps_ = Vector::Zero(static_cast<Eigen::Index>(d));
  amps_(0) = 1.0;
}

ClusterRegister ClusterRegister::product(
    const std::vector<std::array<cplx, 3>>& sites) {
  ClusterRegister reg(static_cast<int>(sites.size()));
  for (std::size_t idx = 0; idx < reg.dim(); ++idx) {
    cplx a = 1.0;
    for (int k = 1; k <= reg.n_; ++k) {
      a *= sites[static_cast<std::size_t>(k - 1)]
                [static_cast<std::size_t>(reg.digit(idx, k))];
    }
    reg.amps_(static_cast<Eigen::Index>(idx)) = a;
  }
  return reg;
}

int ClusterRegister::digit(std::size_t index, int site) const {
  for (int k = n_; k > site; --k) index /= 3;
  return static_cast<int>(index % 3);
}

std::string ClusterRegister::label(std::size_t index) const {
  std::string s(static_cast<std::size_t>(n_), 'g');
  for (int k = n_; k >= 1; --k) {
    s[static_cast<std::size_t>(k - 1)] = qutrit_char(static_cast<int>(index % 3));
    index /= 3;
  }
  return s;
}

std::size_t ClusterRegister::index_of(std::string_view label) const {
  if (label.size() != static_cast<std::size_t>(n_)) {
    throw DomainError("basis label length differs from register size");
  }
  std::size_t idx = 0;
  for (char c : label) {
    int d = 0;
    switch (c) {
      case 'g': d = 0; break;
      case 'f': d = 1; break;
      case 's': d = 2; break;
      default: throw DomainError(std::string("unknown level '") + c + "'");
    }
    idx = idx * 3 + static_cast<std::size_t>(d);
  }
  return idx;
}

cplx ClusterRegister::amplitude(std::string_view label) const {
  return amps_(static_cast<Eigen::Index>(index_of(label)));
}

void ClusterRegister::write_csv(std::ostream& os, double threshold) const {
  CsvWriter csv(os, {"basis", "re", "im"});
  for (std::size_t i = 0; i < dim(); ++i) {
    const cplx a = amps_(static_cast<Eigen::Index>(i));
    if (std::abs(a) <= threshold) continue;
    csv.row(label(i), a.real(), a.imag());
  }
}

StageType stage_for_site(int site) {
  return site % 2 == 1 ? StageType::l_branch : StageType::r_branch;
}

ClusterRegister apply_two_atom_gate(const ClusterRegister& reg, int site,
                                    const GateMatrix& gate, StageType stage) {
  if (gate.stage != stage) {
    throw ProtocolError("gate was extracted for " +
                        std::string(to_string(gate.stage)) + ", stage needs " +
                        std::string(to_string(stage)));
  }
  if (site < 1 || site + 1 > reg.size()) {
    throw DomainError("site pair (" + std::to_string(site) + ", " +
                      std::to_string(site + 1) + ") outside the register");
  }

  // 9×9 map on (a, b) = 3a + b: the 4×4 gate on its inputs, identity elsewhere.
  const auto inputs = computational_inputs(stage);
  std::array<int, 4> slot{};
  for (std::size_t j = 0; j < 4; ++j) {
    slot[j] = 3 * qutrit(inputs[j].first) + qutrit(inputs[j].second);
  }
  Eigen::Matrix<cplx, 9, 9> m = Eigen::Matrix<cplx, 9, 9>::Identity();
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      m(slot[i], slot[j]) = gate.u(static_cast<Eigen::Index>(i),
                                   static_cast<Eigen::Index>(j));
    }
  }
  std::array<bool, 9> allowed{};
  for (int s : slot) allowed[static_cast<std::size_t>(s)] = true;

  const Vector& in = reg.amplitudes();
  double outside = 0.0;
  for (std::size_t idx = 0; idx < reg.dim(); ++idx) {
    const int pair = 3 * reg.digit(idx, site) + reg.digit(idx, site + 1);
    if (!allowed[static_cast<std::size_t>(pair)]) {
      outside += std::norm(in(static_cast<Eigen::Index>(idx)));
    }
  }
  if (outside > kProtocolTolerance) {
    throw ProtocolError("sites (" + std::to_string(site) + ", " +
                        std::to_string(site + 1) + ") hold population " +
                        std::to_string(outside) + " outside the " +
                        std::string(to_string(stage)) + " levels");
  }

  // Stride of site+1 is 3^(N-site-1); site has stride 3× that.
  std::size_t stride = 1;
  for (int k = reg.size(); k > site + 1; --k) stride *= 3;
  ClusterRegister out = reg;
  Vector& amps = out.amplitudes();
  const std::size_t block = 9 * stride;
  for (std::size_t hi = 0; hi < reg.dim(); hi += block) {
    for (std::size_t lo = 0; lo < stride; ++lo) {
      Eigen::Matrix<cplx, 9, 1> v;
      for (int p = 0; p < 9; ++p) {
        v(p) = in(static_cast<Eigen::Index>(hi + static_cast<std::size_t>(p) * stride + lo));
      }
      const Eigen::Matrix<cplx, 9, 1> w = m * v;
      for (int p = 0; p < 9; ++p) {
        amps(static_cast<Eigen::Index>(hi + static_cast<std::size_t>(p) * stride + lo)) = w(p);
      }
    }
  }
  out.set_stage(site);
  return out;
}

ClusterRegister cluster_initial_state(int n_sites) {
  if (n_sites < 2) throw DomainError("cluster protocol needs N >= 2");
  if (n_sites > ClusterRegister::kMaxSites) {
    throw CapacityError("register size " + std::to_string(n_sites) +
                        " exceeds the maximum of " +
                        std::to_string(ClusterRegister::kMaxSites));
  }
  const double h = 1.0 / std::sqrt(2.0);
  std::vector<std::array<cplx, 3>> sites;
  for (int k = 1; k <= n_sites; ++k) {
    if (k % 2 == 1) {
      sites.push_back({h, h, 0.0});
    } else {
      sites.push_back({h, 0.0, h});
    }
  }
  return ClusterRegister::product(sites);
}

namespace {

std::vector<ClusterRegister> ideal_stages(int n_sites) {
  std::vector<ClusterRegister> out{cluster_initial_state(n_sites)};
  for (int k = 1; k < n_sites; ++k) {
    const StageType st = stage_for_site(k);
    out.push_back(apply_two_atom_gate(out.back(), k, ideal_gate(st), st));
  }
  return out;
}

}  // namespace

ClusterRegister ideal_cluster_state(int n_sites) {
  return ideal_stages(n_sites).back();
}

ClusterResult cluster_protocol(int n_sites, const GateSource& source) {
  const std::vector<ClusterRegister> ideal = ideal_stages(n_sites);

  ClusterResult result;
  if (const auto* sim = std::get_if<SimulatedGates>(&source)) {
    const PulseSchedule l = sim->schedule.with_transition(DriveBranch::f_branch);
    result.l_gate = extract_gate(l, sim->params, sim->noise, sim->options);
    if (n_sites > 2) {
      const PulseSchedule r = sim->schedule.with_transition(DriveBranch::s_branch);
      result.r_gate = extract_gate(r, sim->params, sim->noise, sim->options);
    }
  } else {
    result.l_gate = ideal_gate(StageType::l_branch);
    result.r_gate = ideal_gate(StageType::r_branch);
  }

  ClusterRegister reg = ideal.front();
  for (int k = 1; k < n_sites; ++k) {
    const StageType st = stage_for_site(k);
    const GateMatrix& g = st == StageType::l_branch ? *result.l_gate : *result.r_gate;
    reg = apply_two_atom_gate(reg, k, g, st);
    const Vector& target = ideal[static_cast<std::size_t>(k)].amplitudes();
    result.stage_fidelities.push_back(std::norm(target.dot(reg.amplitudes())));
    const ClusterRegister single =
        apply_two_atom_gate(ideal[static_cast<std::size_t>(k - 1)], k, g, st);
    result.gate_fidelities.push_back(
        std::norm(target.dot(single.amplitudes())));
  }
  result.reg = reg;
  return result;
}

void write_cluster_stages_csv(std::ostream& os, const ClusterResult& result) {
  CsvWriter csv(os, {"stage", "sites", "type", "gate_fidelity",
                     "cumulative_fidelity"});
  for (std::size_t k = 0; k < result.stage_fidelities.size(); ++k) {
    const int site = static_cast<int>(k) + 1;
    csv.row(site, std::to_string(site) + "-" + std::to_string(site + 1),
            to_string(stage_for_site(site)), result.gate_fidelities[k],
            result.stage_fidelities[k]);
  }
}

}  // namespace stapgate
