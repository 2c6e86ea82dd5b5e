#include "stapgate/model.hpp"

#include <cmath>
#include <sstream>

namespace stapgate {

namespace {

constexpr int kAtomLevels = 4;

Level branch_level(DriveBranch branch) {
  return branch == DriveBranch::f_branch ? Level::f : Level::s;
}

}  // namespace

char to_char(Level level) {
  switch (level) {
    case Level::g: return 'g';
    case Level::f: return 'f';
    case Level::s: return 's';
    case Level::e: return 'e';
  }
  return '?';
}

void SystemParams::validate() const {
  if (!(lambda_coupling > 0.0)) {
    throw DomainError("lambda_coupling must be positive");
  }
  if (hop_v < 0.0 || gamma < 0.0 || kappa_c < 0.0 || kappa_f < 0.0) {
    throw DomainError("rates must be non-negative");
  }
  if (n_max < 1) throw DomainError("n_max must be at least 1");
  if (unit_mode == UnitMode::natural && lambda_coupling != 1.0) {
    throw DomainError("natural units require lambda_coupling == 1");
  }
}

double SystemParams::chi() const {
  return std::sqrt(2.0 * hop_v * hop_v + lambda_coupling * lambda_coupling);
}

std::string BasisState::label() const {
  std::ostringstream os;
  os << '|' << to_char(atom1) << to_char(atom2) << ',' << c1 << c2 << fiber
     << "⟩";
  return os.str();
}

HilbertSpace::HilbertSpace(int n_max) : n_max_(n_max) {
  if (n_max < 1) throw DomainError("n_max must be at least 1");
  const auto m = static_cast<std::size_t>(n_max + 1);
  dim_ = kAtomLevels * kAtomLevels * m * m * m;
}

std::size_t HilbertSpace::index(const BasisState& s) const {
  const int m = mode_dim();
  auto in_range = [m](int n) { return n >= 0 && n < m; };
  if (!in_range(s.c1) || !in_range(s.c2) || !in_range(s.fiber)) {
    throw std::out_of_range("photon number exceeds truncation");
  }
  std::size_t i = static_cast<std::size_t>(s.atom1);
  i = i * kAtomLevels + static_cast<std::size_t>(s.atom2);
  i = i * m + static_cast<std::size_t>(s.c1);
  i = i * m + static_cast<std::size_t>(s.c2);
  i = i * m + static_cast<std::size_t>(s.fiber);
  return i;
}

BasisState HilbertSpace::state(std::size_t i) const {
  if (i >= dim_) throw std::out_of_range("basis index out of range");
  const auto m = static_cast<std::size_t>(mode_dim());
  BasisState s;
  s.fiber = static_cast<int>(i % m);
  i /= m;
  s.c2 = static_cast<int>(i % m);
  i /= m;
  s.c1 = static_cast<int>(i % m);
  i /= m;
  s.atom2 = static_cast<Level>(i % kAtomLevels);
  i /= kAtomLevels;
  s.atom1 = static_cast<Level>(i);
  return s;
}

Vector HilbertSpace::ket(const BasisState& s) const {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(dim_));
  v(static_cast<Eigen::Index>(index(s))) = 1.0;
  return v;
}

BasisState HilbertSpace::psi(int i) {
  using L = Level;
  switch (i) {
    case 1: return {L::f, L::g, 0, 0, 0};
    case 2: return {L::e, L::g, 0, 0, 0};
    case 3: return {L::g, L::g, 1, 0, 0};
    case 4: return {L::g, L::g, 0, 0, 1};
    case 5: return {L::g, L::g, 0, 1, 0};
    case 6: return {L::g, L::e, 0, 0, 0};
    case 7: return {L::g, L::f, 0, 0, 0};
    case 8: return {L::s, L::g, 0, 0, 0};
    case 9: return {L::g, L::s, 0, 0, 0};
    default: throw std::out_of_range("psi index must be in 1..9");
  }
}

BasisState HilbertSpace::phi(int i) {
  using L = Level;
  switch (i) {
    case 1: return {L::f, L::s, 0, 0, 0};
    case 2: return {L::e, L::s, 0, 0, 0};
    case 3: return {L::g, L::s, 1, 0, 0};
    case 4: return {L::g, L::s, 0, 0, 1};
    case 5: return {L::g, L::s, 0, 1, 0};
    default: throw std::out_of_range("phi index must be in 1..5");
  }
}

Matrix HilbertSpace::psi_embedding() const {
  Matrix p = Matrix::Zero(static_cast<Eigen::Index>(dim_), 9);
  for (int i = 1; i <= 9; ++i) p.col(i - 1) = psi_ket(i);
  return p;
}

Matrix HilbertSpace::phi_embedding() const {
  Matrix p = Matrix::Zero(static_cast<Eigen::Index>(dim_), 5);
  for (int i = 1; i <= 5; ++i) p.col(i - 1) = phi_ket(i);
  return p;
}

Matrix HilbertSpace::excitation_number() const {
  const auto n = static_cast<Eigen::Index>(dim_);
  Matrix out = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < dim_; ++i) {
    const BasisState s = state(i);
    const int exc = (s.atom1 == Level::e) + (s.atom2 == Level::e) + s.c1 +
                    s.c2 + s.fiber;
    out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = exc;
  }
  return out;
}

Matrix HilbertSpace::branch_excitation_number(DriveBranch branch) const {
  const Level b = branch == DriveBranch::f_branch ? Level::f : Level::s;
  const auto n = static_cast<Eigen::Index>(dim_);
  Matrix out = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < dim_; ++i) {
    const BasisState s = state(i);
    const int m = (s.atom1 == Level::e || s.atom1 == b) +
                  (s.atom2 == Level::e || s.atom2 == b) + s.c1 + s.c2 + s.fiber;
    out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = m;
  }
  return out;
}

Matrix HilbertSpace::excitation_subspace(int max_excitations,
                                         DriveBranch branch) const {
  const Matrix n = branch_excitation_number(branch);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < n.rows(); ++i) {
    if (n(i, i).real() <= max_excitations) keep.push_back(i);
  }
  Matrix p = Matrix::Zero(n.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    p(keep[j], static_cast<Eigen::Index>(j)) = 1.0;
  }
  return p;
}

HilbertSpace build_space(const SystemParams& params) {
  params.validate();
  return HilbertSpace(params.n_max);
}

Matrix atom_transition(const HilbertSpace& space, int atom, Level to,
                       Level from) {
  if (atom != 1 && atom != 2) throw std::out_of_range("atom must be 1 or 2");
  const auto n = static_cast<Eigen::Index>(space.dim());
  Matrix op = Matrix::Zero(n, n);
  for (std::size_t j = 0; j < space.dim(); ++j) {
    BasisState s = space.state(j);
    Level& lvl = atom == 1 ? s.atom1 : s.atom2;
    if (lvl != from) continue;
    lvl = to;
    op(static_cast<Eigen::Index>(space.index(s)),
       static_cast<Eigen::Index>(j)) = 1.0;
  }
  return op;
}

namespace {

Matrix mode_annihilation(const HilbertSpace& space, int BasisState::*mode) {
  const auto n = static_cast<Eigen::Index>(space.dim());
  Matrix op = Matrix::Zero(n, n);
  for (std::size_t j = 0; j < space.dim(); ++j) {
    BasisState s = space.state(j);
    const int photons = s.*mode;
    if (photons == 0) continue;
    s.*mode = photons - 1;
    op(static_cast<Eigen::Index>(space.index(s)),
       static_cast<Eigen::Index>(j)) = std::sqrt(static_cast<double>(photons));
  }
  return op;
}

}  // namespace

Matrix cavity_annihilation(const HilbertSpace& space, int cavity) {
  if (cavity == 1) return mode_annihilation(space, &BasisState::c1);
  if (cavity == 2) return mode_annihilation(space, &BasisState::c2);
  throw std::out_of_range("cavity must be 1 or 2");
}

Matrix fiber_annihilation(const HilbertSpace& space) {
  return mode_annihilation(space, &BasisState::fiber);
}

SystemHamiltonian::SystemHamiltonian(const HilbertSpace& space,
                                     const SystemParams& params,
                                     DriveBranch branch)
    : space_(space), branch_(branch) {
  params.validate();
  const Matrix a1 = cavity_annihilation(space, 1);
  const Matrix a2 = cavity_annihilation(space, 2);
  const Matrix b = fiber_annihilation(space);

  const Matrix h_ac =
      params.lambda_coupling *
      (a1 * atom_transition(space, 1, Level::e, Level::g) +
       a2 * atom_transition(space, 2, Level::e, Level::g));
  const Matrix h_cf = params.hop_v * b.adjoint() * (a1 + a2);
  static_ = h_ac + h_cf;
  static_ += Matrix(static_.adjoint());

  const Level lower = branch_level(branch);
  couplings_[0] = atom_transition(space, 1, Level::e, lower);
  couplings_[1] = atom_transition(space, 2, Level::e, lower);
}

const Matrix& SystemHamiltonian::drive_coupling(int atom) const {
  if (atom != 1 && atom != 2) throw std::out_of_range("atom must be 1 or 2");
  return couplings_[static_cast<std::size_t>(atom - 1)];
}

Matrix SystemHamiltonian::at(cplx omega1, cplx omega2) const {
  Matrix drive = omega1 * couplings_[0] + omega2 * couplings_[1];
  return static_ + drive + Matrix(drive.adjoint());
}

Matrix SystemHamiltonian::at(const PulseSchedule& drives, double t) const {
  if (drives.transition != branch_) {
    throw DomainError("schedule addresses a different transition branch");
  }
  const auto [o1, o2] = drives.at(t);
  return at(o1, o2);
}

Matrix build_hamiltonian(const HilbertSpace& space, const SystemParams& params,
                         const PulseSchedule& drives, double t) {
  return SystemHamiltonian(space, params, drives.transition).at(drives, t);
}

std::vector<CollapseOperator> build_lindblad_ops(const HilbertSpace& space,
                                                 const SystemParams& params,
                                                 DissipationSet set) {
  params.validate();
  const double g_branch = std::sqrt(params.gamma / 2.0);
  const double k = std::sqrt(params.kappa_c);
  const double kf = std::sqrt(params.kappa_f);

  std::vector<CollapseOperator> ops;
  ops.push_back({"gamma_f1", g_branch * atom_transition(space, 1, Level::f, Level::e)});
  ops.push_back({"gamma_f2", g_branch * atom_transition(space, 2, Level::f, Level::e)});
  if (set != DissipationSet::phi) {
    ops.push_back({"gamma_g1", g_branch * atom_transition(space, 1, Level::g, Level::e)});
    ops.push_back({"gamma_g2", g_branch * atom_transition(space, 2, Level::g, Level::e)});
  }
  ops.push_back({"kappa_c1", k * cavity_annihilation(space, 1)});
  ops.push_back({"kappa_c2", k * cavity_annihilation(space, 2)});
  ops.push_back({"kappa_f", kf * fiber_annihilation(space)});
  return ops;
}

Vector ZenoEigensystem::embedded(const HilbertSpace& space, int m) const {
  return space.psi_embedding() * theta.at(static_cast<std::size_t>(m));
}

ZenoEigensystem zeno_eigensystem(const SystemParams& params) {
  const double lam = params.lambda_coupling;
  const double v = params.hop_v;
  if (!(lam > 0.0) || !(v > 0.0)) {
    throw DomainError("zeno eigensystem needs lambda > 0 and v > 0");
  }
  const double chi = params.chi();

  ZenoEigensystem z;
  z.chi = chi;
  z.xi = {0.0, lam, -lam, chi, -chi};
  for (auto& t : z.theta) t = Vector::Zero(9);

  // Components are indexed ψ₁..ψ₉ → 0..8.
  z.theta[0](1) = v / chi;
  z.theta[0](3) = -lam / chi;
  z.theta[0](5) = v / chi;

  z.theta[1](1) = -0.5;
  z.theta[1](2) = -0.5;
  z.theta[1](4) = 0.5;
  z.theta[1](5) = 0.5;

  z.theta[2](1) = -0.5;
  z.theta[2](2) = 0.5;
  z.theta[2](4) = -0.5;
  z.theta[2](5) = 0.5;

  const double pre = lam / (2.0 * chi);
  for (int sign : {+1, -1}) {
    Vector& t = z.theta[sign > 0 ? 3 : 4];
    t(1) = pre;
    t(2) = sign * pre * chi / lam;
    t(3) = pre * 2.0 * v / lam;
    t(4) = sign * pre * chi / lam;
    t(5) = pre;
  }
  return z;
}

Matrix single_excitation_block(const SystemParams& params) {
  const HilbertSpace space = build_space(params);
  const SystemHamiltonian h(space, params);
  const Matrix p = space.psi_embedding();
  return p.adjoint() * h.static_part() * p;
}

Matrix effective_hamiltonian(const SystemParams& params, cplx omega1,
                             cplx omega2) {
  const double r = params.hop_v / params.chi();
  Matrix h = Matrix::Zero(3, 3);
  h(1, 0) = r * omega1;
  h(1, 2) = r * omega2;
  h(0, 1) = std::conj(h(1, 0));
  h(2, 1) = std::conj(h(1, 2));
  return h;
}

Matrix effective_hamiltonian(const SystemParams& params,
                             const PulseSchedule& drives, double t) {
  const auto [o1, o2] = drives.at(t);
  return effective_hamiltonian(params, o1, o2);
}

Matrix spectator_hamiltonian(const SystemParams& params, cplx omega1) {
  Matrix h = Matrix::Zero(5, 5);
  h(1, 0) = omega1;
  h(1, 2) = params.lambda_coupling;
  h(3, 2) = params.hop_v;
  h(3, 4) = params.hop_v;
  return h + Matrix(h.adjoint());
}

}  // namespace stapgate
