#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "stapgate/dynamics.hpp"
#include "stapgate/pulses.hpp"

using namespace stapgate;

namespace {

// Constant σx drive of strength w on a qubit.
TimeDependentHamiltonian rabi(double w) {
  Matrix sx = Matrix::Zero(2, 2);
  sx(0, 1) = sx(1, 0) = w;
  return TimeDependentHamiltonian(sx, {});
}

Vector ground() {
  Vector v = Vector::Zero(2);
  v(0) = 1.0;
  return v;
}

}  // namespace

TEST(TimeGrid, Validation) {
  TimeGrid g;
  g.t_f = 1.0;
  EXPECT_NO_THROW(g.validate());
  g.n_steps = 99;
  EXPECT_THROW(g.validate(), DomainError);
  g.n_steps = 100;
  g.t_f = 0.0;
  EXPECT_THROW(g.validate(), DomainError);
  g.t_f = 1.0;
  g.record_stride = 0;
  EXPECT_THROW(g.validate(), DomainError);
}

TEST(TimeGrid, ForRateRespectsPhaseStep) {
  const TimeGrid g = TimeGrid::for_rate(50.0, 3.0, 201, 0.02);
  EXPECT_LE(g.dt() * 3.0, 0.02 + 1e-15);
  EXPECT_GE(g.n_steps, 100);
  EXPECT_NEAR(g.time(g.n_steps), 50.0, 1e-12);
  EXPECT_GE(TimeGrid::for_rate(0.01, 1.0).n_steps, 100);
}

TEST(FastestRate, CoversCouplingsAndDrive) {
  SystemParams p;
  p.hop_v = 2.0;
  const PulseSchedule s = stap_schedule(0.05, 10.0, p);
  EXPECT_DOUBLE_EQ(fastest_rate(p, s), std::max(3.0, s.amplitude));
}

TEST(Schrodinger, RabiOscillation) {
  const double w = 0.8;
  EvolutionOptions opt;
  opt.target = ground();
  const TimeGrid grid = TimeGrid::for_rate(10.0, w, 101, 0.01);
  const Trajectory tr = evolve_schrodinger(rabi(w), ground(), grid, opt);
  ASSERT_EQ(tr.times.size(), tr.fidelity.size());
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    const double c = std::cos(w * tr.times[k]);
    EXPECT_NEAR(tr.fidelity[k], c * c, 1e-8);
    EXPECT_NEAR(tr.norm_or_trace[k], 1.0, 1e-9);
  }
}

TEST(Schrodinger, AdaptiveMatchesFixed) {
  const double w = 0.8;
  EvolutionOptions opt;
  opt.adaptive = true;
  const TimeGrid grid = TimeGrid::for_rate(10.0, w, 11, 0.05);
  const Trajectory tr = evolve_schrodinger(rabi(w), ground(), grid, opt);
  EXPECT_NEAR(std::abs(tr.final_state(0)), std::abs(std::cos(w * 10.0)), 1e-8);
}

TEST(Schrodinger, RejectsUnnormalisedInput) {
  const TimeGrid grid = TimeGrid::for_rate(1.0, 1.0);
  EXPECT_THROW(evolve_schrodinger(rabi(1.0), 2.0 * ground(), grid), DomainError);
}

TEST(Schrodinger, NormDriftRaisesAccuracyError) {
  Matrix h = Matrix::Zero(2, 2);
  h(0, 0) = cplx(0.0, -0.5);
  const TimeDependentHamiltonian leaky(h, {});
  const TimeGrid grid = TimeGrid::for_rate(5.0, 1.0);
  EXPECT_THROW(evolve_schrodinger(leaky, ground(), grid), AccuracyError);
  EvolutionOptions opt;
  opt.allow_norm_decay = true;
  const Trajectory tr = evolve_schrodinger(leaky, ground(), grid, opt);
  EXPECT_NEAR(tr.final_state.norm(), std::exp(-2.5), 1e-8);
}

TEST(Schrodinger, DrivenTermsMatchFunctionSource) {
  SystemParams p;
  p.hop_v = 2.0;
  const PulseSchedule s = stap_schedule(0.258, 20.0, p);
  const TimeDependentHamiltonian sparse = TimeDependentHamiltonian::spectator(p, s);
  const TimeDependentHamiltonian fn = TimeDependentHamiltonian::from_function(
      5, [&](double t) { return spectator_hamiltonian(p, s.at(t).first); });
  Vector psi0 = Vector::Zero(5);
  psi0(0) = 1.0;
  const TimeGrid grid = TimeGrid::for_rate(20.0, 3.0);
  const Vector a = evolve_schrodinger(sparse, psi0, grid).final_state;
  const Vector b = evolve_schrodinger(fn, psi0, grid).final_state;
  EXPECT_LT((a - b).norm(), 1e-12);
}

TEST(Lindblad, AmplitudeDampingDecay) {
  const double gamma = 0.3;
  Matrix l = Matrix::Zero(2, 2);
  l(0, 1) = std::sqrt(gamma);
  Matrix rho0 = Matrix::Zero(2, 2);
  rho0(1, 1) = 1.0;
  Vector excited = Vector::Zero(2);
  excited(1) = 1.0;
  EvolutionOptions opt;
  opt.target = excited;
  opt.check_positivity = true;
  const std::vector<Matrix> ops{l};
  const TimeGrid grid = TimeGrid::for_rate(5.0, 1.0, 51, 0.01);
  const Trajectory tr = evolve_lindblad(TimeDependentHamiltonian(Matrix::Zero(2, 2), {}),
                                        std::span<const Matrix>(ops), rho0, grid, opt);
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    EXPECT_NEAR(tr.fidelity[k], std::exp(-gamma * tr.times[k]), 1e-9);
    EXPECT_NEAR(tr.norm_or_trace[k], 1.0, 1e-12);
  }
  EXPECT_GE(tr.min_eigenvalue, -1e-12);
}

TEST(Lindblad, DephasedRabiAgreesAcrossKernels) {
  // Sparse Liouvillian (matrix source) versus dense commutator (function source).
  Matrix sz = Matrix::Zero(2, 2);
  sz(0, 0) = 0.2;
  sz(1, 1) = -0.2;
  Matrix c = Matrix::Zero(2, 2);
  c(1, 0) = 1.0;
  const Envelope env = [](double t) { return cplx(0.5 * std::sin(t), 0.1); };
  const TimeDependentHamiltonian h(Matrix::Zero(2, 2), {{c, env}});
  const TimeDependentHamiltonian fn = TimeDependentHamiltonian::from_function(
      2, [&](double t) {
        const Matrix d = env(t) * c;
        return Matrix(d + d.adjoint());
      });
  const std::vector<Matrix> ops{sz};
  Matrix rho0 = Matrix::Zero(2, 2);
  rho0(0, 0) = 1.0;
  const TimeGrid grid = TimeGrid::for_rate(8.0, 1.0);
  const Matrix a = evolve_lindblad(h, std::span<const Matrix>(ops), rho0, grid).final_density;
  const Matrix b = evolve_lindblad(fn, std::span<const Matrix>(ops), rho0, grid).final_density;
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Lindblad, RejectsInvalidDensity) {
  const std::vector<Matrix> ops;
  const TimeGrid grid = TimeGrid::for_rate(1.0, 1.0);
  Matrix bad = Matrix::Identity(2, 2);
  EXPECT_THROW(evolve_lindblad(rabi(1.0), std::span<const Matrix>(ops), bad, grid),
               DomainError);
  Matrix nonherm = Matrix::Zero(2, 2);
  nonherm(0, 0) = 1.0;
  nonherm(0, 1) = 0.3;
  EXPECT_THROW(evolve_lindblad(rabi(1.0), std::span<const Matrix>(ops), nonherm, grid),
               DomainError);
}

TEST(Projection, SectorRunEqualsFullSpace) {
  SystemParams p;
  p.hop_v = 2.0;
  const HilbertSpace space(1);
  const PulseSchedule s = stap_schedule(0.258, 50.0, p);
  const SystemHamiltonian sys(space, p);
  const TimeDependentHamiltonian full = TimeDependentHamiltonian::driven(sys, s);
  const Matrix proj = space.excitation_subspace(1, DriveBranch::f_branch);
  const TimeGrid grid = default_grid(p, s);
  const Vector psi0 = space.psi_ket(1);
  const Vector a = evolve_schrodinger(full, psi0, grid).final_state;
  const Vector b =
      evolve_schrodinger(full.projected(proj), proj.adjoint() * psi0, grid).final_state;
  EXPECT_LT((a - proj * b).norm(), 1e-10);
}

TEST(Probes, StandardSet) {
  SystemParams p;
  p.hop_v = 2.0;
  const HilbertSpace space(1);
  const auto probes = standard_probes(space, p);
  ASSERT_EQ(probes.size(), 5u);
  EXPECT_EQ(probes[0].name, "psi1");
  EXPECT_NEAR(population(space.psi_ket(1), probes[0]), 1.0, 1e-15);
  const Vector psi7 = space.psi_ket(7);
  EXPECT_NEAR(population(Matrix(psi7 * psi7.adjoint()), probes[1]), 1.0, 1e-15);
}

TEST(Metrics, Fidelities) {
  Vector a = Vector::Zero(2), b = Vector::Zero(2);
  a(0) = 1.0;
  b(0) = cplx(0.0, 0.6);
  b(1) = 0.8;
  EXPECT_NEAR(fidelity_pure(b, a), 0.6, 1e-15);
  EXPECT_NEAR(std::abs(overlap_signed(b, a) - cplx(0.0, 0.6)), 0.0, 1e-15);
  const Matrix rho = b * b.adjoint();
  EXPECT_NEAR(fidelity_mixed(rho, a), 0.36, 1e-15);
}

TEST(Oscillations, CountsPeriods) {
  for (int k : {1, 3, 7}) {
    std::vector<double> s;
    for (int i = 0; i <= 2000; ++i) {
      s.push_back(0.5 - 0.5 * std::cos(2 * kPi * k * i / 2000.0 + 1e-3));
    }
    EXPECT_EQ(count_oscillations(s), k);
  }
}

TEST(Oscillations, IgnoresNoiseAndPlateaus) {
  std::vector<double> s{0.0, 0.5, 0.5, 0.5, 0.0, 0.0002, 0.0, 0.3, 0.3};
  EXPECT_EQ(count_oscillations(s), 1);
  EXPECT_EQ(count_oscillations(s, 1e-5), 2);
  EXPECT_EQ(count_oscillations(std::vector<double>{}), 0);
}

TEST(Trajectory, CsvHeader) {
  EvolutionOptions opt;
  opt.target = ground();
  opt.probes.push_back({"up", {ground()}});
  const Trajectory tr =
      evolve_schrodinger(rabi(0.5), ground(), TimeGrid::for_rate(1.0, 1.0, 3), opt);
  std::ostringstream os;
  tr.write_csv(os);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "t,P_up,norm_or_trace,F\r");
  EXPECT_EQ(tr.population("up").size(), tr.times.size());
  EXPECT_THROW(tr.population("down"), std::out_of_range);
}
