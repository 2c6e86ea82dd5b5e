#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "stapgate/model.hpp"
#include "stapgate/pulses.hpp"

using namespace stapgate;

namespace {

SystemParams nominal(double v = 2.0) {
  SystemParams p;
  p.hop_v = v;
  return p;
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(HilbertSpace, DimensionFollowsTruncation) {
  EXPECT_EQ(HilbertSpace(1).dim(), 128u);
  EXPECT_EQ(HilbertSpace(2).dim(), 432u);
}

TEST(HilbertSpace, IndexRoundTrip) {
  const HilbertSpace s(2);
  for (std::size_t i = 0; i < s.dim(); ++i) EXPECT_EQ(s.index(s.state(i)), i);
}

TEST(HilbertSpace, AtomOneIsMostSignificant) {
  const HilbertSpace s(1);
  BasisState a;
  a.atom1 = Level::f;
  BasisState b;
  b.atom2 = Level::e;
  b.c1 = b.c2 = b.fiber = 1;
  EXPECT_GT(s.index(a), s.index(b));
}

TEST(HilbertSpace, NamedStates) {
  EXPECT_EQ(HilbertSpace::psi(1).atom1, Level::f);
  EXPECT_EQ(HilbertSpace::psi(3).c1, 1);
  EXPECT_EQ(HilbertSpace::psi(4).fiber, 1);
  EXPECT_EQ(HilbertSpace::psi(5).c2, 1);
  EXPECT_EQ(HilbertSpace::psi(7).atom2, Level::f);
  EXPECT_EQ(HilbertSpace::phi(1).atom2, Level::s);
  EXPECT_EQ(HilbertSpace::phi(2).atom1, Level::e);
  std::set<BasisState> distinct;
  for (int i = 1; i <= 9; ++i) distinct.insert(HilbertSpace::psi(i));
  EXPECT_EQ(distinct.size(), 9u);
  EXPECT_THROW(HilbertSpace::psi(10), std::out_of_range);
}

TEST(HilbertSpace, EmbeddingsAreIsometries) {
  const HilbertSpace s(1);
  const Matrix p = s.psi_embedding();
  EXPECT_LT(max_abs(p.adjoint() * p - Matrix::Identity(9, 9)), 1e-15);
  const Matrix q = s.phi_embedding();
  EXPECT_LT(max_abs(q.adjoint() * q - Matrix::Identity(5, 5)), 1e-15);
}

TEST(SystemParams, Validation) {
  SystemParams p = nominal();
  EXPECT_NO_THROW(p.validate());
  p.gamma = -1.0;
  EXPECT_THROW(p.validate(), DomainError);
  p = nominal();
  p.lambda_coupling = 2.0;
  EXPECT_THROW(p.validate(), DomainError);
  p.unit_mode = UnitMode::physical;
  EXPECT_NO_THROW(p.validate());
  p.n_max = 0;
  EXPECT_THROW(p.validate(), DomainError);
}

TEST(SystemParams, Chi) {
  EXPECT_DOUBLE_EQ(nominal(2.0).chi(), 3.0);
}

TEST(Hamiltonian, HermitianAtRandomDrives) {
  const SystemParams p = nominal();
  const HilbertSpace s(1);
  for (auto branch : {DriveBranch::f_branch, DriveBranch::s_branch}) {
    const SystemHamiltonian h(s, p, branch);
    const Matrix m = h.at(cplx(0.3, -0.7), cplx(-1.1, 0.2));
    EXPECT_LT(max_abs(m - m.adjoint()), 1e-15);
  }
}

TEST(Hamiltonian, SingleExcitationBlockMatchesChain) {
  // Hand-built chain e₁ –λ– c₁ –v– fiber –v– c₂ –λ– e₂ over ψ₂..ψ₆.
  const double lam = 1.0, v = 0.7;
  Matrix oracle = Matrix::Zero(9, 9);
  oracle(1, 2) = lam;
  oracle(2, 3) = v;
  oracle(3, 4) = v;
  oracle(4, 5) = lam;
  oracle += Matrix(oracle.adjoint());
  EXPECT_LT(max_abs(single_excitation_block(nominal(v)) - oracle), 1e-15);
}

TEST(Hamiltonian, DriveMatrixElements) {
  const SystemParams p = nominal();
  const HilbertSpace s(1);
  const SystemHamiltonian h(s, p);
  const cplx o1(0.4, 0.1), o2(-0.2, 0.5);
  const Matrix m = h.at(o1, o2);
  // Ω₁|e⟩₁⟨f| takes ψ₁ = |f g⟩ to ψ₂ = |e g⟩; Ω₂|e⟩₂⟨f| takes ψ₇ to ψ₆.
  EXPECT_LT(std::abs(s.psi_ket(2).dot(m * s.psi_ket(1)) - o1), 1e-15);
  EXPECT_LT(std::abs(s.psi_ket(6).dot(m * s.psi_ket(7)) - o2), 1e-15);
}

TEST(Hamiltonian, BranchMismatchThrows) {
  const SystemParams p = nominal();
  const HilbertSpace s(1);
  const SystemHamiltonian h(s, p, DriveBranch::s_branch);
  const PulseSchedule sched = stap_schedule(0.258, 50.0, p);
  EXPECT_THROW(h.at(sched, 1.0), DomainError);
  EXPECT_THROW(h.at(sched.with_transition(DriveBranch::s_branch), 60.0),
               DomainError);
}

TEST(Hamiltonian, StaticPartConservesExcitationNumber) {
  const SystemParams p = nominal();
  const HilbertSpace s(2);
  const SystemHamiltonian h(s, p);
  const Matrix n = s.excitation_number();
  const Matrix& h0 = h.static_part();
  EXPECT_LT(max_abs(h0 * n - n * h0), 1e-13);
}

TEST(Hamiltonian, DriveDoesNotConserveExcitationNumber) {
  // |e⟩⟨f| raises Σ|e⟩⟨e| without a photon, so only the static part
  // commutes with it.
  const SystemParams p = nominal();
  const HilbertSpace s(1);
  const SystemHamiltonian h(s, p);
  const Matrix m = h.at(0.5, 0.5);
  const Matrix n = s.excitation_number();
  EXPECT_GT(max_abs(m * n - n * m), 0.1);
}

TEST(Hamiltonian, DrivenHamiltonianConservesBranchNumber) {
  const SystemParams p = nominal();
  for (int n_max : {1, 2}) {
    const HilbertSpace s(n_max);
    for (auto branch : {DriveBranch::f_branch, DriveBranch::s_branch}) {
      const SystemHamiltonian h(s, p, branch);
      const Matrix m = h.at(cplx(0.3, 0.2), cplx(-0.4, 0.9));
      const Matrix n = s.branch_excitation_number(branch);
      EXPECT_LT(max_abs(m * n - n * m), 1e-13);
    }
  }
}

TEST(Lindblad, OperatorCounts) {
  SystemParams p = nominal();
  p.gamma = p.kappa_c = p.kappa_f = 0.01;
  const HilbertSpace s(1);
  EXPECT_EQ(build_lindblad_ops(s, p, DissipationSet::psi).size(), 7u);
  EXPECT_EQ(build_lindblad_ops(s, p, DissipationSet::phi).size(), 5u);
}

TEST(Lindblad, RatesEnterAsSquareRoots) {
  SystemParams p = nominal();
  p.kappa_c = 0.04;
  const HilbertSpace s(1);
  for (const auto& c : build_lindblad_ops(s, p, DissipationSet::psi)) {
    if (c.name.find("c1") == std::string::npos) continue;
    // √κ a₁ takes |g g, c₁⟩ to |g g⟩.
    EXPECT_NEAR(std::abs(s.ket(BasisState{}).dot(c.op * s.psi_ket(3))), 0.2, 1e-15);
  }
}

TEST(Lindblad, NoOperatorRaisesBranchNumber) {
  SystemParams p = nominal();
  p.gamma = p.kappa_c = p.kappa_f = 0.01;
  const HilbertSpace s(1);
  for (auto branch : {DriveBranch::f_branch, DriveBranch::s_branch}) {
    const Matrix n = s.branch_excitation_number(branch);
    for (const auto& c : build_lindblad_ops(s, p, DissipationSet::psi)) {
      for (Eigen::Index j = 0; j < c.op.cols(); ++j) {
        for (Eigen::Index i = 0; i < c.op.rows(); ++i) {
          if (std::abs(c.op(i, j)) == 0.0) continue;
          EXPECT_LE(n(i, i).real(), n(j, j).real()) << c.name;
        }
      }
    }
  }
}

TEST(ExcitationSubspace, IsometryOverLowSector) {
  const HilbertSpace s(1);
  const Matrix p = s.excitation_subspace(1, DriveBranch::f_branch);
  EXPECT_LT(max_abs(p.adjoint() * p - Matrix::Identity(p.cols(), p.cols())), 1e-15);
  for (int i = 1; i <= 9; ++i) {
    EXPECT_NEAR(p.adjoint().operator*(s.psi_ket(i)).norm(), 1.0, 1e-15);
  }
  for (int i = 1; i <= 5; ++i) {
    EXPECT_NEAR(p.adjoint().operator*(s.phi_ket(i)).norm(), 1.0, 1e-15);
  }
}

TEST(ZenoEigensystem, EigenpairsOfStaticBlock) {
  const SystemParams p = nominal(0.8);
  const Matrix block = single_excitation_block(p);
  const ZenoEigensystem z = zeno_eigensystem(p);
  EXPECT_DOUBLE_EQ(z.chi, p.chi());
  for (int m = 0; m < 5; ++m) {
    const Vector& t = z.theta[static_cast<std::size_t>(m)];
    EXPECT_NEAR(t.norm(), 1.0, 1e-14);
    EXPECT_LT((block * t - z.xi[static_cast<std::size_t>(m)] * t).norm(), 1e-14);
  }
}

TEST(EffectiveHamiltonian, Couplings) {
  const SystemParams p = nominal();
  const Matrix h = effective_hamiltonian(p, cplx(0.3, 0.0), cplx(0.0, 0.6));
  EXPECT_NEAR(std::abs(h(1, 0)), 0.3 * 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(std::abs(h(1, 2)), 0.6 * 2.0 / 3.0, 1e-15);
  EXPECT_LT(max_abs(h - h.adjoint()), 1e-15);
  EXPECT_EQ(h(0, 2), cplx(0.0));
}

TEST(SpectatorHamiltonian, MatchesFullSpaceProjection) {
  const SystemParams p = nominal();
  const HilbertSpace s(1);
  const SystemHamiltonian h(s, p);
  const Matrix q = s.phi_embedding();
  const cplx o1(0.35, -0.1);
  const Matrix projected = q.adjoint() * h.at(o1, cplx(0.0)) * q;
  EXPECT_LT(max_abs(projected - spectator_hamiltonian(p, o1)), 1e-15);
}
