#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "stapgate/gate.hpp"
#include "stapgate/pulses.hpp"

using namespace stapgate;

namespace {

SystemParams nominal() {
  SystemParams p;
  p.hop_v = 2.0;
  return p;
}

// Sign of a register basis string after the ideal stages: −1 for each
// adjacent pair (f, g) at an odd site or (s, g) at an even site.
double cluster_sign(const std::string& label) {
  int flips = 0;
  for (std::size_t k = 0; k + 1 < label.size(); ++k) {
    const char d = k % 2 == 0 ? 'f' : 's';
    if (label[k] == d && label[k + 1] == 'g') ++flips;
  }
  return flips % 2 ? -1.0 : 1.0;
}

bool in_cluster_span(const std::string& label) {
  for (std::size_t k = 0; k < label.size(); ++k) {
    const char d = k % 2 == 0 ? 'f' : 's';
    if (label[k] != 'g' && label[k] != d) return false;
  }
  return true;
}

}  // namespace

TEST(Gate, ComputationalInputs) {
  const auto l = computational_inputs(StageType::l_branch);
  EXPECT_EQ(l[0], std::make_pair(Level::f, Level::g));
  EXPECT_EQ(l[1], std::make_pair(Level::f, Level::s));
  EXPECT_EQ(l[3], std::make_pair(Level::g, Level::s));
  const auto r = computational_inputs(StageType::r_branch);
  EXPECT_EQ(r[0], std::make_pair(Level::s, Level::g));
  EXPECT_EQ(r[1], std::make_pair(Level::s, Level::f));
  EXPECT_EQ(drive_branch(StageType::r_branch), DriveBranch::s_branch);
}

TEST(Gate, IdealIsControlledPhase) {
  const GateMatrix g = ideal_gate(StageType::l_branch);
  EXPECT_EQ(g.u(0, 0), cplx(-1.0));
  for (int j = 1; j < 4; ++j) EXPECT_EQ(g.u(j, j), cplx(1.0));
  EXPECT_DOUBLE_EQ(gate_phase_check(g).fidelity, 1.0);
  EXPECT_NEAR(gate_phase_check(g).phase, kPi, 1e-15);
  EXPECT_EQ(g.input_label(0), "fg");
}

TEST(Gate, NoiselessExtraction) {
  const SystemParams p = nominal();
  const PulseSchedule s = stap_schedule(0.258, 50.0, p);
  const GateMatrix g = extract_gate(s, p);
  EXPECT_FALSE(g.failed);
  // Inputs with no driven atom are untouched.
  EXPECT_NEAR(std::abs(g.u(2, 2) - 1.0), 0.0, 1e-10);
  EXPECT_NEAR(std::abs(g.u(3, 3) - 1.0), 0.0, 1e-10);
  const PhaseCheck pc = gate_phase_check(g);
  EXPECT_NEAR(std::abs(pc.phase), kPi, 0.05);
  EXPECT_GT(pc.fidelity, 0.98);
  // Off-diagonal elements vanish: the dynamics never mixes inputs.
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (i != j) EXPECT_LT(std::abs(g.u(i, j)), 1e-10);
    }
  }
}

TEST(Gate, SectorAndFullSpaceAgree) {
  const SystemParams p = nominal();
  const PulseSchedule s = stap_schedule(0.258, 30.0, p);
  GateExtractOptions full;
  full.restrict_sector = false;
  const GateMatrix a = extract_gate(s, p);
  const GateMatrix b = extract_gate(s, p, std::nullopt, full);
  EXPECT_LT((a.u - b.u).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Gate, NoisyExtractionLosesPopulation) {
  const SystemParams p = nominal();
  const PulseSchedule s = stap_schedule(0.258, 50.0, p);
  NoiseModel n;
  n.gamma = 0.01;
  const GateMatrix g = extract_gate(s, p, n);
  EXPECT_GT(g.leakage[0], 0.0);
  EXPECT_LT(g.diagonal_fidelity[0], 0.9997);
  EXPECT_GT(g.diagonal_fidelity[0], std::norm(g.u(0, 0)) - 1e-12);
  EXPECT_NEAR(g.diagonal_fidelity[2], 1.0, 1e-10);
}

TEST(Gate, CsvRows) {
  std::ostringstream os;
  write_gate_csv(os, ideal_gate(StageType::r_branch));
  std::istringstream in(os.str());
  std::string line;
  int rows = -1;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 20);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')),
            "stage,row,col,input_row,input_col,re,im,abs\r");
}

TEST(ClusterRegister, LabelsAndCapacity) {
  const ClusterRegister r(3);
  EXPECT_EQ(r.dim(), 27u);
  EXPECT_EQ(r.label(0), "ggg");
  EXPECT_EQ(r.label(26), "sss");
  EXPECT_EQ(r.index_of("fsg"), 1u * 9 + 2u * 3);
  EXPECT_EQ(r.digit(r.index_of("fsg"), 2), 2);
  EXPECT_THROW(r.index_of("fx"), DomainError);
  EXPECT_NO_THROW(ClusterRegister(ClusterRegister::kMaxSites));
  EXPECT_THROW(ClusterRegister(ClusterRegister::kMaxSites + 1), CapacityError);
}

TEST(ClusterRegister, ProtocolErrors) {
  const ClusterRegister init = cluster_initial_state(3);
  EXPECT_THROW(apply_two_atom_gate(init, 1, ideal_gate(StageType::r_branch),
                                   StageType::l_branch),
               ProtocolError);
  // Sites 1, 2 hold (f or g, s or g): not r-stage levels.
  EXPECT_THROW(apply_two_atom_gate(init, 1, ideal_gate(StageType::r_branch),
                                   StageType::r_branch),
               ProtocolError);
  EXPECT_THROW(apply_two_atom_gate(init, 3, ideal_gate(StageType::l_branch),
                                   StageType::l_branch),
               DomainError);
}

TEST(Cluster, IdealTwoAtomState) {
  const ClusterResult r = cluster_protocol(2, IdealGates{});
  EXPECT_NEAR(r.reg.amplitude("fs").real(), 0.5, 1e-15);
  EXPECT_NEAR(r.reg.amplitude("fg").real(), -0.5, 1e-15);
  EXPECT_NEAR(r.reg.amplitude("gs").real(), 0.5, 1e-15);
  EXPECT_NEAR(r.reg.amplitude("gg").real(), 0.5, 1e-15);
  EXPECT_NEAR(r.reg.norm(), 1.0, 1e-15);
}

TEST(Cluster, IdealStatesFollowSignRule) {
  for (int n : {3, 4, 5}) {
    const ClusterRegister c = ideal_cluster_state(n);
    const double a = std::pow(2.0, -0.5 * n);
    for (std::size_t i = 0; i < c.dim(); ++i) {
      const std::string lab = c.label(i);
      const cplx expected = in_cluster_span(lab) ? a * cluster_sign(lab) : 0.0;
      EXPECT_LT(std::abs(c.amplitudes()(static_cast<Eigen::Index>(i)) - expected), 1e-12)
          << lab;
    }
  }
}

TEST(Cluster, StageAlternation) {
  EXPECT_EQ(stage_for_site(1), StageType::l_branch);
  EXPECT_EQ(stage_for_site(2), StageType::r_branch);
  EXPECT_EQ(stage_for_site(3), StageType::l_branch);
}

TEST(Cluster, SimulatedThreeAtoms) {
  SimulatedGates sim;
  sim.params = nominal();
  sim.schedule = stap_schedule(0.258, 50.0, sim.params);
  const ClusterResult r = cluster_protocol(3, sim);
  ASSERT_EQ(r.stage_fidelities.size(), 2u);
  EXPECT_GE(r.stage_fidelities.back(), 0.96);
  EXPECT_LE(r.stage_fidelities[1], r.stage_fidelities[0] + 1e-12);
  std::ostringstream os;
  write_cluster_stages_csv(os, r);
  EXPECT_NE(os.str().find("r_branch"), std::string::npos);
}
