#include <benchmark/benchmark.h>

#include "stapgate/dynamics.hpp"
#include "stapgate/experiments.hpp"
#include "stapgate/gate.hpp"
#include "stapgate/pulses.hpp"

namespace {

using namespace stapgate;

SystemParams nominal() {
  SystemParams p;
  p.hop_v = 2.0;
  return p;
}

void BM_BuildHamiltonian(benchmark::State& state) {
  const SystemParams p = nominal();
  const HilbertSpace space(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    SystemHamiltonian h(space, p);
    benchmark::DoNotOptimize(h.static_part().data());
  }
  state.SetLabel("dim " + std::to_string(space.dim()));
}
BENCHMARK(BM_BuildHamiltonian)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_StapPulses(benchmark::State& state) {
  const SystemParams p = nominal();
  const PulseSchedule s = stap_schedule(0.258, 50.0, p);
  double t = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(s.at(t));
    t = t > 49.0 ? 0.0 : t + 0.37;
  }
}
BENCHMARK(BM_StapPulses);

void BM_LRPhases(benchmark::State& state) {
  const SystemParams p = nominal();
  const PulseSchedule s = stap_schedule(0.258, 50.0, p);
  for (auto _ : state) benchmark::DoNotOptimize(lr_phases(s, p).alpha_plus);
}
BENCHMARK(BM_LRPhases)->Unit(benchmark::kMillisecond);

void BM_SchrodingerF1(benchmark::State& state) {
  const SystemParams p = nominal();
  const PulseSchedule s = stap_schedule(0.258, 50.0, p);
  SimulationSettings settings;
  settings.truncation =
      state.range(0) ? Truncation::single_excitation : Truncation::full;
  for (auto _ : state) benchmark::DoNotOptimize(run_f1(s, p, settings).fidelity);
}
BENCHMARK(BM_SchrodingerF1)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_LindbladF1(benchmark::State& state) {
  SystemParams p = nominal();
  p.gamma = p.kappa_c = p.kappa_f = 0.01;
  const PulseSchedule s = stap_schedule(0.258, 50.0, p);
  SimulationSettings settings;
  for (auto _ : state) benchmark::DoNotOptimize(run_f1(s, p, settings).fidelity);
}
BENCHMARK(BM_LindbladF1)->Unit(benchmark::kMillisecond);

void BM_ExtractGate(benchmark::State& state) {
  const SystemParams p = nominal();
  const PulseSchedule s = stap_schedule(0.258, 50.0, p);
  for (auto _ : state) benchmark::DoNotOptimize(extract_gate(s, p).u(0, 0));
}
BENCHMARK(BM_ExtractGate)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
