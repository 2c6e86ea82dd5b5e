#include "stapgate/experiments.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>

#include <json.hpp>

#include "stapgate/csv.hpp"
#include "stapgate/pulses.hpp"

#ifndef STAPGATE_VERSION
#define STAPGATE_VERSION "unknown"
#endif

namespace stapgate {

// --- Table ------------------------------------------------------------------

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != header_.size()) {
    throw std::invalid_argument("table row has " + std::to_string(row.size()) +
                                " cells, header has " +
                                std::to_string(header_.size()));
  }
  rows_.push_back(std::move(row));
}

void Table::append(const Table& other) {
  if (other.header_ != header_) throw std::invalid_argument("table headers differ");
  rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end());
}

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == name) return i;
  }
  throw std::out_of_range("no column named " + std::string(name));
}

double Table::number(std::size_t row, std::string_view name) const {
  const Cell& c = rows_.at(row).at(column(name));
  if (const auto* d = std::get_if<double>(&c)) return *d;
  if (const auto* i = std::get_if<long long>(&c)) return static_cast<double>(*i);
  throw std::invalid_argument("column " + std::string(name) + " is not numeric");
}

std::string Table::text(std::size_t row, std::string_view name) const {
  const Cell& c = rows_.at(row).at(column(name));
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
  return std::to_string(std::get<long long>(c));
}

std::size_t Table::error_count() const {
  std::size_t col = header_.size();
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == "error") col = i;
  }
  if (col == header_.size()) return 0;
  std::size_t n = 0;
  for (const auto& r : rows_) {
    const auto* s = std::get_if<std::string>(&r[col]);
    if (s && !s->empty()) ++n;
  }
  return n;
}

void Table::write_csv(std::ostream& os) const {
  CsvWriter csv(os, header_);
  std::vector<std::string> cells;
  for (const auto& r : rows_) {
    cells.clear();
    for (const auto& c : r) {
      if (const auto* d = std::get_if<double>(&c)) {
        cells.push_back(format_number(*d));
      } else if (const auto* i = std::get_if<long long>(&c)) {
        cells.push_back(std::to_string(*i));
      } else {
        cells.push_back(std::get<std::string>(c));
      }
    }
    csv.cells(cells);
  }
}

// --- Single runs ------------------------------------------------------------

SimulationSettings SimulationSettings::from(const RunConfig& config) {
  SimulationSettings s;
  s.record_points = config.experiment.record_points;
  s.max_phase_step = config.experiment.max_phase_step;
  s.truncation = config.experiment.truncation;
  return s;
}

namespace {

TimeGrid grid_for(const PulseSchedule& schedule, const SystemParams& params,
                  const SimulationSettings& settings) {
  return TimeGrid::for_rate(schedule.t_f, fastest_rate(params, schedule),
                            settings.record_points, settings.max_phase_step);
}

std::string error_text(const std::exception& e) {
  if (dynamic_cast<const AccuracyError*>(&e)) {
    return std::string("accuracy: ") + e.what();
  }
  return e.what();
}

}  // namespace

RunResult run_population(const PulseSchedule& schedule,
                         const SystemParams& params, const BasisState& initial,
                         const SimulationSettings& settings, DissipationSet set,
                         const std::vector<PopulationProbe>& probes) {
  const HilbertSpace space = build_space(params);
  const SystemHamiltonian sys(space, params, schedule.transition);
  TimeDependentHamiltonian h = TimeDependentHamiltonian::driven(sys, schedule);
  Vector psi0 = space.ket(initial);
  std::vector<Matrix> ops;
  if (params.has_noise()) {
    for (auto& c : build_lindblad_ops(space, params, set)) ops.push_back(std::move(c.op));
  }

  EvolutionOptions options;
  options.probes = probes;
  if (settings.truncation == Truncation::single_excitation) {
    const Matrix p = space.excitation_subspace(1, schedule.transition);
    psi0 = p.adjoint() * psi0;
    if (std::abs(psi0.norm() - 1.0) > 1e-12) {
      throw DomainError("initial state " + initial.label() +
                        " lies outside the simulated sector");
    }
    h = h.projected(p);
    for (auto& op : ops) op = p.adjoint() * op * p;
    for (auto& probe : options.probes) {
      for (auto& s : probe.states) s = p.adjoint() * s;
    }
  }
  options.target = psi0;

  const TimeGrid grid = grid_for(schedule, params, settings);
  RunResult out;
  if (ops.empty()) {
    out.trajectory = evolve_schrodinger(h, psi0, grid, options);
    out.overlap = psi0.dot(out.trajectory.final_state);
    out.fidelity = std::norm(out.overlap);
  } else {
    const Matrix rho0 = psi0 * psi0.adjoint();
    out.trajectory =
        evolve_lindblad(h, std::span<const Matrix>(ops), rho0, grid, options);
    out.fidelity = out.trajectory.final_fidelity;
  }
  return out;
}

RunResult run_f1(const PulseSchedule& schedule, const SystemParams& params,
                 const SimulationSettings& settings,
                 const std::vector<PopulationProbe>& probes) {
  return run_population(schedule, params, HilbertSpace::psi(1), settings,
                        DissipationSet::psi, probes);
}

double deviated_fidelity(const PulseSchedule& nominal,
                         const SystemParams& params, const Deviation& d,
                         const SimulationSettings& settings) {
  SystemParams p = params;
  p.lambda_coupling *= 1.0 + d.lambda;
  p.hop_v *= 1.0 + d.v;
  // A perturbed λ is no longer the unit of the natural scale.
  if (d.lambda != 0.0) p.unit_mode = UnitMode::physical;
  PulseSchedule s = nominal.scaled(1.0 + d.omega0);
  const double duration = nominal.t_f * (1.0 + d.T);
  s = duration >= nominal.t_f ? s.extended_to(duration) : s.truncated_to(duration);
  return run_f1(s, p, settings).fidelity;
}

// --- Spectator --------------------------------------------------------------

SpectatorRun run_spectator(int zeta, double t_f, const SystemParams& params,
                           int record_points, double max_phase_step) {
  SpectatorRun out;
  out.zeta = zeta;
  out.t_f = t_f;
  out.epsilon = epsilon_for_zeta(zeta);
  const PulseSchedule schedule = stap_schedule(out.epsilon, t_f, params);
  out.omega0 = schedule.amplitude;

  const TimeDependentHamiltonian h =
      TimeDependentHamiltonian::spectator(params, schedule);
  Vector psi0 = Vector::Zero(5);
  psi0(0) = 1.0;
  EvolutionOptions options;
  for (int j : {0, 2, 4}) {
    Vector e = Vector::Zero(5);
    e(j) = 1.0;
    options.probes.push_back({"phi" + std::to_string(j + 1), {e}});
  }
  const TimeGrid grid = TimeGrid::for_rate(t_f, fastest_rate(params, schedule),
                                           record_points, max_phase_step);
  const Trajectory traj = evolve_schrodinger(h, psi0, grid, options);

  out.times = traj.times;
  for (std::size_t k = 0; k < 3; ++k) {
    out.simulated[k] = traj.populations[k];
    out.dark[k].reserve(traj.times.size());
  }
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const Vector d = dark_state_spectator(schedule, params, traj.times[i]).state;
    for (std::size_t k = 0; k < 3; ++k) {
      const double pd = std::norm(d(static_cast<Eigen::Index>(2 * k)));
      out.dark[k].push_back(pd);
      out.max_deviation =
          std::max(out.max_deviation, std::abs(out.simulated[k][i] - pd));
    }
  }
  out.oscillations = count_oscillations(out.simulated[0]);
  return out;
}

// --- Comparison -------------------------------------------------------------

std::vector<PopulationProbe> comparison_probes(const HilbertSpace& space,
                                               const SystemParams& params) {
  std::vector<PopulationProbe> probes;
  for (int i = 1; i <= 7; ++i) {
    probes.push_back({"psi" + std::to_string(i), {space.psi_ket(i)}});
  }
  for (const auto& p : standard_probes(space, params)) {
    if (p.name.rfind("theta", 0) == 0) probes.push_back(p);
  }
  return probes;
}

const SchemeRun& ComparisonReport::get(std::string_view scheme) const {
  for (const auto& r : runs) {
    if (r.scheme == scheme) return r;
  }
  throw std::out_of_range("no comparison run for " + std::string(scheme));
}

Table ComparisonReport::summary() const {
  Table t({"scheme", "t_f", "amplitude", "F1", "overlap_re", "overlap_im",
           "theta0_peak", "psi2_peak", "psi6_peak"});
  for (const auto& r : runs) {
    t.add_row({r.scheme, r.schedule.t_f, r.schedule.amplitude, r.fidelity,
               r.overlap.real(), r.overlap.imag(), r.theta0_peak, r.psi2_peak,
               r.psi6_peak});
  }
  return t;
}

Table ComparisonReport::trajectories() const {
  std::vector<std::string> header{"scheme", "t"};
  if (!runs.empty()) {
    for (const auto& n : runs.front().trajectory.probe_names) header.push_back("P_" + n);
  }
  header.push_back("F");
  Table t(header);
  for (const auto& r : runs) {
    const Trajectory& tr = r.trajectory;
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
      std::vector<Cell> row{r.scheme, tr.times[i]};
      for (const auto& series : tr.populations) row.emplace_back(series[i]);
      row.emplace_back(tr.fidelity[i]);
      t.add_row(std::move(row));
    }
  }
  return t;
}

ComparisonReport run_comparison(const RunConfig& config) {
  SystemParams p = nominal_params(config);
  const double lam = p.lambda_coupling;
  p.hop_v = 2.0 * lam;
  const SimulationSettings settings = SimulationSettings::from(config);
  const HilbertSpace space = build_space(p);
  const auto probes = comparison_probes(space, p);

  ComparisonReport report;
  report.runs.resize(3);
  report.runs[0].scheme = "stap";
  report.runs[0].schedule = stap_schedule(0.258, 50.0 / lam, p);
  report.runs[1].scheme = "adiabatic";
  report.runs[1].schedule = adiabatic_schedule(0.2 * lam, 100.0 / lam, p).schedule;
  report.runs[2].scheme = "zeno";
  report.runs[2].schedule = zeno_schedule(0.1 * lam, p);

  parallel_for(report.runs.size(), config.experiment.workers, [&](std::size_t i) {
    SchemeRun& r = report.runs[i];
    RunResult res = run_f1(r.schedule, p, settings, probes);
    r.fidelity = res.fidelity;
    r.overlap = res.overlap;
    auto peak = [&](std::string_view name) {
      const auto& s = res.trajectory.population(name);
      return *std::max_element(s.begin(), s.end());
    };
    r.theta0_peak = peak("theta0");
    r.psi2_peak = peak("psi2");
    r.psi6_peak = peak("psi6");
    r.trajectory = std::move(res.trajectory);
  });
  return report;
}

// --- Decoherence ------------------------------------------------------------

Table run_decoherence(DissipationSet subspace, const std::vector<double>& rates,
                      const RunConfig& config) {
  const SystemParams base = nominal_params(config);
  const double lam = base.lambda_coupling;
  const PulseSchedule schedule = build_schedule(config);
  const SimulationSettings settings = SimulationSettings::from(config);
  const BasisState initial =
      subspace == DissipationSet::phi ? HilbertSpace::phi(1) : HilbertSpace::psi(1);
  const std::string tag = subspace == DissipationSet::phi ? "phi" : "psi";

  struct Point {
    std::string channel;
    double rate = 0.0;
    double fidelity = std::numeric_limits<double>::quiet_NaN();
    std::string error;
  };
  std::vector<Point> points(1);
  points[0].channel = "none";
  for (const char* ch : {"gamma", "kappa_c", "kappa_f"}) {
    for (double r : rates) {
      Point pt;
      pt.channel = ch;
      pt.rate = r;
      points.push_back(pt);
    }
  }

  parallel_for(points.size(), config.experiment.workers, [&](std::size_t i) {
    Point& pt = points[i];
    SystemParams p = base;
    if (pt.channel == "gamma") p.gamma = pt.rate * lam;
    if (pt.channel == "kappa_c") p.kappa_c = pt.rate * lam;
    if (pt.channel == "kappa_f") p.kappa_f = pt.rate * lam;
    try {
      pt.fidelity =
          run_population(schedule, p, initial, settings, subspace).fidelity;
    } catch (const AccuracyError& e) {
      pt.error = error_text(e);
    } catch (const DomainError& e) {
      pt.error = error_text(e);
    }
  });

  const double f0 = points.front().fidelity;
  Table t({"subspace", "channel", "rate_over_lambda", "rate", "F", "loss",
           "error"});
  for (std::size_t i = 1; i < points.size(); ++i) {
    const Point& pt = points[i];
    t.add_row({tag, pt.channel, pt.rate, pt.rate * lam, pt.fidelity,
               f0 - pt.fidelity, pt.error});
  }
  return t;
}

// --- Experiments ------------------------------------------------------------

namespace {

const AxisSpec& axis(const SweepSpec& spec, std::string_view name) {
  for (const auto& a : spec.axes) {
    if (a.name == name) return a;
  }
  throw std::invalid_argument("sweep " + spec.experiment_id + " needs axis " +
                              std::string(name));
}

struct GridPoint {
  std::vector<double> x;
  double fidelity = std::numeric_limits<double>::quiet_NaN();
  cplx overlap{std::numeric_limits<double>::quiet_NaN(), 0.0};
  double omega0 = std::numeric_limits<double>::quiet_NaN();
  std::string error;
};

// Fills `points` in parallel; per-point domain and accuracy failures go to
// the error column.
template <typename Fn>
void evaluate(std::vector<GridPoint>& points, int workers, Fn fn) {
  parallel_for(points.size(), workers, [&](std::size_t i) {
    try {
      fn(points[i]);
    } catch (const AccuracyError& e) {
      points[i].error = error_text(e);
    } catch (const DomainError& e) {
      points[i].error = error_text(e);
    }
  });
}

std::vector<GridPoint> product_grid(const AxisSpec& a, const AxisSpec& b) {
  std::vector<GridPoint> pts;
  for (double x : a.values()) {
    for (double y : b.values()) {
      GridPoint pt;
      pt.x = {x, y};
      pts.push_back(pt);
    }
  }
  return pts;
}

std::vector<NamedTable> fig3a(const SweepSpec& spec, const RunConfig& config) {
  const SystemParams base = nominal_params(config);
  const double lam = base.lambda_coupling;
  const double eps = epsilon_for_zeta(config.schedule.zeta.value_or(1));
  const SimulationSettings settings = SimulationSettings::from(config);
  auto pts = product_grid(axis(spec, "lambda_tf"), axis(spec, "v"));
  evaluate(pts, config.experiment.workers, [&](GridPoint& pt) {
    SystemParams p = base;
    p.hop_v = pt.x[1] * lam;
    const PulseSchedule s = stap_schedule(eps, pt.x[0] / lam, p);
    pt.omega0 = s.amplitude / lam;
    const RunResult r = run_f1(s, p, settings);
    pt.fidelity = r.fidelity;
    pt.overlap = r.overlap;
  });
  Table t({"lambda_tf", "v_over_lambda", "epsilon", "omega0_over_lambda", "F1",
           "overlap_re", "overlap_im", "error"});
  for (const auto& pt : pts) {
    t.add_row({pt.x[0], pt.x[1], eps, pt.omega0, pt.fidelity, pt.overlap.real(),
               pt.overlap.imag(), pt.error});
  }
  return {{"fig3a_tf_v", std::move(t)}};
}

std::vector<NamedTable> fig3b(const SweepSpec& spec, const RunConfig& config) {
  const SystemParams base = nominal_params(config);
  const double lam = base.lambda_coupling;
  const double eps = epsilon_for_zeta(config.schedule.zeta.value_or(1));
  Table t({"lambda_tf", "v_over_lambda", "epsilon", "omega0_over_lambda"});
  for (double tf : axis(spec, "lambda_tf").values()) {
    for (double v : axis(spec, "v").values()) {
      SystemParams p = base;
      p.hop_v = v * lam;
      t.add_row({tf, v, eps, stap_amplitude(eps, tf / lam, p) / lam});
    }
  }
  return {{"fig3b_amplitude", std::move(t)}};
}

std::vector<NamedTable> fig4(const SweepSpec& spec, const RunConfig& config) {
  const SystemParams p = nominal_params(config);
  const double t_f = schedule_duration(config);
  const SimulationSettings settings = SimulationSettings::from(config);
  std::vector<GridPoint> pts;
  for (double e : axis(spec, "epsilon").values()) {
    GridPoint pt;
    pt.x = {e};
    pts.push_back(pt);
  }
  evaluate(pts, config.experiment.workers, [&](GridPoint& pt) {
    const PulseSchedule s = stap_schedule(pt.x[0], t_f, p);
    pt.omega0 = s.amplitude / p.lambda_coupling;
    const RunResult r = run_f1(s, p, settings);
    pt.fidelity = r.fidelity;
    pt.overlap = r.overlap;
  });
  Table t({"epsilon", "omega0_over_lambda", "F1", "overlap_re", "overlap_im",
           "error"});
  for (const auto& pt : pts) {
    t.add_row({pt.x[0], pt.omega0, pt.fidelity, pt.overlap.real(),
               pt.overlap.imag(), pt.error});
  }
  return {{"fig4_epsilon", std::move(t)}};
}

std::vector<NamedTable> fig5(const RunConfig& config) {
  const SystemParams p = nominal_params(config);
  const PulseSchedule s = build_schedule(config);
  const HilbertSpace space = build_space(p);
  std::vector<PopulationProbe> probes{{"psi1", {space.psi_ket(1)}},
                                      {"psi5", {space.psi_ket(5)}}};
  for (const auto& pr : standard_probes(space, p)) {
    if (pr.name != "psi1") probes.push_back(pr);
  }
  const RunResult r = run_f1(s, p, SimulationSettings::from(config), probes);
  const Trajectory& tr = r.trajectory;
  std::vector<std::string> header{"t", "omega1_re", "omega1_im", "omega2_re",
                                  "omega2_im"};
  for (const auto& n : tr.probe_names) header.push_back("P_" + n);
  header.push_back("norm_or_trace");
  header.push_back("F");
  Table t(header);
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    const auto [o1, o2] = s.at(tr.times[i]);
    std::vector<Cell> row{tr.times[i], o1.real(), o1.imag(), o2.real(), o2.imag()};
    for (const auto& series : tr.populations) row.emplace_back(series[i]);
    row.emplace_back(tr.norm_or_trace[i]);
    row.emplace_back(tr.fidelity[i]);
    t.add_row(std::move(row));
  }
  return {{"fig5_pulses_populations", std::move(t)}};
}

std::vector<NamedTable> fig6(const RunConfig& config) {
  const SystemParams p = nominal_params(config);
  const double lam = p.lambda_coupling;
  const std::vector<int> zetas{1, 2, 5};
  std::vector<SpectatorRun> runs(zetas.size());
  const int points = std::max(config.experiment.record_points, 2001);
  parallel_for(zetas.size(), config.experiment.workers, [&](std::size_t i) {
    runs[i] = run_spectator(zetas[i], 50.0 * zetas[i] / lam, p, points,
                            config.experiment.max_phase_step);
  });
  Table series({"zeta", "t", "P1_R", "P3_R", "P5_R", "P1_D", "P3_D", "P5_D"});
  Table summary({"zeta", "t_f", "epsilon", "omega0", "oscillations_P1",
                 "max_deviation"});
  for (const auto& r : runs) {
    for (std::size_t i = 0; i < r.times.size(); ++i) {
      series.add_row({static_cast<long long>(r.zeta), r.times[i],
                      r.simulated[0][i], r.simulated[1][i], r.simulated[2][i],
                      r.dark[0][i], r.dark[1][i], r.dark[2][i]});
    }
    summary.add_row({static_cast<long long>(r.zeta), r.t_f, r.epsilon, r.omega0,
                     static_cast<long long>(r.oscillations), r.max_deviation});
  }
  return {{"fig6_dark_zeta", std::move(series)}, {"fig6_summary", std::move(summary)}};
}

std::vector<NamedTable> fig7(const RunConfig& config) {
  const ComparisonReport report = run_comparison(config);
  return {{"fig7_adiabatic_zeno", report.trajectories()},
          {"fig7_summary", report.summary()}};
}

std::vector<NamedTable> fig8(const SweepSpec& spec, const RunConfig& config) {
  const auto rates = axis(spec, "rate").values();
  Table t = run_decoherence(DissipationSet::psi, rates, config);
  t.append(run_decoherence(DissipationSet::phi, rates, config));
  return {{"fig8_decoherence", std::move(t)}};
}

std::vector<NamedTable> fig9(const SweepSpec& spec, const RunConfig& config) {
  const SystemParams p = nominal_params(config);
  const PulseSchedule nominal = build_schedule(config);
  const SimulationSettings settings = SimulationSettings::from(config);
  const double f0 = run_f1(nominal, p, settings).fidelity;

  struct Panel {
    std::string name;
    std::string a;
    std::string b;
  };
  const std::vector<Panel> panels{{"lambda_v", "delta_lambda", "delta_v"},
                                  {"omega0_T", "delta_omega0", "delta_T"}};
  Table t({"panel", "delta_lambda", "delta_v", "delta_omega0", "delta_T", "F1",
           "loss", "error"});
  for (const auto& panel : panels) {
    auto pts = product_grid(axis(spec, panel.a), axis(spec, panel.b));
    const bool first = panel.name == "lambda_v";
    evaluate(pts, config.experiment.workers, [&](GridPoint& pt) {
      Deviation d;
      if (first) {
        d.lambda = pt.x[0];
        d.v = pt.x[1];
      } else {
        d.omega0 = pt.x[0];
        d.T = pt.x[1];
      }
      pt.fidelity = deviated_fidelity(nominal, p, d, settings);
    });
    for (const auto& pt : pts) {
      const double dl = first ? pt.x[0] : 0.0;
      const double dv = first ? pt.x[1] : 0.0;
      const double dO = first ? 0.0 : pt.x[0];
      const double dT = first ? 0.0 : pt.x[1];
      t.add_row({panel.name, dl, dv, dO, dT, pt.fidelity, f0 - pt.fidelity,
                 pt.error});
    }
  }
  return {{"fig9_robustness", std::move(t)}};
}

std::optional<NoiseModel> config_noise(const RunConfig& config) {
  const NoiseModel& n = config.noise;
  if (n.gamma == 0.0 && n.kappa_c == 0.0 && n.kappa_f == 0.0) return std::nullopt;
  return n;
}

GateExtractOptions gate_options(const RunConfig& config,
                                const PulseSchedule& schedule,
                                const SystemParams& params) {
  GateExtractOptions o;
  o.grid = TimeGrid::for_rate(schedule.t_f, fastest_rate(params, schedule),
                              config.experiment.record_points,
                              config.experiment.max_phase_step);
  o.restrict_sector = config.experiment.truncation == Truncation::single_excitation;
  return o;
}

void add_gate_rows(Table& t, const GateMatrix& g) {
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const cplx a = g.u(i, j);
      t.add_row({std::string(to_string(g.stage)), static_cast<long long>(i),
                 static_cast<long long>(j), g.input_label(i), g.input_label(j),
                 a.real(), a.imag(), std::abs(a)});
    }
  }
}

std::vector<NamedTable> gate_table(const RunConfig& config) {
  const SystemParams p = nominal_params(config);
  const PulseSchedule l = build_schedule(config);
  const PulseSchedule r = l.with_transition(DriveBranch::s_branch);
  const auto noise = config_noise(config);
  std::array<GateMatrix, 2> gates;
  const std::array<const PulseSchedule*, 2> schedules{&l, &r};
  parallel_for(2, config.experiment.workers, [&](std::size_t i) {
    gates[i] = extract_gate(*schedules[i], p, noise,
                            gate_options(config, *schedules[i], p));
  });
  Table matrix({"stage", "row", "col", "input_row", "input_col", "re", "im", "abs"});
  Table summary({"stage", "input", "leakage", "diagonal_fidelity", "phase",
                 "process_fidelity", "failed"});
  for (const auto& g : gates) {
    add_gate_rows(matrix, g);
    const PhaseCheck pc = gate_phase_check(g);
    for (int j = 0; j < 4; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      summary.add_row({std::string(to_string(g.stage)), g.input_label(j),
                       g.leakage[ju], g.diagonal_fidelity[ju], pc.phase,
                       pc.fidelity, static_cast<long long>(g.failed)});
    }
  }
  return {{"gate_table", std::move(matrix)}, {"gate_summary", std::move(summary)}};
}

Table register_table(const ClusterRegister& reg) {
  Table t({"basis", "re", "im"});
  for (std::size_t i = 0; i < reg.dim(); ++i) {
    const cplx a = reg.amplitudes()(static_cast<Eigen::Index>(i));
    if (std::abs(a) <= 1e-14) continue;
    t.add_row({reg.label(i), a.real(), a.imag()});
  }
  return t;
}

std::vector<NamedTable> cluster(const RunConfig& config) {
  const int n = config.experiment.cluster_sites;
  SimulatedGates sim;
  sim.params = nominal_params(config);
  sim.schedule = build_schedule(config);
  sim.noise = config_noise(config);
  sim.options = gate_options(config, sim.schedule, sim.params);
  const ClusterResult res = cluster_protocol(n, sim);
  const ClusterRegister ideal = ideal_cluster_state(n);

  Table stages({"stage", "sites", "type", "gate_fidelity", "cumulative_fidelity"});
  for (std::size_t k = 0; k < res.stage_fidelities.size(); ++k) {
    const int site = static_cast<int>(k) + 1;
    stages.add_row({static_cast<long long>(site),
                    std::to_string(site) + "-" + std::to_string(site + 1),
                    std::string(to_string(stage_for_site(site))),
                    res.gate_fidelities[k], res.stage_fidelities[k]});
  }
  return {{"cluster_stages", std::move(stages)},
          {"cluster_amplitudes", register_table(res.reg)},
          {"cluster_ideal_amplitudes", register_table(ideal)}};
}

}  // namespace

std::vector<NamedTable> run_experiment(const SweepSpec& spec,
                                       const RunConfig& config) {
  const std::string& id = spec.experiment_id;
  if (id == "fig3a_tf_v") return fig3a(spec, config);
  if (id == "fig3b_amplitude") return fig3b(spec, config);
  if (id == "fig4_epsilon") return fig4(spec, config);
  if (id == "fig5_pulses_populations") return fig5(config);
  if (id == "fig6_dark_zeta") return fig6(config);
  if (id == "fig7_adiabatic_zeno") return fig7(config);
  if (id == "fig8_decoherence") return fig8(spec, config);
  if (id == "fig9_robustness") return fig9(spec, config);
  if (id == "gate_table") return gate_table(config);
  if (id == "cluster") return cluster(config);
  throw std::invalid_argument("unknown experiment id '" + id + "'");
}

Table run_sweep(const SweepSpec& spec, const RunConfig& config) {
  for (const auto& a : spec.axes) {
    if (a.points < 2) throw DomainError("axis " + a.name + " needs at least 2 points");
  }
  return run_experiment(spec, config).front().table;
}

// --- Output -----------------------------------------------------------------

std::size_t RunSummary::total_errors() const {
  std::size_t n = 0;
  for (const auto& e : experiments) n += e.errors;
  return n;
}

std::vector<std::string> write_tables(const std::vector<NamedTable>& tables,
                                      const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::string> files;
  for (const auto& nt : tables) {
    const std::string file = nt.name + ".csv";
    std::ofstream os(out_dir / file, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + (out_dir / file).string());
    nt.table.write_csv(os);
    files.push_back(file);
  }
  return files;
}

namespace {

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string_view set_name(DissipationSet s) {
  switch (s) {
    case DissipationSet::psi: return "psi";
    case DissipationSet::phi: return "phi";
    default: return "full";
  }
}

}  // namespace

std::filesystem::path write_manifest(const RunConfig& config,
                                     const std::string& command,
                                     const std::vector<ExperimentRecord>& records,
                                     const std::filesystem::path& out_dir) {
  using nlohmann::json;
  json m;
  m["tool"] = "stapgate";
  m["version"] = STAPGATE_VERSION;
  m["command"] = command;
  m["created_utc"] = utc_now();
  m["versions"] = {
      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                    std::to_string(EIGEN_MAJOR_VERSION) + "." +
                    std::to_string(EIGEN_MINOR_VERSION)},
      {"compiler", __VERSION__},
      {"cxx_standard", __cplusplus}};
  const SystemParams& s = config.system;
  m["system"] = {{"lambda", s.lambda_coupling},
                 {"v", s.hop_v},
                 {"n_max", s.n_max},
                 {"units", s.unit_mode == UnitMode::natural ? "natural" : "physical"}};
  const ScheduleConfig& sc = config.schedule;
  m["schedule"] = {{"scheme", std::string(to_string(sc.scheme))},
                   {"epsilon", sc.epsilon},
                   {"lambda_tf", sc.lambda_tf},
                   {"omega0_prime", sc.omega0_prime}};
  if (sc.zeta) m["schedule"]["zeta"] = *sc.zeta;
  m["noise"] = {{"gamma", config.noise.gamma},
                {"kappa_c", config.noise.kappa_c},
                {"kappa_f", config.noise.kappa_f},
                {"subspace", std::string(set_name(config.noise.set))}};
  const ExperimentConfig& e = config.experiment;
  m["experiment"] = {{"run", e.run},
                     {"workers", e.workers},
                     {"seed", e.seed},
                     {"record_points", e.record_points},
                     {"max_phase_step", e.max_phase_step},
                     {"truncation", std::string(to_string(e.truncation))},
                     {"cluster_sites", e.cluster_sites}};
  json grids = json::object();
  for (const auto& [id, axes] : e.grids) {
    for (const auto& a : axes) {
      grids[id].push_back(
          {{"name", a.name}, {"min", a.min}, {"max", a.max}, {"points", a.points}});
    }
  }
  m["experiment"]["grids"] = grids;
  json results = json::array();
  for (const auto& r : records) {
    results.push_back({{"id", r.id},
                       {"files", r.files},
                       {"seconds", r.seconds},
                       {"rows", r.rows},
                       {"errors", r.errors}});
  }
  m["results"] = results;

  std::filesystem::create_directories(out_dir);
  const auto path = out_dir / "manifest.json";
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << m.dump(2) << "\n";
  return path;
}

RunSummary run_config(const RunConfig& config,
                      const std::filesystem::path& out_dir,
                      const std::string& command) {
  RunSummary summary;
  for (const auto& id : config.experiment.run) {
    const auto start = std::chrono::steady_clock::now();
    const auto tables = run_experiment({id, axes_for(config, id)}, config);
    ExperimentRecord rec;
    rec.id = id;
    rec.files = write_tables(tables, out_dir);
    for (const auto& t : tables) {
      rec.rows += t.table.size();
      rec.errors += t.table.error_count();
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                      .count();
    summary.experiments.push_back(rec);
  }
  summary.manifest = write_manifest(config, command, summary.experiments, out_dir);
  return summary;
}

}  // namespace stapgate
