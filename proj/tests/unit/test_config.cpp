#include <gtest/gtest.h>

#include <string>

#include "stapgate/config.hpp"

using namespace stapgate;

namespace {

ConfigError parse_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e;
  }
  ADD_FAILURE() << "no ConfigError for:\n" << text;
  return ConfigError("none", "", 0);
}

}  // namespace

TEST(Config, EmptyDocumentGivesDefaults) {
  const RunConfig c = parse_config("");
  EXPECT_DOUBLE_EQ(c.system.lambda_coupling, 1.0);
  EXPECT_DOUBLE_EQ(c.schedule.epsilon, 0.258);
  EXPECT_TRUE(c.experiment.run.empty());
  EXPECT_EQ(c.experiment.truncation, Truncation::single_excitation);
}

TEST(Config, ParsesAllSections) {
  const RunConfig c = parse_config(R"(
system: {lambda: 2500, v: 5000, n_max: 1, units: physical}
schedule: {scheme: zeno, omega0_prime: 0.1}
noise: {gamma: 10, kappa_c: 10, kappa_f: 0.152, subspace: phi}
experiment:
  run: [gate_table, cluster]
  workers: 3
  seed: 42
  truncation: full
  cluster_sites: 4
)");
  EXPECT_EQ(c.system.unit_mode, UnitMode::physical);
  EXPECT_DOUBLE_EQ(c.system.hop_v, 5000.0);
  EXPECT_EQ(c.schedule.scheme, Scheme::zeno);
  EXPECT_DOUBLE_EQ(c.noise.kappa_f, 0.152);
  EXPECT_EQ(c.noise.set, DissipationSet::phi);
  EXPECT_EQ(c.experiment.run.size(), 2u);
  EXPECT_EQ(c.experiment.workers, 3);
  EXPECT_EQ(c.experiment.seed, 42u);
  EXPECT_EQ(c.experiment.truncation, Truncation::full);
  EXPECT_DOUBLE_EQ(schedule_duration(c), 50.0 / 2500.0);
  EXPECT_DOUBLE_EQ(noisy_params(c).gamma, 10.0);
  EXPECT_DOUBLE_EQ(nominal_params(c).gamma, 0.0);
}

TEST(Config, MisspelledKeyNamesKeyAndLine) {
  const ConfigError e = parse_error("system:\n  lamda: 1.0\n");
  EXPECT_EQ(e.key(), "system.lamda");
  EXPECT_EQ(e.line(), 2);
  EXPECT_NE(std::string(e.what()).find("lamda"), std::string::npos);
}

TEST(Config, RejectsBadValues) {
  EXPECT_EQ(parse_error("noise: {gamma: -1}").key(), "noise.gamma");
  EXPECT_EQ(parse_error("system: {v: abc}").key(), "system.v");
  EXPECT_EQ(parse_error("system: {units: furlongs}").key(), "system.units");
  EXPECT_EQ(parse_error("experiment: {run: [fig99]}").key(), "experiment.run");
  EXPECT_EQ(parse_error("experiment: {workers: 0}").key(), "experiment.workers");
  EXPECT_EQ(parse_error("bogus: 1").key(), "bogus");
  // Natural units require λ = 1.
  EXPECT_EQ(parse_error("system: {lambda: 2}").key(), "system");
  EXPECT_GT(parse_error("system: [1, 2\n").line(), 0);
}

TEST(Config, GridOverrides) {
  const RunConfig c = parse_config(R"(
experiment:
  grids:
    fig4_epsilon:
      - {name: epsilon, min: 0.2, max: 0.3, points: 5}
)");
  const auto axes = axes_for(c, "fig4_epsilon");
  ASSERT_EQ(axes.size(), 1u);
  EXPECT_EQ(axes[0].points, 5);
  const auto v = axes[0].values();
  EXPECT_DOUBLE_EQ(v.front(), 0.2);
  EXPECT_DOUBLE_EQ(v.back(), 0.3);
  EXPECT_EQ(axes_for(c, "fig3a_tf_v").size(), 2u);
  EXPECT_EQ(axes_for(c, "fig3a_tf_v")[0].points, 21);
}

TEST(Config, GridValidation) {
  EXPECT_EQ(parse_error(R"(
experiment:
  grids:
    fig4_epsilon:
      - {name: epsilon, min: 0.2, max: 0.3, points: 1}
)").key(),
            "experiment.grids.fig4_epsilon.points");
  EXPECT_EQ(parse_error(R"(
experiment:
  grids:
    fig4_epsilon:
      - {name: v, min: 0.2, max: 0.3, points: 3}
)").key(),
            "experiment.grids.fig4_epsilon.name");
  EXPECT_NO_THROW(parse_config(R"(
experiment:
  grids:
    fig9_robustness:
      - {name: delta_T, min: -0.5, max: 0.5, points: 3}
)"));
  EXPECT_THROW(parse_config(R"(
experiment:
  grids:
    fig9_robustness:
      - {name: delta_T, min: -0.6, max: 0.5, points: 3}
)"),
               ConfigError);
}

TEST(Config, BuildScheduleFollowsScheme) {
  RunConfig c;
  EXPECT_EQ(build_schedule(c).scheme, Scheme::stap);
  c.schedule.zeta = 2;
  EXPECT_EQ(build_schedule(c).zeta, 2);
  c.schedule.scheme = Scheme::adiabatic;
  c.schedule.lambda_tf = 100;
  EXPECT_DOUBLE_EQ(build_schedule(c).t_f, 100.0);
  EXPECT_DOUBLE_EQ(build_schedule(c).amplitude, 0.2);
}

TEST(Config, ShippedConfigsLoad) {
  const std::string dir = STAPGATE_CONFIG_DIR;
  const RunConfig d = load_config(dir + "/default.yaml");
  EXPECT_EQ(d.experiment.run.size(), experiment_ids().size());
  const RunConfig c = load_config(dir + "/cesium.yaml");
  EXPECT_EQ(c.system.unit_mode, UnitMode::physical);
  EXPECT_NO_THROW(load_config(dir + "/quick.yaml"));
  EXPECT_THROW(load_config(dir + "/missing.yaml"), ConfigError);
}
