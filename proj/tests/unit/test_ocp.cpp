#include <cmath>

#include <gtest/gtest.h>

#include "csmpc/ocp.hpp"
#include "csmpc_props/props.hpp"

using namespace csmpc;

namespace {

ControlSequence constant(std::size_t n, ControlInput u) { return ControlSequence(std::vector<ControlInput>(n, u)); }

}  // namespace

TEST(ControlSequence, FlatRoundTrip) {
  std::vector<double> flat = {1, 0.1, 2, 0.2, 3, 0.3};
  const auto u = ControlSequence::from_flat(flat);
  ASSERT_EQ(u.size(), 3u);
  EXPECT_EQ(u[1].immune, 2);
  EXPECT_EQ(u[2].chemo, 0.3);
  EXPECT_EQ(u.flat(), flat);
  EXPECT_THROW(ControlSequence::from_flat(std::vector<double>{1, 2, 3}), std::invalid_argument);
}

TEST(ControlSequence, ShiftPadsWithLast) {
  std::vector<ControlInput> steps;
  for (int i = 0; i < 10; ++i) steps.push_back({double(i) * 0.5, i * 0.1});
  const auto s = ControlSequence(steps).shifted(5);
  ASSERT_EQ(s.size(), 10u);
  EXPECT_EQ(s[0], steps[5]);
  EXPECT_EQ(s[4], steps[9]);
  for (std::size_t i = 5; i < 10; ++i) EXPECT_EQ(s[i], steps[9]);
}

TEST(ControlSequence, Admissible) {
  EXPECT_TRUE(constant(3, {5, 1}).admissible());
  EXPECT_FALSE(constant(3, {5.1, 1}).admissible());
  EXPECT_FALSE(constant(3, {0, -0.1}).admissible());
}

TEST(Ocp, ZeroTumorZeroInput) {
  OcpConfig cfg;
  const auto ev = evaluate(StateVec{{0, 0.15, 0, 0}}, ControlSequence(10), nominal_parameters(), cfg);
  EXPECT_EQ(ev.J, 0.0);
  EXPECT_LT(ev.g, 0.0);
  EXPECT_EQ(ev.trajectory.size(), 11u);
}

TEST(Ocp, MatchesReferenceRollout) {
  OcpConfig cfg;
  const StateVec x0{{1.0, 0.15, 0.0, 1.0}};
  const auto ev = evaluate(x0, ControlSequence(10), nominal_parameters(), cfg);
  const auto ref = props::reference_evaluate(x0, ControlSequence(10), nominal_parameters(), cfg);
  EXPECT_NEAR(ev.J, ref.J, 1e-6 * std::abs(ref.J));
  EXPECT_NEAR(ev.g, ref.g, 1e-6 * std::abs(ref.g));
}

TEST(Ocp, EffortWeightIsLinear) {
  OcpConfig cfg;
  const StateVec x0{{0.5, 0.2, 0.3, 0.6}};
  const auto u = constant(10, {1.5, 0.4});
  const double base = evaluate(x0, u, nominal_parameters(), cfg).J;
  cfg.rho_u += 2.5;
  const double more = evaluate(x0, u, nominal_parameters(), cfg).J;
  EXPECT_NEAR(more - base, 2.5 * 10 * (1.5 + 0.4), 1e-9);
}

TEST(Ocp, CostDefinition) {
  OcpConfig cfg;
  const StateVec x0{{0.5, 0.2, 0.3, 0.6}};
  const auto u = constant(10, {1.0, 0.2});
  const auto ev = evaluate(x0, u, nominal_parameters(), cfg);
  double J = cfg.rho_f * ev.trajectory.back()[0];
  double min_x2 = 1e300;
  for (std::size_t i = 1; i <= 10; ++i) {
    J += ev.trajectory[i][0] + cfg.rho_u * 1.2;
    min_x2 = std::min(min_x2, ev.trajectory[i][1]);
  }
  EXPECT_NEAR(ev.J, J, 1e-12 * J);
  EXPECT_DOUBLE_EQ(ev.g, cfg.x2_min - min_x2);
}

TEST(Ocp, CanonicalFormEquivalence) {
  OcpConfig cfg;
  for (double x2 : {0.02, 0.05, 0.3}) {
    const auto ev = evaluate(StateVec{{0.4, x2, 0.0, 0.5}}, ControlSequence(10), nominal_parameters(), cfg);
    double min_x2 = 1e300;
    for (std::size_t i = 1; i < ev.trajectory.size(); ++i) min_x2 = std::min(min_x2, ev.trajectory[i][1]);
    EXPECT_EQ(ev.g <= 0.0, min_x2 >= cfg.x2_min);
  }
}

TEST(Ocp, HorizonPrefixIsCausal) {
  OcpConfig shortc, longc;
  shortc.horizon = 6;
  longc.horizon = 10;
  std::vector<ControlInput> steps;
  for (int i = 0; i < 10; ++i) steps.push_back({0.5 * i, 0.1 * i});
  const StateVec x0{{1.0, 0.15, 0.0, 1.0}};
  const auto a = evaluate(x0, ControlSequence({steps.begin(), steps.begin() + 6}), nominal_parameters(), shortc);
  const auto b = evaluate(x0, ControlSequence(steps), nominal_parameters(), longc);
  for (std::size_t i = 0; i <= 6; ++i) EXPECT_EQ(a.trajectory[i], b.trajectory[i]);
}

TEST(Ocp, SoftMinBounds) {
  OcpConfig cfg;
  const auto ev = evaluate(StateVec{{1.0, 0.15, 0.5, 1.0}}, constant(10, {0, 1}), nominal_parameters(), cfg);
  const double s = smooth_constraint(ev.trajectory, cfg);
  EXPECT_GE(s, ev.g);
  EXPECT_LE(s, ev.g + cfg.softmin_width * std::log(10.0) + 1e-15);
}

TEST(OcpGradient, ZeroTumorEffortOnly) {
  OcpConfig cfg;
  const auto og = gradient(StateVec{{0, 0.15, 0, 0}}, ControlSequence(10), nominal_parameters(), cfg);
  for (double d : og.dJ) {
    EXPECT_LE(std::abs(d), cfg.rho_u + 1e-12);
  }
}

TEST(OcpGradient, ValuesAgreeWithEvaluate) {
  OcpConfig cfg;
  const StateVec x0{{0.8, 0.12, 0.4, 0.7}};
  const auto u = constant(10, {2.0, 0.6});
  const auto ev = evaluate(x0, u, nominal_parameters(), cfg);
  const auto og = gradient(x0, u, nominal_parameters(), cfg);
  EXPECT_DOUBLE_EQ(og.J, ev.J);
  EXPECT_DOUBLE_EQ(og.g, ev.g);
  EXPECT_DOUBLE_EQ(og.g_smooth, smooth_constraint(ev.trajectory, cfg));
}

TEST(OcpGradient, CentralDifferences) { EXPECT_LT(props::gradient_fd_error(20, 2024), 1e-3); }

TEST(OcpGradient, Causality) {
  // The input at step i cannot influence states up to step i.
  OcpConfig cfg;
  const StateVec x0{{0.8, 0.12, 0.4, 0.7}};
  auto u = constant(10, {2.0, 0.6});
  const auto base = evaluate(x0, u, nominal_parameters(), cfg);
  u[4].chemo = 0.9;
  u[4].immune = 4.0;
  const auto moved = evaluate(x0, u, nominal_parameters(), cfg);
  for (std::size_t i = 0; i <= 4; ++i) EXPECT_EQ(base.trajectory[i], moved.trajectory[i]);
  EXPECT_NE(base.trajectory[5], moved.trajectory[5]);
}

TEST(OcpConfig, Validation) {
  OcpConfig cfg;
  cfg.horizon = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.x2_min = 1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.tau = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}
