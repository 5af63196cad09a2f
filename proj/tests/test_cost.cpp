#include "relaxctl/cost_eval.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace relaxctl;

namespace {

ActionGrid pm1() { return make_action_grid(std::vector<double>{-1.0, 1.0}); }

}  // namespace

TEST(Summarize, SampleStatistics) {
  const auto s = summarize({1.0, 2.0, 4.0, 7.0});
  EXPECT_DOUBLE_EQ(s.mean, 3.5);
  // sample variance 7 with n - 1 = 3 dof: (6.25 + 2.25 + 0.25 + 12.25) / 3 = 7
  EXPECT_DOUBLE_EQ(s.std_error, std::sqrt(7.0 / 4.0));
  EXPECT_EQ(s.samples, 4);
  EXPECT_EQ(summarize({5.0}).std_error, 0.0);
}

TEST(Cost, RademacherBound) {
  const auto m = lookup_model("rademacher_ode");
  for (int n : {1, 2, 4, 8, 16}) {
    const TimeGrid t(1.0, 64 * n);
    const auto u = embed_strict(rademacher_control(pm1(), n, t));
    const auto ens = simulate(m, u, Regime::strict, 1, 0);
    const auto c = estimate_cost(m, ens, u);
    EXPECT_LE(c.mean, 1.0 / (n * n));
    EXPECT_EQ(c.std_error, 0.0);
  }
}

TEST(Cost, HalfHalfIsZero) {
  const auto m = lookup_model("rademacher_ode");
  const auto c = simulate_cost(m, SlidingControl::uniform(pm1(), TimeGrid(1.0, 100)), Regime::relaxed, 1, 0);
  EXPECT_EQ(c.mean, 0.0);
}

TEST(Cost, ConstantTerminalCost) {
  ModelSpec m = lookup_model("lipschitz_mf_test");
  m.running_cost = [](double, const StateVec&, const StateVec&, const ActionVec&) { return 0.0; };
  m.terminal_cost = [](const StateVec&, const StateVec&) { return 1.0; };
  const auto c = simulate_cost(m, SlidingControl::uniform(pm1(), TimeGrid(1.0, 8)), Regime::relaxed, 50, 4);
  EXPECT_EQ(c.mean, 1.0);
  EXPECT_EQ(c.std_error, 0.0);
}

TEST(Cost, AffineInRunningCost) {
  ModelSpec m = lookup_model("lipschitz_mf_test");
  ModelSpec m3 = m;
  m3.running_cost = [h = m.running_cost](double t, const StateVec& x, const StateVec& y, const ActionVec& a) {
    return 3.0 * h(t, x, y, a);
  };
  ModelSpec m_run = m;
  m_run.terminal_cost = [](const StateVec&, const StateVec&) { return 0.0; };
  ModelSpec m_term = m;
  m_term.running_cost = [](double, const StateVec&, const StateVec&, const ActionVec&) { return 0.0; };
  const auto mu = SlidingControl::uniform(pm1(), TimeGrid(1.0, 16));
  const double run = simulate_cost(m_run, mu, Regime::relaxed, 100, 2).mean;
  const double term = simulate_cost(m_term, mu, Regime::relaxed, 100, 2).mean;
  EXPECT_NEAR(simulate_cost(m, mu, Regime::relaxed, 100, 2).mean, run + term, 1e-12);
  EXPECT_NEAR(simulate_cost(m3, mu, Regime::relaxed, 100, 2).mean, 3.0 * run + term, 1e-12);
}

TEST(Cost, MeanFieldArgumentsUseEnsembleMean) {
  // h = y_varphi^2 with varphi = identity: the per-particle cost is the same for every particle.
  ModelSpec m = lookup_model("fleming_drift_squared");
  m.running_cost = [](double, const StateVec&, const StateVec& y, const ActionVec&) { return y(0) * y(0); };
  const auto mu = SlidingControl::uniform(pm1(), TimeGrid(1.0, 16));
  const auto c = simulate_cost(m, mu, Regime::relaxed, 30, 8);
  for (double v : c.per_particle) EXPECT_EQ(v, c.per_particle.front());
}

TEST(Cost, FingerprintMismatchIsRejected) {
  const auto m = lookup_model("rademacher_ode");
  const TimeGrid t(1.0, 8);
  const auto ens = simulate(m, SlidingControl::uniform(pm1(), t), Regime::relaxed, 1, 0);
  EXPECT_THROW(estimate_cost(m, ens, SlidingControl::dirac(pm1(), t, 0)), ValidationError);
}

TEST(PairedDifference, IdenticalControls) {
  const auto m = lookup_model("lipschitz_mf_test");
  const auto mu = SlidingControl::uniform(pm1(), TimeGrid(1.0, 16));
  const auto d = paired_cost_difference(m, mu, mu, 200, 5);
  EXPECT_EQ(d.mean, 0.0);
  EXPECT_EQ(d.std_error, 0.0);
}

TEST(PairedDifference, EqualSecondMomentCosts) {
  ModelSpec m = lookup_model("diffusion_counterexample");
  m.running_cost = [](double, const StateVec&, const StateVec&, const ActionVec& a) { return a(0) * a(0); };
  const TimeGrid t(1.0, 16);
  const auto d = paired_cost_difference(m, SlidingControl::uniform(pm1(), t), SlidingControl::dirac(pm1(), t, 1), 500, 3);
  EXPECT_NEAR(d.mean, 0.0, 1e-14);
  EXPECT_NEAR(d.std_error, 0.0, 1e-14);
}

TEST(PairedDifference, RademacherVersusHalf) {
  const auto m = lookup_model("rademacher_ode");
  const TimeGrid t(1.0, 64);
  const auto d = paired_cost_difference(m, SlidingControl::uniform(pm1(), t),
                                        embed_strict(rademacher_control(pm1(), 4, t)), 1, 0);
  EXPECT_LE(d.mean, 0.0);
  EXPECT_LE(std::abs(d.mean), 1.0 / 16);
}

TEST(PairedDifference, GridMismatch) {
  const auto m = lookup_model("rademacher_ode");
  EXPECT_THROW(paired_cost_difference(m, SlidingControl::uniform(pm1(), TimeGrid(1.0, 8)),
                                      SlidingControl::uniform(pm1(), TimeGrid(1.0, 16)), 1, 0),
               ValidationError);
  EXPECT_THROW(paired_cost_difference(m, SlidingControl::uniform(pm1(), TimeGrid(1.0, 8)),
                                      SlidingControl::uniform(make_action_grid(std::vector<double>{-1, 0, 1}), TimeGrid(1.0, 8)), 1, 0),
               ValidationError);
}

TEST(Cost, ThreadInvariance) {
  const auto m = lookup_model("lipschitz_mf_test");
  const auto mu = SlidingControl::uniform(pm1(), TimeGrid(1.0, 16));
  const auto a = simulate_cost(m, mu, Regime::relaxed, 999, 1, 1);
  const auto b = simulate_cost(m, mu, Regime::relaxed, 999, 1, 8);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.std_error, b.std_error);
}
