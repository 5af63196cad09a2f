#include "relaxctl/coefficients.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace relaxctl;

namespace {

StateVec sv(double v) {
  StateVec s(1);
  s(0) = v;
  return s;
}
ActionVec av(double v) {
  ActionVec a(1);
  a(0) = v;
  return a;
}
MeanFields zeros() { return {sv(0), sv(0), sv(0)}; }

}  // namespace

TEST(Presets, AllNamesResolve) {
  for (const auto& name : preset_names()) {
    const auto m = lookup_model(name);
    EXPECT_EQ(m.name, name);
    EXPECT_EQ(m.state_dim, 1);
    EXPECT_TRUE(m.drift && m.diffusion && m.psi && m.phi && m.varphi && m.lambda && m.running_cost &&
                m.terminal_cost);
  }
  EXPECT_EQ(preset_names().size(), 6u);
}

TEST(Presets, UnknownNameListsPresets) {
  try {
    lookup_model("nope");
    FAIL();
  } catch (const LookupError& e) {
    EXPECT_NE(std::string(e.what()).find("lipschitz_mf_test"), std::string::npos);
  }
}

TEST(Presets, CounterexampleAndOde) {
  const auto ce = lookup_model("diffusion_counterexample");
  EXPECT_EQ(ce.diffusion(0.3, sv(0.7), sv(0), av(-0.5))(0, 0), -0.5);
  EXPECT_EQ(ce.drift(0.3, sv(0.7), sv(0), av(-0.5))(0), 0.0);
  const auto ode = lookup_model("rademacher_ode");
  EXPECT_EQ(ode.drift(0.0, sv(2.0), sv(0), av(0.25))(0), 0.25);
  EXPECT_EQ(ode.diffusion(0.0, sv(2.0), sv(0), av(0.25))(0, 0), 0.0);
}

TEST(Presets, DegenerateMarketHasNoDrift) {
  MeanVarianceParams p;
  p.rate = [](double) { return 0.0; };
  p.appreciation = [](double) { return 0.0; };
  const auto mv = make_mean_variance(p);
  for (double a : {0.0, 0.7, 1.5}) EXPECT_EQ(mv.drift(0.5, sv(1.3), sv(0), av(a))(0), 0.0);
}

TEST(Presets, FlemingCosts) {
  const auto lit = lookup_model("fleming_drift");
  const auto sq = lookup_model("fleming_drift_squared");
  EXPECT_DOUBLE_EQ(lit.running_cost(0, sv(0), sv(0.5), av(-1.0)), 0.25 + 4.0);
  EXPECT_DOUBLE_EQ(sq.running_cost(0, sv(0), sv(0.5), av(-1.0)), 0.25);
}

TEST(MomentMap, Examples) {
  const auto ce = lookup_model("diffusion_counterexample");
  const auto plus = moment_map(ce, 0.0, sv(0), zeros(), av(1.0));
  const auto minus = moment_map(ce, 0.0, sv(0), zeros(), av(-1.0));
  ASSERT_EQ(plus.size(), 3);
  EXPECT_EQ(plus, (Eigen::Vector3d(0, 1, 0)));
  EXPECT_EQ(minus, plus);
  const auto ode = moment_map(lookup_model("rademacher_ode"), 0.0, sv(2.0), zeros(), av(0.0));
  EXPECT_EQ(ode, (Eigen::Vector3d(0, 0, 4)));
  EXPECT_EQ(moment_dim(1), 3);
  EXPECT_EQ(moment_dim(2), 7);
}

TEST(MomentMap, SymmetryProperties) {
  const auto ce = lookup_model("diffusion_counterexample");
  const auto ode = lookup_model("rademacher_ode");
  for (double a : {-1.0, -0.3, 0.2, 0.9}) {
    for (double x : {-0.5, 0.0, 0.8}) {
      EXPECT_EQ(moment_map(ce, 0.1, sv(x), zeros(), av(a)), moment_map(ce, 0.1, sv(x), zeros(), av(-a)));
      EXPECT_EQ(moment_map(ode, 0.1, sv(x), zeros(), av(a))(0), -moment_map(ode, 0.1, sv(x), zeros(), av(-a))(0));
    }
  }
}

TEST(MomentMap, CovarianceBlockIsPsdForAllPresets) {
  for (const auto& name : preset_names()) {
    const auto m = lookup_model(name);
    for (double x : {-0.9, 0.1, 0.8}) {
      for (double a : {m.action_lo(0), 0.5 * (m.action_lo(0) + m.action_hi(0)), m.action_hi(0)}) {
        const MeanFields mf{sv(x), sv(-x), sv(0.5 * x)};
        EXPECT_GE(moment_map(m, 0.5, sv(x), mf, av(a))(1), 0.0) << name;
      }
    }
  }
}

TEST(MomentMap, TwoDimensionalBlockSymmetric) {
  ModelSpec m = lookup_model("lipschitz_mf_test");
  m.state_dim = 2;
  m.x0 = StateVec::Zero(2);
  m.drift = [](double, const StateVec& x, const StateVec&, const ActionVec& a) -> StateVec {
    StateVec out(2);
    out << a(0), -x(0);
    return out;
  };
  m.diffusion = [](double, const StateVec& x, const StateVec&, const ActionVec& a) -> DiffusionMat {
    DiffusionMat s(2, 2);
    s << 1.0, a(0), 0.0, std::cos(x(1));
    return s;
  };
  m.running_cost = [](double, const StateVec& x, const StateVec&, const ActionVec&) { return x.squaredNorm(); };
  MeanFields mf{StateVec::Zero(2), StateVec::Zero(2), StateVec::Zero(2)};
  StateVec x(2);
  x << 0.3, 0.4;
  const auto v = moment_map(m, 0.0, x, mf, av(0.5));
  ASSERT_EQ(v.size(), 7);
  EXPECT_DOUBLE_EQ(v(3), v(4));  // off-diagonal entries of sigma sigma^T
  EXPECT_DOUBLE_EQ(v(6), 0.25);
}

TEST(Validate, PresetsPassAndAreDeterministic) {
  for (const auto& name : preset_names()) {
    const auto r1 = validate_model(lookup_model(name), 2000, 11);
    const auto r2 = validate_model(lookup_model(name), 2000, 11);
    EXPECT_TRUE(r1.pass) << name;
    ASSERT_EQ(r1.checks.size(), r2.checks.size());
    for (std::size_t i = 0; i < r1.checks.size(); ++i) {
      EXPECT_EQ(r1.checks[i].worst_bound_ratio, r2.checks[i].worst_bound_ratio);
      EXPECT_EQ(r1.checks[i].worst_lipschitz_ratio, r2.checks[i].worst_lipschitz_ratio);
    }
  }
}

TEST(Validate, RademacherDriftHasZeroLipschitzInX) {
  const auto r = validate_model(lookup_model("rademacher_ode"), 1000, 3);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.check("b").worst_lipschitz_ratio, 0.0);
}

TEST(Validate, LipschitzTestModelWithinDeclaredConstant) {
  const auto m = lookup_model("lipschitz_mf_test");
  EXPECT_EQ(m.lipschitz, 2.0);
  const auto r = validate_model(m, 20000, 5);
  EXPECT_TRUE(r.pass);
  for (const auto& c : r.checks) EXPECT_LE(c.worst_lipschitz_ratio, 1.0) << c.function;
}

TEST(Validate, UnboundedModelFailsWithWitness) {
  ModelSpec m = lookup_model("rademacher_ode");
  m.state_box = {sv(-3.0), sv(3.0)};
  m.bound = 1.0;
  m.psi = [](const StateVec& x) { return StateVec(x.array().square()); };
  const auto r = validate_model(m, 500, 1);
  EXPECT_FALSE(r.pass);
  EXPECT_FALSE(r.check("psi").pass);
  EXPECT_FALSE(r.check("psi").witness.empty());
}
