#include "relaxctl/chattering.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace relaxctl;

namespace {

ActionGrid pm1() { return make_action_grid(std::vector<double>{-1.0, 1.0}); }

const TestFunction kIdentity = [](double, const ActionVec& a) { return a(0); };

}  // namespace

TEST(LargestRemainder, Examples) {
  EXPECT_EQ(largest_remainder(std::vector<double>{0.75, 0.25}, 4), (std::vector<int>{3, 1}));
  EXPECT_EQ(largest_remainder(std::vector<double>{0.5, 0.5}, 1), (std::vector<int>{1, 0}));
  EXPECT_EQ(largest_remainder(std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3}, 4), (std::vector<int>{2, 1, 1}));
  EXPECT_EQ(largest_remainder(std::vector<double>{0.1, 0.6, 0.3}, 10), (std::vector<int>{1, 6, 3}));
}

TEST(Chatter, HalfHalfAlternates) {
  const int n = 8;
  const auto u = chatter(SlidingControl::uniform(pm1(), TimeGrid(1.0, 2 * n)), n);
  for (int k = 0; k < 2 * n; ++k) EXPECT_EQ(u.index_at(k), k % 2);
}

TEST(Chatter, DiracIsFixed) {
  const auto grid = make_action_grid(std::vector<double>{-1.0, 0.0, 1.0});
  const TimeGrid t(1.0, 48);
  for (int n : {1, 2, 4, 8, 16}) {
    const auto u = chatter(SlidingControl::dirac(grid, t, 1), n);
    for (int k = 0; k < 48; ++k) EXPECT_EQ(u.index_at(k), 1);
  }
}

TEST(Chatter, ThreeQuartersOneQuarter) {
  const auto mu = SlidingControl::constant(pm1(), TimeGrid(1.0, 8), std::vector<double>{0.75, 0.25});
  const auto u = chatter(mu, 2);
  EXPECT_EQ(u.assignment(), (std::vector<int>{0, 0, 0, 1, 0, 0, 0, 1}));
}

TEST(Chatter, IncompatibleKNamesLeastCompatible) {
  try {
    chatter(SlidingControl::uniform(pm1(), TimeGrid(1.0, 10)), 4);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("least compatible K is 16"), std::string::npos) << e.what();
  }
}

TEST(Chatter, OccupationMatchesRoundedSliceWeights) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto grid = make_action_grid(std::vector<double>{-1.0, -0.5, 0.5, 1.0});
  const int K = 96, n = 4, p = 4;
  std::vector<double> w;
  for (int k = 0; k < K; ++k) {
    double a = unif(rng), b = unif(rng), c = unif(rng), d = unif(rng);
    const double s = a + b + c + d;
    w.insert(w.end(), {a / s, b / s, c / s, d / s});
  }
  const SlidingControl mu(grid, TimeGrid(1.0, K), w);
  const auto u = chatter(mu, n);
  const auto avg = slice_average(mu, n);
  const int len = K / n;
  for (int s = 0; s < n; ++s) {
    std::vector<int> counts(p, 0);
    int last = -1;
    for (int k = s * len; k < (s + 1) * len; ++k) {
      ++counts[static_cast<std::size_t>(u.index_at(k))];
      EXPECT_GE(u.index_at(k), last);  // blocks in atom order
      last = u.index_at(k);
    }
    const auto expected = largest_remainder(std::span<const double>(avg).subspan(static_cast<std::size_t>(s * p), p), len);
    EXPECT_EQ(counts, expected);
  }
}

TEST(ChatterError, DiracIsZero) {
  const TimeGrid t(1.0, 32);
  EXPECT_EQ(chatter_error(SlidingControl::dirac(pm1(), t, 0), 4, kIdentity), 0.0);
}

TEST(ChatterError, HalfHalfBound) {
  for (int n : {1, 2, 4, 8, 16}) {
    EXPECT_LE(chatter_error(SlidingControl::uniform(pm1(), TimeGrid(1.0, 4 * n)), n, kIdentity), 1.0 / n);
  }
}

TEST(ChatterError, TwoGTOverNBoundOnRandomControls) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto grid = make_action_grid(std::vector<double>{-1.0, 0.0, 1.0});
  const TestFunction g = [](double t, const ActionVec& a) { return std::cos(3 * t) * a(0); };
  for (int trial = 0; trial < 20; ++trial) {
    for (int n : {2, 4, 8}) {
      // K >= n^2 p keeps the per-slice rounding error below one slice's share.
      const int K = n * n * 3;
      std::vector<double> w;
      for (int k = 0; k < K; ++k) {
        const double a = unif(rng), b = unif(rng), c = unif(rng);
        w.insert(w.end(), {a / (a + b + c), b / (a + b + c), c / (a + b + c)});
      }
      const SlidingControl mu(grid, TimeGrid(1.0, K), w);
      EXPECT_LE(chatter_error(mu, n, g), 2.0 / n);
    }
  }
}

TEST(ChatterError, RoundingBiasAccumulatesOnCoarseGrids) {
  // Per-slice rounding of (1/3, 2/3) over two sub-steps always favours the
  // first atom, so the imbalance grows across slices and exceeds 2 G T / n.
  const auto mu = SlidingControl::constant(pm1(), TimeGrid(1.0, 16), std::vector<double>{1.0 / 3, 2.0 / 3});
  EXPECT_NEAR(chatter_error(mu, 8, kIdentity), 0.375, 1e-12);
  EXPECT_GT(chatter_error(mu, 8, kIdentity), 2.0 / 8);
}

TEST(ChatterError, FirstOrderSlope) {
  const auto mu = SlidingControl::constant(pm1(), TimeGrid(1.0, 64 * 64 * 2), std::vector<double>{0.3, 0.7});
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const std::vector<int> ns = {2, 4, 8, 16, 32, 64};
  for (int n : ns) {
    const double x = std::log(n), y = std::log(chatter_error(mu, n, kIdentity));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = static_cast<double>(ns.size());
  EXPECT_LE((m * sxy - sx * sy) / (m * sxx - sx * sx), -0.8);
}

TEST(ConvergenceStudy, RademacherCoupledSupDifference) {
  const auto m = lookup_model("rademacher_ode");
  const auto mu = SlidingControl::uniform(pm1(), TimeGrid(1.0, 64));
  const auto study = convergence_study(m, mu, {2, 4, 8, 16}, 1, 0);
  ASSERT_TRUE(study.coupled);
  double prev = 1e9;
  for (const auto& row : study.rows) {
    ASSERT_TRUE(row.coupled_sup_diff.has_value());
    EXPECT_LE(*row.coupled_sup_diff, 1.0 / (row.n * row.n));
    EXPECT_LT(*row.coupled_sup_diff, prev);
    prev = *row.coupled_sup_diff;
  }
}

TEST(ConvergenceStudy, DiracHasNoDifference) {
  const auto m = lookup_model("lipschitz_mf_test");
  const auto mu = SlidingControl::dirac(pm1(), TimeGrid(1.0, 32), 1);
  const auto study = convergence_study(m, mu, {2, 4}, 100, 3);
  for (const auto& row : study.rows) {
    EXPECT_EQ(row.cost_difference.mean, 0.0);
    EXPECT_EQ(*row.coupled_sup_diff, 0.0);
  }
}

TEST(ConvergenceStudy, LipschitzModelDecreases) {
  const auto m = lookup_model("lipschitz_mf_test");
  const auto mu = SlidingControl::uniform(pm1(), TimeGrid(1.0, 64));
  const auto study = convergence_study(m, mu, {2, 4, 8, 16, 32}, 4000, 9);
  for (std::size_t i = 1; i < study.rows.size(); ++i) {
    EXPECT_LT(std::abs(study.rows[i].cost_difference.mean), std::abs(study.rows[i - 1].cost_difference.mean));
  }
  const auto& last = study.rows.back();
  EXPECT_LT(std::abs(last.cost_difference.mean), std::abs(study.rows.front().cost_difference.mean) / 8);
}

TEST(ConvergenceStudy, ControlledDiffusionIsDistributional) {
  const auto m = lookup_model("diffusion_counterexample");
  const auto mu = SlidingControl::uniform(pm1(), TimeGrid(1.0, 64));
  const auto study = convergence_study(m, mu, {16}, 20000, 4);
  EXPECT_FALSE(study.coupled);
  const auto& row = study.rows.front();
  EXPECT_FALSE(row.coupled_sup_diff.has_value());
  const double se = std::sqrt(2.0 / 20000);
  EXPECT_LT(std::abs(row.strict_terminal_var - row.relaxed_terminal_var), 3.0 * std::sqrt(2.0) * se);
}
