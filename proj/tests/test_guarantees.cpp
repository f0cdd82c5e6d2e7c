#include "stagewise/guarantees.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace stagewise;

namespace {

struct Fixture {
  StandardizedProblem problem;
  SpectralSummary summary;
  LeastSquaresSolution ls;
};

Fixture setup(StandardizedProblem p) {
  SpectralSummary s = analyze(p);
  LeastSquaresSolution ls = solve_least_squares(p);
  return {std::move(p), s, std::move(ls)};
}

AlgorithmConfig make(Variant v, double eps, std::size_t iters, double delta = kUnboundedDelta) {
  AlgorithmConfig c;
  c.variant = v;
  c.epsilon = eps;
  c.max_iters = iters;
  c.delta = delta;
  return c;
}

}  // namespace

TEST(LsBoostBounds, T1InitialGap) {
  const Fixture s = setup(fixtures::t1());
  const GuaranteeConstants c = make_constants(s.problem, s.summary, s.ls, 1.0);
  EXPECT_DOUBLE_EQ(c.gamma(), 0.875);
  const LsBoostBounds b = lsboost_bounds(c, 0);
  EXPECT_NEAR(b.train_gap, 2.5, 1e-14);
  EXPECT_NEAR(b.train_gap, null_loss(s.problem) - s.ls.loss_star, 1e-14);
}

TEST(LsBoostBounds, GeometricRatio) {
  const Fixture s = setup(fixtures::random_problem(50, 20, 0.5, 1));
  const GuaranteeConstants c = make_constants(s.problem, s.summary, s.ls, 0.3);
  for (std::size_t k = 0; k < 50; ++k) {
    EXPECT_NEAR(lsboost_bounds(c, k + 1).train_gap / lsboost_bounds(c, k).train_gap, c.gamma(), 1e-12);
  }
}

TEST(LsBoostBounds, DominateObservedRun) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Fixture s = setup(fixtures::random_problem(40, seed % 2 ? 80 : 20, 0.5, 70 + seed));
    const SpectralDecomposition f = decompose(s.problem);
    for (double eps : {0.1, 1.0}) {
      const GuaranteeConstants c = make_constants(s.problem, s.summary, s.ls, eps);
      const BoostTrace t = run(s.problem, make(Variant::LSBoost, eps, 200));
      const double n = static_cast<double>(s.problem.n());
      for (const auto& rec : t.records) {
        const double pred = (s.problem.X() * rec.beta - s.ls.fitted).norm();
        const LsBoostBounds b = lsboost_bounds(c, rec.k, pred);
        const double tol = 1e-9;
        EXPECT_LE(rec.train_error - s.ls.loss_star, b.train_gap * (1 + tol) + 1e-12);
        EXPECT_LE(distance_to_ls_set(s.problem, f, s.ls, rec.beta), b.coeff_dist * (1 + tol) + 1e-12);
        EXPECT_LE(pred, b.prediction_dist * (1 + tol) + 1e-12);
        EXPECT_LE(rec.inf_corr / n, b.gradient * (1 + tol) + 1e-12);
        EXPECT_LE(rec.l1_norm, b.l1_shrink * (1 + tol) + 1e-12);
        EXPECT_LE(rec.l1_norm, b.l1_shrink_alt * (1 + tol) + 1e-12);
        EXPECT_LE(rec.l0_norm, b.sparsity);
      }
    }
  }
}

TEST(ExtraBounds, T1TightL2Bound) {
  const Fixture s = setup(fixtures::t1());
  const GuaranteeConstants c = make_constants(s.problem, s.summary, s.ls, 1.0);
  const BoostTrace t = run(s.problem, make(Variant::LSBoost, 1.0, 3));
  const LsBoostExtraBounds b = lsboost_extra_bounds(c, s.ls, t, 1);
  EXPECT_EQ(b.j_max, 1u);
  EXPECT_NEAR(b.l2_shrink, 3.0, 1e-14);
  EXPECT_GE(b.l2_shrink + 1e-12, t.records[1].beta.norm());
  const LsBoostExtraBounds b0 = lsboost_extra_bounds(c, s.ls, t, 0);
  EXPECT_GE(b0.l2_shrink, 0.0);
  EXPECT_GE(b0.gradient + 1e-12, t.records[0].inf_corr / 2.0);
}

TEST(FseBounds, T1CorrelationBound) {
  const Fixture s = setup(fixtures::t1());
  const GuaranteeConstants c = make_constants(s.problem, s.summary, s.ls, 0.5);
  EXPECT_NEAR(fse_bounds(c, 9).correlation, 1.25, 1e-14);
  const BoostTrace t = run(s.problem, make(Variant::FSe, 0.5, 9));
  double best = 1e300;
  for (const auto& rec : t.records) best = std::min(best, rec.inf_corr);
  EXPECT_LE(best, 1.25);
  EXPECT_DOUBLE_EQ(fse_bounds(c, 9).l1_shrink, 4.5);
}

TEST(FseBounds, Homogeneity) {
  const Fixture s = setup(fixtures::random_problem(30, 20, 0.2, 3));
  GuaranteeConstants a = make_constants(s.problem, s.summary, s.ls, 0.2);
  GuaranteeConstants b = a;
  b.epsilon = 0.1;
  // k+1: 100 -> 400 when eps halves.
  EXPECT_NEAR(fse_bounds(a, 99).correlation / a.epsilon, fse_bounds(b, 399).correlation / b.epsilon, 1e-12);
}

TEST(FseBounds, LimitAndTradeoff) {
  const Fixture s = setup(fixtures::random_problem(30, 20, 0.2, 3));
  const GuaranteeConstants c = make_constants(s.problem, s.summary, s.ls, 0.05);
  const double n = 30, p = 20;
  EXPECT_NEAR(fse_limit_loss(c), s.ls.loss_star + p * 0.05 * 0.05 / (2 * n * c.lambda_pmin), 1e-15);
  const std::size_t k = 50;
  EXPECT_NEAR(fse_tradeoff(c, k * c.epsilon), fse_bounds(c, k).train_gap, 1e-10 * fse_bounds(c, k).train_gap);
  EXPECT_NEAR(fse_best_epsilon(c, 99), c.fitted_norm / 10.0, 1e-15);
}

TEST(RfsBounds, T1ShrinkageExact) {
  const Fixture s = setup(fixtures::t1());
  const GuaranteeConstants c = make_constants(s.problem, s.summary, s.ls, 0.5, 2.0);
  const BoostTrace t = run(s.problem, make(Variant::RFS, 0.5, 2, 2.0));
  EXPECT_DOUBLE_EQ(rfs_bounds(c, 2).l1_shrink, 0.875);
  EXPECT_DOUBLE_EQ(t.records[2].l1_norm, rfs_bounds(c, 2).l1_shrink);
  GuaranteeConstants inf = c;
  inf.delta = kUnboundedDelta;
  EXPECT_ANY_THROW(rfs_bounds(inf, 2));
}

TEST(RfsBounds, LimitTerm) {
  const Fixture s = setup(fixtures::random_problem(20, 10, 0.0, 5));
  const GuaranteeConstants c = make_constants(s.problem, s.summary, s.ls, 0.01, 1.5);
  const double limit = 2 * 1.5 * 0.01 / 20;
  const double F2 = c.fitted_norm * c.fitted_norm;
  for (std::size_t k : {10u, 1000u, 100000u}) {
    const double transient = 1.5 / 20 * F2 / (2 * 0.01 * (k + 1.0));
    EXPECT_NEAR(rfs_bounds(c, k).train_gap, limit + transient, 1e-12 * (limit + transient));
  }
  EXPECT_GT(rfs_bounds(c, 100000).train_gap, limit);
}

TEST(PathBound, ConstantGridMatchesRfs) {
  const Fixture s = setup(fixtures::random_problem(20, 10, 0.0, 5));
  const GuaranteeConstants c = make_constants(s.problem, s.summary, s.ls, 0.01, 1.5);
  const std::vector<double> grid(500, 1.5);
  EXPECT_NEAR(path_bound(c, grid, 300), rfs_bounds(c, 300).train_gap, 1e-14);
}

TEST(Efficiency, ContinuousMaxima) {
  const double tau = std::exp(-0.5);
  EXPECT_NEAR(eta_continuous(tau), 1.0 / std::exp(1.0), 1e-15);
  EXPECT_NEAR(vartheta_continuous(tau), tau, 1e-15);
  EXPECT_EQ(eta_continuous(1.0), 0.0);
  const Fixture s = setup(fixtures::t1());
  const GuaranteeConstants c = make_constants(s.problem, s.summary, s.ls, 1.0);
  const EfficiencyReport r = efficiency(c, 1.0);
  EXPECT_EQ(r.k_lsboost, 0u);
  EXPECT_ANY_THROW(efficiency(c, 0.0));
  const EfficiencyReport h = efficiency(c, 0.5);
  EXPECT_EQ(h.k_lsboost, static_cast<std::size_t>(std::ceil(8.0 * std::log(4.0))));
  EXPECT_EQ(h.k_fse, 31u);
}

TEST(Sandwich, T1AndRandom) {
  const Fixture t1 = setup(fixtures::t1());
  const GuaranteeConstants c1 = make_constants(t1.problem, t1.summary, t1.ls, 1.0);
  const auto rows1 = sandwich(t1.problem, c1, 5);
  EXPECT_NEAR(rows1[0].upper, 2.5, 1e-14);
  EXPECT_NEAR(rows1[0].lower, 2.5, 1e-12);

  const Fixture s = setup(fixtures::random_problem(60, 15, 0.3, 11));
  const GuaranteeConstants c = make_constants(s.problem, s.summary, s.ls, 1.0);
  const std::size_t K = 3000;
  const auto rows = sandwich(s.problem, c, K);
  const BoostTrace t = run(s.problem, make(Variant::LSBoost, 1.0, K));
  std::vector<double> width(K + 1);
  for (std::size_t k = 0; k <= K; ++k) {
    EXPECT_GE(t.records[k].train_error, rows[k].lower - 1e-8);
    EXPECT_LE(t.records[k].train_error, rows[k].upper + 1e-12);
    width[k] = rows[k].upper - rows[k].lower;
  }
  // Both ends start at the null loss; the gap opens, then closes.
  EXPECT_NEAR(width[0], 0.0, 1e-12);
  const std::size_t peak = std::max_element(width.begin(), width.end()) - width.begin();
  for (std::size_t k = peak + 1; k <= K; ++k) EXPECT_LE(width[k], width[k - 1] + 1e-8) << k;
  EXPECT_LT(width[K], 0.05 * width[peak]);
}

TEST(Profile, ColumnsPerVariant) {
  const Fixture s = setup(fixtures::random_problem(20, 10, 0.0, 5));
  const GuaranteeConstants c = make_constants(s.problem, s.summary, s.ls, 0.1, 1.0);
  const GuaranteeProfile ls = guarantee_profile(Variant::LSBoost, c, 10);
  ASSERT_EQ(ls.rows.size(), 11u);
  EXPECT_TRUE(std::isnan(ls.rows[3].lower_sandwich));
  EXPECT_FALSE(std::isnan(ls.rows[3].coeff_dist_bound));
  const GuaranteeProfile rfs = guarantee_profile(Variant::RFS, c, 10);
  EXPECT_TRUE(std::isnan(rfs.rows[3].coeff_dist_bound));
  EXPECT_NEAR(rfs.rows[3].train_error_bound, rfs_bounds(c, 3).train_gap, 1e-15);
  EXPECT_ANY_THROW(guarantee_profile(Variant::PathRFS, c, 10));
}
