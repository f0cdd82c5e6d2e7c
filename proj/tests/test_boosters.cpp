#include "stagewise/boosters.hpp"
#include "stagewise/error.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace stagewise;

namespace {

Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

void expect_vec(const Vector& got, const Vector& want, double tol = 1e-12) {
  ASSERT_EQ(got.size(), want.size());
  EXPECT_LE((got - want).cwiseAbs().maxCoeff(), tol) << got.transpose() << " vs " << want.transpose();
}

AlgorithmConfig make(Variant v, double eps, std::size_t iters, double delta = kUnboundedDelta) {
  AlgorithmConfig c;
  c.variant = v;
  c.epsilon = eps;
  c.max_iters = iters;
  c.delta = delta;
  return c;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an exception";
  return ErrorCode::Io;
}

}  // namespace

TEST(Selection, TiesGoToSmallestIndex) {
  const Matrix X = Matrix::Identity(3, 3);
  EXPECT_EQ(select_column(Vector::Ones(3), X).index, 0u);
  Vector r(3);
  r << 1, -2, 2;
  const Selection s = select_column(r, X);
  EXPECT_EQ(s.index, 1u);
  EXPECT_EQ(s.correlation, -2.0);
}

TEST(LsBoost, HandTraceOnT1) {
  const StandardizedProblem p = fixtures::t1();
  const BoostTrace t = run(p, make(Variant::LSBoost, 1.0, 2));
  ASSERT_EQ(t.records.size(), 3u);
  EXPECT_EQ(t.records[0].j, 0u);
  expect_vec(t.records[1].beta, v2(3, 0));
  expect_vec(t.records[1].resid, v2(0, 1));
  EXPECT_NEAR(t.records[1].train_error, 0.25, 1e-15);
  expect_vec(t.records[2].beta, v2(3, 1));
  expect_vec(t.records[2].resid, v2(0, 0));
  EXPECT_EQ(t.records[2].step, 0.0);
}

TEST(LsBoost, StopsOnceResidualIsExhausted) {
  AlgorithmConfig c = make(Variant::LSBoost, 1.0, 50);
  c.stop_tolerance = 1e-10;
  const BoostTrace t = run(fixtures::t1(), c);
  EXPECT_EQ(t.iterations(), 2u);
  EXPECT_TRUE(t.converged);
}

TEST(Run, ZeroIterationsKeepsInitialState) {
  const BoostTrace t = run(fixtures::t1(), make(Variant::FSe, 0.5, 0));
  ASSERT_EQ(t.records.size(), 1u);
  expect_vec(t.records[0].beta, Vector::Zero(2));
  expect_vec(t.records[0].resid, v2(3, 1));
  EXPECT_DOUBLE_EQ(t.records[0].train_error, 2.5);
}

TEST(Run, Deterministic) {
  const StandardizedProblem p = fixtures::random_problem(40, 30, 0.5, 77);
  const BoostTrace a = run(p, make(Variant::RFS, 0.05, 100, 2.0));
  const BoostTrace b = run(p, make(Variant::RFS, 0.05, 100, 2.0));
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t k = 0; k < a.records.size(); ++k) {
    EXPECT_EQ(a.records[k].beta, b.records[k].beta);
    EXPECT_EQ(a.records[k].resid, b.records[k].resid);
  }
}

TEST(Fse, HandTraceOnT1) {
  const BoostTrace t = run(fixtures::t1(), make(Variant::FSe, 0.5, 2));
  expect_vec(t.records[1].beta, v2(0.5, 0));
  expect_vec(t.records[1].resid, v2(2.5, 1));
  expect_vec(t.records[2].beta, v2(1.0, 0));
  expect_vec(t.records[2].resid, v2(2.0, 1));
}

TEST(Fse, L1NormGrowsByAtMostEpsilon) {
  const StandardizedProblem p = fixtures::random_problem(30, 50, 0.3, 5);
  const BoostTrace t = run(p, make(Variant::FSe, 0.1, 200));
  for (const auto& rec : t.records) EXPECT_LE(rec.l1_norm, rec.k * 0.1 + 1e-12);
}

TEST(Fsek, ScheduleReproducesLsBoost) {
  const StandardizedProblem p = fixtures::t1();
  const BoostTrace ls = run(p, make(Variant::LSBoost, 1.0, 2));
  // |r^T X_j| at the selected column is the LS-Boost(1) step.
  AlgorithmConfig c = make(Variant::FSek, 1.0, 2);
  c.epsilon_schedule = {3.0, 1.0};
  const BoostTrace fk = run(p, c);
  for (std::size_t k = 0; k < 3; ++k) expect_vec(fk.records[k].beta, ls.records[k].beta, 0.0);
}

TEST(Fsek, ConstantScheduleIsFse) {
  const StandardizedProblem p = fixtures::random_problem(20, 10, 0.0, 2);
  const BoostTrace a = run(p, make(Variant::FSe, 0.05, 60));
  AlgorithmConfig c = make(Variant::FSek, 0.05, 60);
  c.epsilon_schedule.assign(60, 0.05);
  const BoostTrace b = run(p, c);
  for (std::size_t k = 0; k < a.records.size(); ++k) EXPECT_EQ(a.records[k].beta, b.records[k].beta);
}

TEST(Rfs, HandTraceOnT1) {
  const BoostTrace t = run(fixtures::t1(), make(Variant::RFS, 0.5, 2, 2.0));
  expect_vec(t.records[1].beta, v2(0.5, 0));
  expect_vec(t.records[1].resid, v2(2.5, 1));
  expect_vec(t.records[2].beta, v2(0.875, 0));
  expect_vec(t.records[2].resid, v2(2.125, 1));
  EXPECT_NEAR(t.records[2].l1_norm, 2.0 * (1.0 - 0.75 * 0.75), 1e-15);
}

TEST(Rfs, InfiniteDeltaIsFse) {
  const StandardizedProblem p = fixtures::random_problem(25, 40, 0.5, 9);
  const BoostTrace a = run(p, make(Variant::FSe, 0.02, 150));
  const BoostTrace b = run(p, make(Variant::RFS, 0.02, 150, kUnboundedDelta));
  for (std::size_t k = 0; k < a.records.size(); ++k) EXPECT_EQ(a.records[k].beta, b.records[k].beta);
}

TEST(Rfs, StaysInsideBudget) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const StandardizedProblem p = fixtures::random_problem(30, 60, 0.5, seed);
    const double delta = 1.5;
    const BoostTrace t = run(p, make(Variant::RFS, 0.1, 300, delta));
    for (const auto& rec : t.records) {
      EXPECT_LE(rec.l1_norm, delta * (1.0 - std::pow(1.0 - 0.1 / delta, rec.k)) + 1e-12);
    }
  }
}

TEST(Rfs, EpsilonAboveDeltaRejected) {
  EXPECT_ANY_THROW(run(fixtures::t1(), make(Variant::RFS, 0.5, 2, 0.25)));
}

TEST(PathRfs, ConstantGridMatchesRfs) {
  const StandardizedProblem p = fixtures::random_problem(20, 10, 0.2, 4);
  const BoostTrace a = run(p, make(Variant::RFS, 0.01, 100, 1.0));
  AlgorithmConfig c = make(Variant::PathRFS, 0.01, 100);
  c.delta_grid.assign(100, 1.0);
  const BoostTrace b = run(p, c);
  for (std::size_t k = 0; k < a.records.size(); ++k) EXPECT_EQ(a.records[k].beta, b.records[k].beta);
}

TEST(PathRfs, GridHonoredAndFeasible) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const StandardizedProblem p = fixtures::random_problem(20, 10, 0.3, 1000 + seed);
    AlgorithmConfig c = make(Variant::PathRFS, 0.01, 200);
    for (int i = 0; i < 200; ++i) c.delta_grid.push_back(0.05 * std::pow(1.02, i));
    const BoostTrace t = run(p, c);
    for (std::size_t k = 0; k + 1 < t.records.size(); ++k) {
      EXPECT_DOUBLE_EQ(t.records[k].delta, c.delta_grid[k]);
      EXPECT_LE(t.records[k + 1].l1_norm, c.delta_grid[k] * (1 + 1e-12));
    }
  }
}

TEST(PathRfs, ShortGridRejectedWithoutClamp) {
  AlgorithmConfig c = make(Variant::PathRFS, 0.1, 10);
  c.delta_grid = {1.0, 2.0};
  c.clamp_grid = false;
  EXPECT_EQ(code_of([&] { run(fixtures::t1(), c); }), ErrorCode::GridTooShort);
  c.clamp_grid = true;
  const BoostTrace t = run(fixtures::t1(), c);
  EXPECT_EQ(t.records[5].delta, 2.0);
}

TEST(Run, ResidualsTrackCoefficients) {
  const StandardizedProblem p = fixtures::random_problem(30, 45, 0.6, 21);
  AlgorithmConfig fk = make(Variant::FSek, 0.1, 150);
  for (int i = 0; i < 150; ++i) fk.epsilon_schedule.push_back(0.1 / std::sqrt(i + 1.0));
  AlgorithmConfig path = make(Variant::PathRFS, 0.05, 150);
  for (int i = 0; i < 150; ++i) path.delta_grid.push_back(0.5 + 0.01 * i);
  for (const AlgorithmConfig& c : {make(Variant::LSBoost, 0.3, 150), make(Variant::FSe, 0.05, 150),
                                   make(Variant::RFS, 0.05, 150, 1.0), fk, path}) {
    const BoostTrace t = run(p, c);
    for (const auto& rec : t.records) {
      const Vector direct = p.y() - p.X() * rec.beta;
      EXPECT_LE((direct - rec.resid).cwiseAbs().maxCoeff(), 1e-10) << to_string(c.variant);
    }
  }
}

TEST(Run, VisitCountsAndSparsity) {
  const BoostTrace t = run(fixtures::t1(), make(Variant::LSBoost, 1.0, 2));
  const auto counts = t.visit_counts(2);
  EXPECT_EQ(counts, (std::vector<std::size_t>{1, 1}));
  EXPECT_EQ(t.records[1].l0_norm, 1u);
  EXPECT_EQ(t.records[2].l0_norm, 2u);
}

TEST(Variant, ParseRoundTrip) {
  for (Variant v : {Variant::LSBoost, Variant::FSe, Variant::FSek, Variant::RFS, Variant::PathRFS}) {
    EXPECT_EQ(parse_variant(to_string(v)), v);
  }
  EXPECT_ANY_THROW(parse_variant("nope"));
}
