#include "stagewise/boosters.hpp"
#include "stagewise/error.hpp"
#include "stagewise/subgrad.hpp"
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

double max_abs_diff(const Vector& a, const Vector& b) { return (a - b).cwiseAbs().maxCoeff(); }

AlgorithmConfig make(Variant v, double eps, std::size_t iters, double delta = kUnboundedDelta) {
  AlgorithmConfig c;
  c.variant = v;
  c.epsilon = eps;
  c.max_iters = iters;
  c.delta = delta;
  return c;
}

}  // namespace

TEST(Objective, HandValues) {
  const StandardizedProblem p = fixtures::t1();
  EXPECT_EQ(evaluate(ResidualObjective::cm(p), Vector::Zero(2)), 0.0);
  EXPECT_EQ(evaluate(ResidualObjective::rcm(p, 1.0), v2(3, 1)), 3.0);
  EXPECT_EQ(evaluate(ResidualObjective::rcm(p, 1.0), v2(2, 1)), 2.5);
  EXPECT_EQ(evaluate(ResidualObjective::rcm(p, kUnboundedDelta), v2(2, 1)), 2.0);
  EXPECT_ANY_THROW(ResidualObjective::rcm(p, 0.0));
}

TEST(Subgradient, HandValues) {
  const StandardizedProblem p = fixtures::t1();
  const Subgradient g = subgradient(ResidualObjective::cm(p), v2(3, 1));
  EXPECT_EQ(g.g, v2(1, 0));
  EXPECT_EQ(g.j, 0u);
  EXPECT_EQ(g.sign, 1);
  EXPECT_EQ(subgradient(ResidualObjective::rcm(p, 2.0), v2(3, 1)).g, v2(1, 0));
}

TEST(Subgradient, SatisfiesSubgradientInequality) {
  Rng rng(31);
  for (int inst = 0; inst < 5; ++inst) {
    const StandardizedProblem p = fixtures::random_problem(20, 15 + 10 * inst, 0.4, 200 + inst);
    for (double delta : {kUnboundedDelta, 0.7, 3.0}) {
      const ResidualObjective obj = ResidualObjective::rcm(p, delta);
      for (int trial = 0; trial < 20; ++trial) {
        const Vector b1 = gaussian_matrix(p.p(), 1, rng).col(0);
        const Vector b2 = gaussian_matrix(p.p(), 1, rng).col(0);
        const Vector r1 = p.y() - p.X() * b1;
        const Vector r2 = p.y() - p.X() * b2;
        const Subgradient g = subgradient(obj, r1);
        const double lhs = evaluate(obj, r2);
        const double rhs = evaluate(obj, r1) + g.g.dot(r2 - r1);
        EXPECT_GE(lhs, rhs - 1e-10 * (1.0 + std::abs(lhs)));
      }
    }
  }
}

TEST(Bounds, ClassicalSubgradientBound) {
  EXPECT_DOUBLE_EQ(sd_bound(std::sqrt(10.0), 1.0, 0.5, 9), 1.25);
  EXPECT_DOUBLE_EQ(sequence_process_bound(std::sqrt(10.0), 1.0, std::vector<double>(10, 0.5)), 1.25);
  EXPECT_ANY_THROW(step_sequence({0.1})(1, Vector::Zero(1)));
}

TEST(Bounds, RunningMinimumOnT1) {
  const StandardizedProblem p = fixtures::t1();
  const auto states = descend(ResidualObjective::cm(p), constant_step(0.5), 30);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < states.size(); ++k) {
    best = std::min(best, evaluate(ResidualObjective::cm(p), states[k].r));
    EXPECT_LE(best, sd_bound(std::sqrt(10.0), 1.0, 0.5, k) + 1e-12);
  }
}

TEST(Equivalence, FseIsConstantStepCmDescent) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const StandardizedProblem p = fixtures::random_problem(30, seed % 2 ? 60 : 12, 0.5, 300 + seed);
    const BoostTrace t = run(p, make(Variant::FSe, 0.05, 200));
    const auto states = descend(ResidualObjective::cm(p), constant_step(0.05), 200);
    for (std::size_t k = 0; k <= 200; ++k) {
      EXPECT_LE(max_abs_diff(states[k].r, t.records[k].resid), 1e-12);
      EXPECT_LE(max_abs_diff(states[k].beta_shadow, t.records[k].beta), 1e-12);
    }
  }
}

TEST(Equivalence, LsBoostIsCorrelationScaledDescent) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const StandardizedProblem p = fixtures::random_problem(30, 40, 0.3, 400 + seed);
    const BoostTrace t = run(p, make(Variant::LSBoost, 0.4, 200));
    const auto states = descend(ResidualObjective::cm(p), correlation_scaled_step(p, 0.4), 200);
    for (std::size_t k = 0; k <= 200; ++k) EXPECT_LE(max_abs_diff(states[k].r, t.records[k].resid), 1e-12);
  }
}

TEST(Equivalence, RfsIsRcmDescent) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const StandardizedProblem p = fixtures::random_problem(30, 50, 0.5, 500 + seed);
    const BoostTrace t = run(p, make(Variant::RFS, 0.05, 200, 2.0));
    const auto states = descend(ResidualObjective::rcm(p, 2.0), constant_step(0.05), 200);
    for (std::size_t k = 0; k <= 200; ++k) {
      EXPECT_LE(max_abs_diff(states[k].r, t.records[k].resid), 1e-12);
      EXPECT_LE(max_abs_diff(states[k].beta_shadow, t.records[k].beta), 1e-12);
    }
  }
}

TEST(Descend, StaysInResidualSet) {
  const StandardizedProblem p = fixtures::random_problem(20, 30, 0.2, 9);
  std::vector<double> steps;
  for (int i = 0; i < 100; ++i) steps.push_back(0.2 / std::sqrt(i + 1.0));
  const auto states = descend(ResidualObjective::rcm(p, 1.0), step_sequence(steps), 100);
  ASSERT_EQ(states.size(), 101u);
  for (const auto& s : states) EXPECT_LE(max_abs_diff(p.y() - p.X() * s.beta_shadow, s.r), 1e-10);
  EXPECT_EQ(states.back().alpha, 0.0);
}
