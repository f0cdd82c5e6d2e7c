#pragma once

#include "stagewise/problem.hpp"

#include <cstddef>
#include <functional>
#include <vector>

namespace stagewise {

/// Objective over residuals r in P_res = { y - X beta }.
///
///   CM:  f(r)   = ||X^T r||_inf
///   RCM: f_d(r) = ||X^T r||_inf + ||r - y||^2 / (2 delta)
///
/// CM is minimized (value 0) exactly at least-squares residuals. RCM with
/// parameter delta is, up to the factor n / delta, the dual of the
/// l1-constrained least-squares problem with budget delta.
class ResidualObjective {
 public:
  enum class Kind { CM, RCM };

  static ResidualObjective cm(const StandardizedProblem& problem);
  /// Throws InvalidArgument unless delta > 0. delta = +inf gives CM.
  static ResidualObjective rcm(const StandardizedProblem& problem, double delta);

  Kind kind() const { return kind_; }
  double delta() const { return delta_; }
  const StandardizedProblem& problem() const { return *problem_; }

 private:
  ResidualObjective(const StandardizedProblem& problem, Kind kind, double delta)
      : problem_(&problem), kind_(kind), delta_(delta) {}

  const StandardizedProblem* problem_;
  Kind kind_;
  double delta_;
};

double evaluate(const ResidualObjective& obj, const Vector& r);

/// A subgradient at r together with the column that generated it.
struct Subgradient {
  Vector g;
  std::size_t j = 0;
  int sign = 0;
};

/// CM: sgn(r^T X_j) X_j at the smallest index j maximizing |r^T X_j|.
/// RCM adds (r - y) / delta.
Subgradient subgradient(const ResidualObjective& obj, const Vector& r);

/// Step size alpha_k as a function of the iteration and current residual.
using StepRule = std::function<double(std::size_t k, const Vector& r)>;

StepRule constant_step(double alpha);
/// alpha_k = steps[k]; throws InvalidArgument when k runs past the end.
StepRule step_sequence(std::vector<double> steps);
/// alpha_k = epsilon * ||X^T r||_inf, the schedule under which CM descent
/// reproduces LS-Boost(epsilon).
StepRule correlation_scaled_step(const StandardizedProblem& problem, double epsilon);

struct SubgradState {
  Vector r;
  /// Coefficients with r = y - X beta_shadow.
  Vector beta_shadow;
  std::size_t k = 0;
  /// Subgradient evaluated at r and the step taken from it (0 on the last state).
  Vector g;
  double alpha = 0.0;
};

/// Subgradient descent r <- r - alpha_k g from r = y, M iterations. The
/// update never leaves P_res, so the projection is the identity; debug
/// builds assert membership through beta_shadow. Returns M + 1 states.
std::vector<SubgradState> descend(const ResidualObjective& obj, const StepRule& steps, std::size_t iterations);

/// Classical guarantee for constant step alpha and subgradients bounded by G:
/// min_{i<=k} f(x^i) - f* <= dist0^2 / (2 (k+1) alpha) + alpha G^2 / 2.
double sd_bound(double dist0, double G, double alpha, std::size_t k);

/// General-step right-hand side (||x0 - x||^2 + G^2 sum alpha_i^2) / (2 sum alpha_i).
double sequence_process_bound(double dist0, double G, const std::vector<double>& alphas);

}  // namespace stagewise
