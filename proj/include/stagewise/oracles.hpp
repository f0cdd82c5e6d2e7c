#pragma once

#include "stagewise/error.hpp"
#include "stagewise/problem.hpp"
#include "stagewise/spectral.hpp"

#include <cstddef>

namespace stagewise {

struct LeastSquaresSolution {
  /// Minimum l2-norm least-squares coefficients.
  Vector beta_ls;
  /// X beta_ls.
  Vector fitted;
  /// L_n^* = ||y - X beta_ls||^2 / (2n).
  double loss_star = 0.0;
  /// ||X beta_ls||_2.
  double fitted_norm = 0.0;
};

/// Pseudoinverse solve through the spectral factors.
LeastSquaresSolution solve_least_squares(const StandardizedProblem& problem);
LeastSquaresSolution solve_least_squares(const StandardizedProblem& problem, const SpectralDecomposition& factors);

/// Orthogonal projection of beta onto the row space of X.
Vector project_row_space(const StandardizedProblem& problem, const SpectralDecomposition& factors,
                         const Vector& beta);

/// Distance from beta to the affine set of all least-squares solutions.
double distance_to_ls_set(const StandardizedProblem& problem, const SpectralDecomposition& factors,
                          const LeastSquaresSolution& ls, const Vector& beta);

/// Euclidean projection onto { w : ||w||_1 <= radius } by sorting
/// magnitudes and soft-thresholding at the computed level.
Vector project_l1_ball(const Vector& v, double radius);

/// Optimality certificate for the budgeted problem
///   min L_n(beta)  s.t.  ||beta||_1 <= delta
/// at a feasible beta with residual r = y - X beta.
struct DualCertificate {
  double delta = 0.0;
  /// ||X^T r||_inf - r^T X beta / delta, nonnegative for feasible beta.
  double omega = 0.0;
  /// (delta / n) * omega, an upper bound on L_n(beta) - L*_{n,delta}.
  double gap_bound = 0.0;
  /// L_n(beta).
  double primal_value = 0.0;
  /// f_delta(r) = ||X^T r||_inf + ||r - y||^2 / (2 delta).
  double dual_value = 0.0;
};

/// Throws InfeasibleBeta when ||beta||_1 > delta (1 + 1e-10).
DualCertificate certify(const StandardizedProblem& problem, const Vector& beta, double delta);

struct LassoSolution {
  double delta = 0.0;
  Vector beta_star;
  /// L*_{n,delta} as attained by beta_star.
  double loss_star_delta = 0.0;
  DualCertificate certificate;
  std::size_t iterations = 0;
};

struct LassoOptions {
  /// Stop once omega <= tol.
  double tol = 1e-8;
  std::size_t max_iters = 500000;
  /// Warm start; projected onto the ball first. Zero when empty.
  Vector start;
};

/// Thrown when the solver exhausts its budget; carries the best iterate.
class LassoNotConverged : public Error {
 public:
  LassoNotConverged(const std::string& what, LassoSolution best)
      : Error(ErrorCode::MaxItersExceeded, what), best_(std::move(best)) {}
  const LassoSolution& best() const { return best_; }

 private:
  LassoSolution best_;
};

/// Accelerated projected gradient (FISTA with gradient-based restart) on the
/// l1 ball, step 1 / lambda_max(X^T X / n). Throws InvalidArgument for
/// delta <= 0 or tol <= 0.
LassoSolution solve_lasso(const StandardizedProblem& problem, double delta, const LassoOptions& options = {});

/// l1 norm of the minimum-l1-norm least-squares solution.
struct DeltaMaxResult {
  double value = 0.0;
  /// Certified lower bound on the true minimum (equals value when exact).
  double lower_bound = 0.0;
  /// True when X has full column rank and the value is ||beta_ls||_1.
  bool exact = false;
  std::size_t iterations = 0;
  Vector beta;
};

/// Full column rank: exact. Otherwise projected subgradient descent on
/// ||beta||_1 over { beta : X beta = X beta_ls } from the min-l2 solution,
/// stopped when the duality gap against the lower bound falls below
/// tol * value or progress stalls, then polished at the vertex carried by the
/// largest entries; lower_bound == value certifies the result.
DeltaMaxResult compute_delta_max(const StandardizedProblem& problem, double tol = 1e-6,
                                 std::size_t max_iters = 20000);
double delta_max(const StandardizedProblem& problem);

/// Both sides of the max representation
///   L_n(beta) = max_{t in P_res} -t^T X beta / n - ||t - y||^2 / (2n) + ||y||^2 / (2n)
/// with the inner max evaluated at its maximizer t = y - X beta.
struct MaxRepresentation {
  double loss = 0.0;
  double max_value = 0.0;
  double discrepancy = 0.0;
};

MaxRepresentation max_representation_check(const StandardizedProblem& problem, const Vector& beta);
/// The inner objective at an arbitrary t in P_res.
double max_representation_objective(const StandardizedProblem& problem, const Vector& beta, const Vector& t);

/// Distance and gradient bounds for h(x) = x^T Q x / 2 + q^T x with Q PSD:
///   ||x - x*|| <= sqrt(2 (h(x) - h*) / lambda_pmin(Q))
///   ||grad h(x)|| >= sqrt(lambda_pmin(Q) (h(x) - h*) / 2)
/// where x* is the minimizer closest to x.
struct QuadraticLemmaResult {
  double gap = 0.0;
  double distance = 0.0;
  double distance_bound = 0.0;
  double gradient_norm = 0.0;
  double gradient_bound = 0.0;
  bool distance_holds = false;
  bool gradient_holds = false;
};

/// Throws UnboundedBelow when q has a component in the null space of Q,
/// InvalidArgument when Q is not symmetric PSD.
QuadraticLemmaResult quadratic_lemma_check(const Matrix& Q, const Vector& q, const Vector& x);

}  // namespace stagewise
