#include "stagewise/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace stagewise {
namespace {

double inv_n(const StandardizedProblem& problem) { return 1.0 / static_cast<double>(problem.n()); }

// Eigenpairs of the factored Gram matrix above the zero threshold.
struct RangeFactors {
  Matrix vectors;
  Vector inv_values;
};

RangeFactors range_factors(const SpectralDecomposition& factors) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < factors.eigenvalues.size(); ++i) {
    if (factors.eigenvalues(i) > factors.summary.zero_threshold) keep.push_back(i);
  }
  RangeFactors out;
  out.vectors.resize(factors.eigenvectors.rows(), static_cast<Eigen::Index>(keep.size()));
  out.inv_values.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    out.vectors.col(static_cast<Eigen::Index>(c)) = factors.eigenvectors.col(keep[c]);
    out.inv_values(static_cast<Eigen::Index>(c)) = 1.0 / factors.eigenvalues(keep[c]);
  }
  return out;
}

}  // namespace

LeastSquaresSolution solve_least_squares(const StandardizedProblem& problem, const SpectralDecomposition& factors) {
  const Matrix& X = problem.X();
  const RangeFactors rf = range_factors(factors);
  LeastSquaresSolution out;
  if (factors.side == GramSide::Coefficient) {
    // beta = V diag(1/lambda) V^T X^T y
    const Vector coeffs = rf.vectors.transpose() * (X.transpose() * problem.y());
    out.beta_ls = rf.vectors * coeffs.cwiseProduct(rf.inv_values);
  } else {
    // beta = X^T U diag(1/lambda) U^T y
    const Vector coeffs = rf.vectors.transpose() * problem.y();
    out.beta_ls = X.transpose() * (rf.vectors * coeffs.cwiseProduct(rf.inv_values));
  }
  out.fitted = X * out.beta_ls;
  out.fitted_norm = out.fitted.norm();
  out.loss_star = (problem.y() - out.fitted).squaredNorm() * 0.5 * inv_n(problem);
  return out;
}

LeastSquaresSolution solve_least_squares(const StandardizedProblem& problem) {
  return solve_least_squares(problem, decompose(problem));
}

Vector project_row_space(const StandardizedProblem& problem, const SpectralDecomposition& factors,
                         const Vector& beta) {
  const RangeFactors rf = range_factors(factors);
  if (factors.side == GramSide::Coefficient) return rf.vectors * (rf.vectors.transpose() * beta);
  const Vector xb = problem.X() * beta;
  return problem.X().transpose() * (rf.vectors * (rf.vectors.transpose() * xb).cwiseProduct(rf.inv_values));
}

double distance_to_ls_set(const StandardizedProblem& problem, const SpectralDecomposition& factors,
                          const LeastSquaresSolution& ls, const Vector& beta) {
  return (project_row_space(problem, factors, beta) - ls.beta_ls).norm();
}

Vector project_l1_ball(const Vector& v, double radius) {
  if (!(radius >= 0.0)) throw Error(ErrorCode::InvalidArgument, "l1 ball radius must be >= 0");
  if (v.lpNorm<1>() <= radius) return v;
  if (radius == 0.0) return Vector::Zero(v.size());

  std::vector<double> mags(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) mags[static_cast<std::size_t>(i)] = std::abs(v(i));
  std::sort(mags.begin(), mags.end(), std::greater<>());

  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < mags.size(); ++j) {
    cumulative += mags[j];
    const double candidate = (cumulative - radius) / static_cast<double>(j + 1);
    if (mags[j] - candidate > 0.0) theta = candidate;
  }
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double shrunk = std::max(std::abs(v(i)) - theta, 0.0);
    out(i) = v(i) < 0.0 ? -shrunk : shrunk;
  }
  return out;
}

DualCertificate certify(const StandardizedProblem& problem, const Vector& beta, double delta) {
  if (!(delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "delta must be positive");
  const double l1 = beta.lpNorm<1>();
  if (l1 > delta * (1.0 + 1e-10)) {
    throw Error(ErrorCode::InfeasibleBeta,
                "||beta||_1 = " + std::to_string(l1) + " exceeds delta = " + std::to_string(delta));
  }
  const Vector fit = problem.X() * beta;
  const Vector r = problem.y() - fit;
  const double corr = (problem.X().transpose() * r).lpNorm<Eigen::Infinity>();

  DualCertificate c;
  c.delta = delta;
  c.omega = corr - r.dot(fit) / delta;
  c.gap_bound = delta * inv_n(problem) * c.omega;
  c.primal_value = r.squaredNorm() * 0.5 * inv_n(problem);
  c.dual_value = corr + fit.squaredNorm() / (2.0 * delta);
  return c;
}

LassoSolution solve_lasso(const StandardizedProblem& problem, double delta, const LassoOptions& options) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw Error(ErrorCode::InvalidArgument, "delta must be positive");
  if (!(options.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");

  const Matrix& X = problem.X();
  const Vector& y = problem.y();
  const double lipschitz = analyze(problem).lambda_max * inv_n(problem);
  const double step = 1.0 / lipschitz;

  Vector beta = options.start.size() == X.cols() ? project_l1_ball(options.start, delta)
                                                 : Vector::Zero(X.cols());
  Vector z = beta;
  double t = 1.0;

  auto finish = [&](const Vector& b, std::size_t iters) {
    LassoSolution s;
    s.delta = delta;
    s.beta_star = b;
    s.certificate = certify(problem, b, delta);
    s.loss_star_delta = s.certificate.primal_value;
    s.iterations = iters;
    return s;
  };

  LassoSolution best = finish(beta, 0);
  if (best.certificate.omega <= options.tol) return best;

  for (std::size_t it = 1; it <= options.max_iters; ++it) {
    const Vector gradient = -(X.transpose() * (y - X * z)) * inv_n(problem);
    Vector next = project_l1_ball(z - step * gradient, delta);

    const Vector fit = X * next;
    const Vector r = y - fit;
    const double omega = (X.transpose() * r).lpNorm<Eigen::Infinity>() - r.dot(fit) / delta;
    if (omega <= options.tol) return finish(next, it);
    if (omega < best.certificate.omega) best = finish(next, it);

    if ((z - next).dot(next - beta) > 0.0) {
      t = 1.0;
      z = next;
    } else {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      z = next + ((t - 1.0) / t_next) * (next - beta);
      t = t_next;
    }
    beta = std::move(next);
  }
  throw LassoNotConverged("lasso solver did not reach omega <= " + std::to_string(options.tol) + " (best " +
                              std::to_string(best.certificate.omega) + ")",
                          best);
}

namespace {

// Finishes the minimum-l1 problem exactly. In coordinates of the range of
// X it is the linear program
//   min 1^T (u + v)  s.t.  A (u - v) = b,  u, v >= 0,
// with A = U_r^T X (r x p, full row rank) and b = U_r^T X beta_ls. The
// starting basis is carried by the largest entries of the current best;
// primal simplex with Bland's rule then runs to optimality. The dual y with
// B^T y = 1 gives the certificate b^T y / ||A^T y||_inf.
void polish_vertex(const StandardizedProblem& problem, const SpectralDecomposition& factors,
                   const LeastSquaresSolution& ls, DeltaMaxResult& out) {
  const Matrix& X = problem.X();
  const auto p = X.cols();
  const auto r = static_cast<Eigen::Index>(factors.summary.rank);

  Eigen::BDCSVD<Matrix> svd(X, Eigen::ComputeThinU);
  const Matrix A = svd.matrixU().leftCols(r).transpose() * X;
  const Vector b = svd.matrixU().leftCols(r).transpose() * ls.fitted;

  // Basis: column index and sign (+1 for u_j, -1 for v_j).
  std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return std::abs(out.beta(i)) > std::abs(out.beta(j)); });
  std::vector<Eigen::Index> cols;
  std::vector<double> signs;
  Matrix B(r, 0);
  for (Eigen::Index j : order) {
    if (B.cols() == r) break;
    Matrix trial(r, B.cols() + 1);
    trial << B, A.col(j);
    Eigen::ColPivHouseholderQR<Matrix> qr(trial);
    qr.setThreshold(1e-10);
    if (qr.rank() == trial.cols()) {
      B = std::move(trial);
      cols.push_back(j);
    }
  }
  if (B.cols() != r) return;
  {
    const Vector beta_b = B.partialPivLu().solve(b);
    for (Eigen::Index i = 0; i < r; ++i) {
      signs.push_back(beta_b(i) < 0.0 ? -1.0 : 1.0);
      B.col(i) *= signs.back();
    }
  }

  // Variable ids for Bland's rule: 2j for u_j, 2j+1 for v_j.
  auto id = [&](Eigen::Index j, double sign) { return 2 * j + (sign < 0.0 ? 1 : 0); };
  constexpr double kTol = 1e-11;
  Vector x_b, y;
  const std::size_t max_pivots = 50 * static_cast<std::size_t>(p + r);
  for (std::size_t pivot = 0; pivot < max_pivots; ++pivot) {
    const Eigen::PartialPivLU<Matrix> lu(B);
    x_b = lu.solve(b).cwiseMax(0.0);
    y = lu.transpose().solve(Vector::Ones(r));
    const Vector w = A.transpose() * y;

    Eigen::Index enter = -1;
    double enter_sign = 0.0;
    Eigen::Index enter_id = 2 * p;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (std::abs(w(j)) <= 1.0 + kTol) continue;
      const double sign = w(j) > 0.0 ? 1.0 : -1.0;
      if (id(j, sign) < enter_id) {
        enter = j;
        enter_sign = sign;
        enter_id = id(j, sign);
      }
    }
    if (enter < 0) break;

    const Vector d = lu.solve(enter_sign * A.col(enter));
    Eigen::Index leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < r; ++i) {
      if (d(i) <= kTol) continue;
      const double ratio = x_b(i) / d(i);
      const auto i_id = id(cols[static_cast<std::size_t>(i)], signs[static_cast<std::size_t>(i)]);
      if (ratio < best_ratio - kTol ||
          (ratio <= best_ratio + kTol && leave >= 0 &&
           i_id < id(cols[static_cast<std::size_t>(leave)], signs[static_cast<std::size_t>(leave)]))) {
        best_ratio = std::min(best_ratio, ratio);
        leave = i;
      }
    }
    if (leave < 0) return;  // unbounded direction cannot occur for a norm; bail out
    cols[static_cast<std::size_t>(leave)] = enter;
    signs[static_cast<std::size_t>(leave)] = enter_sign;
    B.col(leave) = enter_sign * A.col(enter);
  }

  Vector candidate = Vector::Zero(p);
  for (Eigen::Index i = 0; i < r; ++i) {
    candidate(cols[static_cast<std::size_t>(i)]) += signs[static_cast<std::size_t>(i)] * x_b(i);
  }
  const double value = candidate.lpNorm<1>();
  const double residual = (X * candidate - ls.fitted).norm();
  if (residual <= 1e-9 * std::max(ls.fitted_norm, 1.0) && value < out.value) {
    out.value = value;
    out.beta = candidate;
  }
  const double scale = (A.transpose() * y).lpNorm<Eigen::Infinity>();
  if (scale > 0.0) out.lower_bound = std::max(out.lower_bound, b.dot(y) / scale);
  out.lower_bound = std::min(out.lower_bound, out.value);
}

}  // namespace

DeltaMaxResult compute_delta_max(const StandardizedProblem& problem, double tol, std::size_t max_iters) {
  const SpectralDecomposition factors = decompose(problem);
  const LeastSquaresSolution ls = solve_least_squares(problem, factors);

  DeltaMaxResult out;
  out.beta = ls.beta_ls;
  out.value = ls.beta_ls.lpNorm<1>();
  if (factors.summary.rank == problem.p()) {
    out.exact = true;
    out.lower_bound = out.value;
    return out;
  }

  // Any s gives the lower bound beta_ls^T P s / ||P s||_inf, with P the
  // row-space projector: beta^T P s is the same for every feasible beta
  // and is at most ||beta||_1 ||P s||_inf.
  auto lower_from = [&](const Vector& s) {
    const Vector ps = project_row_space(problem, factors, s);
    const double scale = ps.lpNorm<Eigen::Infinity>();
    return scale > 0.0 ? ls.beta_ls.dot(ps) / scale : 0.0;
  };
  auto sign_vector = [](const Vector& b) {
    return Vector(b.unaryExpr([](double x) { return static_cast<double>((x > 0.0) - (x < 0.0)); }));
  };

  Vector beta = ls.beta_ls;
  Vector sign_sum = Vector::Zero(beta.size());
  const double base_length = 0.1 * std::max(ls.beta_ls.norm(), 1e-300);
  out.lower_bound = std::max(0.0, lower_from(sign_vector(beta)));
  std::size_t last_improvement = 0;
  constexpr std::size_t kStallWindow = 2000;

  std::size_t it = 0;
  for (; it < max_iters; ++it) {
    if (out.value - out.lower_bound <= tol * out.value) break;
    if (it - last_improvement > kStallWindow) break;

    const Vector s = sign_vector(beta);
    sign_sum += s;
    const Vector d = s - project_row_space(problem, factors, s);
    const double d_norm = d.norm();
    if (d_norm == 0.0) break;  // sign(beta) lies in the row space: optimal
    beta -= (base_length / (d_norm * std::sqrt(static_cast<double>(it + 1)))) * d;
    if (it % 100 == 99) beta += ls.beta_ls - project_row_space(problem, factors, beta);

    const double value = beta.lpNorm<1>();
    if (value < out.value * (1.0 - tol)) last_improvement = it;
    if (value < out.value) {
      out.value = value;
      out.beta = beta;
    }
    if (it % 50 == 0) {
      out.lower_bound = std::max({out.lower_bound, lower_from(s), lower_from(sign_sum / static_cast<double>(it + 1))});
    }
  }
  out.lower_bound = std::max(out.lower_bound, lower_from(sign_vector(out.beta)));
  out.iterations = it;
  polish_vertex(problem, factors, ls, out);
  return out;
}

double delta_max(const StandardizedProblem& problem) { return compute_delta_max(problem).value; }

double max_representation_objective(const StandardizedProblem& problem, const Vector& beta, const Vector& t) {
  const double scale = inv_n(problem);
  return -t.dot(problem.X() * beta) * scale - (t - problem.y()).squaredNorm() * 0.5 * scale +
         problem.y().squaredNorm() * 0.5 * scale;
}

MaxRepresentation max_representation_check(const StandardizedProblem& problem, const Vector& beta) {
  MaxRepresentation out;
  out.loss = training_loss(problem, beta);
  out.max_value = max_representation_objective(problem, beta, problem.y() - problem.X() * beta);
  out.discrepancy = std::abs(out.loss - out.max_value);
  return out;
}

QuadraticLemmaResult quadratic_lemma_check(const Matrix& Q, const Vector& q, const Vector& x) {
  if (Q.rows() != Q.cols() || Q.rows() != q.size() || q.size() != x.size()) {
    throw Error(ErrorCode::InvalidArgument, "dimension mismatch in quadratic");
  }
  const double q_scale = std::max(Q.cwiseAbs().maxCoeff(), 1e-300);
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * q_scale) {
    throw Error(ErrorCode::InvalidArgument, "Q is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(Q);
  const Vector& lambda = solver.eigenvalues();
  const Matrix& U = solver.eigenvectors();
  const double lambda_max = lambda.maxCoeff();
  if (lambda.minCoeff() < -1e-12 * std::max(lambda_max, 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "Q is not positive semidefinite");
  }
  const double threshold =
      static_cast<double>(Q.rows()) * std::numeric_limits<double>::epsilon() * std::max(lambda_max, 0.0);

  double lambda_pmin = std::numeric_limits<double>::infinity();
  Vector x_hat = Vector::Zero(q.size());
  Vector q_null = q;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) <= threshold) continue;
    lambda_pmin = std::min(lambda_pmin, lambda(i));
    const double coeff = U.col(i).dot(q);
    x_hat -= (coeff / lambda(i)) * U.col(i);
    q_null -= coeff * U.col(i);
  }
  if (!std::isfinite(lambda_pmin)) throw Error(ErrorCode::InvalidArgument, "Q has no nonzero eigenvalue");
  if (q_null.norm() > 1e-10 * (1.0 + q.norm())) {
    throw Error(ErrorCode::UnboundedBelow, "linear term has a component in the null space of Q");
  }

  // Closest minimizer: x_hat plus the null-space part of x - x_hat.
  const Vector diff = x - x_hat;
  Vector range_part = Vector::Zero(diff.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) > threshold) range_part += U.col(i).dot(diff) * U.col(i);
  }

  QuadraticLemmaResult out;
  out.gap = std::max(0.5 * diff.dot(Q * diff), 0.0);
  out.distance = range_part.norm();
  out.distance_bound = std::sqrt(2.0 * out.gap / lambda_pmin);
  out.gradient_norm = (Q * x + q).norm();
  out.gradient_bound = std::sqrt(lambda_pmin * out.gap / 2.0);
  constexpr double kRel = 1e-10;
  out.distance_holds = out.distance <= out.distance_bound * (1.0 + kRel) + 1e-14;
  out.gradient_holds = out.gradient_norm >= out.gradient_bound * (1.0 - kRel) - 1e-14;
  return out;
}

}  // namespace stagewise
