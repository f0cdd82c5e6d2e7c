#include "stagewise/spectral.hpp"

#include "stagewise/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace stagewise {

SpectralDecomposition decompose(const Matrix& X, GramSide side) {
  const Matrix gram = side == GramSide::Coefficient ? Matrix(X.transpose() * X) : Matrix(X * X.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(gram);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::DegenerateMatrix, "eigensolver did not converge");
  }

  SpectralDecomposition out;
  out.side = side;
  out.eigenvalues = solver.eigenvalues();
  out.eigenvectors = solver.eigenvectors();

  auto& s = out.summary;
  s.n = static_cast<std::size_t>(X.rows());
  s.p = static_cast<std::size_t>(X.cols());
  s.lambda_max = std::max(out.eigenvalues.maxCoeff(), 0.0);
  s.zero_threshold = static_cast<double>(std::max(s.n, s.p)) * std::numeric_limits<double>::epsilon() * s.lambda_max;

  s.rank = 0;
  s.lambda_pmin = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < out.eigenvalues.size(); ++i) {
    const double lambda = out.eigenvalues(i);
    if (lambda > s.zero_threshold) {
      ++s.rank;
      s.lambda_pmin = std::min(s.lambda_pmin, lambda);
    }
  }
  if (s.rank == 0) {
    throw Error(ErrorCode::DegenerateMatrix, "all eigenvalues of the Gram matrix are numerically zero");
  }
  s.lambda_min = s.rank == s.p ? s.lambda_pmin : 0.0;
  s.kappa = static_cast<double>(s.p) / s.lambda_pmin;
  s.kappa_bar = s.lambda_min > 0.0 ? s.lambda_max / s.lambda_min : std::numeric_limits<double>::infinity();
  return out;
}

SpectralDecomposition decompose(const Matrix& X) {
  return decompose(X, X.cols() <= X.rows() ? GramSide::Coefficient : GramSide::Sample);
}

SpectralDecomposition decompose(const StandardizedProblem& problem) { return decompose(problem.X()); }

SpectralSummary analyze(const StandardizedProblem& problem) { return decompose(problem).summary; }

double gamma(const SpectralSummary& summary, double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) {
    throw Error(ErrorCode::EpsilonOutOfRange, "learning rate must lie in (0, 1], got " + std::to_string(epsilon));
  }
  return 1.0 - epsilon * (2.0 - epsilon) * summary.lambda_pmin / (4.0 * static_cast<double>(summary.p));
}

}  // namespace stagewise
