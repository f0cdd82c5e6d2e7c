#pragma once

#include "stagewise/problem.hpp"

#include <cstddef>

namespace stagewise {

/// Spectral constants of X^T X that drive every convergence guarantee.
struct SpectralSummary {
  /// Smallest eigenvalue above zero_threshold.
  double lambda_pmin = 0.0;
  double lambda_max = 0.0;
  /// Smallest eigenvalue of the p x p matrix; 0 whenever rank < p.
  double lambda_min = 0.0;
  /// p / lambda_pmin.
  double kappa = 0.0;
  /// lambda_max / lambda_min, +infinity when lambda_min is 0.
  double kappa_bar = 0.0;
  std::size_t rank = 0;
  /// max(n, p) * machine epsilon * lambda_max.
  double zero_threshold = 0.0;
  std::size_t n = 0;
  std::size_t p = 0;
};

/// Which Gram matrix was factored. Both share the nonzero spectrum.
enum class GramSide {
  Coefficient,  // X^T X, p x p
  Sample,       // X X^T, n x n
};

/// Full eigendecomposition of the smaller Gram matrix, kept so the
/// least-squares oracle can form pseudoinverses without refactoring.
struct SpectralDecomposition {
  SpectralSummary summary;
  GramSide side = GramSide::Coefficient;
  /// Ascending.
  Vector eigenvalues;
  /// Columns are orthonormal eigenvectors matching `eigenvalues`.
  Matrix eigenvectors;
};

/// Factors X^T X when p <= n and X X^T otherwise. Throws DegenerateMatrix
/// if every eigenvalue is below the zero threshold.
SpectralDecomposition decompose(const Matrix& X);
/// Same, on a caller-chosen side.
SpectralDecomposition decompose(const Matrix& X, GramSide side);

SpectralDecomposition decompose(const StandardizedProblem& problem);
SpectralSummary analyze(const StandardizedProblem& problem);

/// Linear convergence rate coefficient 1 - eps (2 - eps) lambda_pmin / (4p).
/// Throws EpsilonOutOfRange unless 0 < eps <= 1.
double gamma(const SpectralSummary& summary, double epsilon);

}  // namespace stagewise
