#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace stagewise {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Covariates and response as read or generated, before any scaling.
struct RawDataset {
  Matrix X;
  Vector y;

  std::size_t rows() const { return static_cast<std::size_t>(X.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(X.cols()); }
};

/// Throws NonFiniteInput / InvalidArgument if the dataset is empty, ragged
/// or contains NaN/Inf.
void validate(const RawDataset& raw);

/// Design matrix with unit-norm columns plus response. Only obtainable
/// through standardize(); immutable afterwards, so it can be shared across
/// threads freely.
class StandardizedProblem {
 public:
  const Matrix& X() const { return X_; }
  const Vector& y() const { return y_; }
  bool centered() const { return centered_; }
  /// Original column norms (after centering, if any).
  const Vector& column_scales() const { return column_scales_; }
  /// Original column means; zero when not centered.
  const Vector& column_means() const { return column_means_; }
  double y_mean() const { return y_mean_; }

  std::size_t n() const { return static_cast<std::size_t>(X_.rows()); }
  std::size_t p() const { return static_cast<std::size_t>(X_.cols()); }

  /// Maps standardized coefficients back to the raw covariate units.
  Vector to_raw_coefficients(const Vector& beta) const;

 private:
  friend StandardizedProblem standardize(const RawDataset& raw, bool center);
  StandardizedProblem() = default;

  Matrix X_;
  Vector y_;
  bool centered_ = false;
  Vector column_scales_;
  Vector column_means_;
  double y_mean_ = 0.0;
};

/// Optionally mean-centers X and y, then scales every column of X to unit
/// l2 norm. Throws ZeroColumn when a column vanishes.
StandardizedProblem standardize(const RawDataset& raw, bool center = true);

/// L_n(beta) = ||y - X beta||^2 / (2n).
double training_loss(const StandardizedProblem& problem, const Vector& beta);

/// ||y||^2 / (2n), the loss of the zero model.
double null_loss(const StandardizedProblem& problem);

}  // namespace stagewise
