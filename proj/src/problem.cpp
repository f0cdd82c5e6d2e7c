#include "stagewise/problem.hpp"

#include "stagewise/error.hpp"

#include <cmath>
#include <string>

namespace stagewise {

void validate(const RawDataset& raw) {
  if (raw.X.rows() < 1 || raw.X.cols() < 1) {
    throw Error(ErrorCode::InvalidArgument, "dataset needs n >= 1 and p >= 1");
  }
  if (raw.y.size() != raw.X.rows()) {
    throw Error(ErrorCode::InvalidArgument,
                "response length " + std::to_string(raw.y.size()) + " != row count " +
                    std::to_string(raw.X.rows()));
  }
  if (!raw.X.allFinite() || !raw.y.allFinite()) {
    throw Error(ErrorCode::NonFiniteInput, "dataset contains NaN or Inf");
  }
}

StandardizedProblem standardize(const RawDataset& raw, bool center) {
  validate(raw);
  const Eigen::Index n = raw.X.rows();
  const Eigen::Index p = raw.X.cols();

  StandardizedProblem out;
  out.X_ = raw.X;
  out.y_ = raw.y;
  out.centered_ = center;
  out.column_means_ = Vector::Zero(p);
  out.column_scales_.resize(p);

  if (center) {
    out.column_means_ = out.X_.colwise().mean().transpose();
    out.X_.rowwise() -= out.column_means_.transpose();
    out.y_mean_ = out.y_.mean();
    out.y_.array() -= out.y_mean_;
  }

  for (Eigen::Index j = 0; j < p; ++j) {
    const double norm = out.X_.col(j).norm();
    // A column whose norm is at roundoff level relative to its raw scale is
    // treated as identically zero (e.g. a constant column after centering).
    const double raw_scale = raw.X.col(j).cwiseAbs().maxCoeff();
    if (!(norm > 0.0) || norm <= 1e-13 * raw_scale * std::sqrt(static_cast<double>(n))) {
      throw Error(ErrorCode::ZeroColumn, "column " + std::to_string(j) + " is identically zero" +
                                             (center ? " after centering" : ""));
    }
    out.X_.col(j) /= norm;
    out.column_scales_(j) = norm;
  }
  return out;
}

Vector StandardizedProblem::to_raw_coefficients(const Vector& beta) const {
  return beta.cwiseQuotient(column_scales_);
}

double training_loss(const StandardizedProblem& problem, const Vector& beta) {
  return (problem.y() - problem.X() * beta).squaredNorm() / (2.0 * static_cast<double>(problem.n()));
}

double null_loss(const StandardizedProblem& problem) {
  return problem.y().squaredNorm() / (2.0 * static_cast<double>(problem.n()));
}

}  // namespace stagewise
