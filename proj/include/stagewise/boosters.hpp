#pragma once

#include "stagewise/problem.hpp"

#include <cstddef>
#include <limits>
#include <string_view>
#include <vector>

namespace stagewise {

enum class Variant {
  LSBoost,  // LS-Boost(eps): least-squares step on the selected column, shrunk by eps
  FSe,      // incremental forward stagewise, fixed step eps
  FSek,     // forward stagewise with a per-iteration step schedule
  RFS,      // regularized forward stagewise R-FS(eps, delta)
  PathRFS,  // R-FS with a nondecreasing delta per iteration
};

std::string_view to_string(Variant v);
/// Accepts the names printed by to_string (case-insensitive) plus a few aliases.
Variant parse_variant(std::string_view name);

inline constexpr double kUnboundedDelta = std::numeric_limits<double>::infinity();

struct AlgorithmConfig {
  Variant variant = Variant::LSBoost;
  double epsilon = 1.0;
  /// FSek only: epsilon_schedule[k] is the step used at iteration k.
  std::vector<double> epsilon_schedule;
  /// RFS only; +infinity turns R-FS into plain FSe.
  double delta = kUnboundedDelta;
  /// PathRFS only: delta_grid[k] is used at iteration k.
  std::vector<double> delta_grid;
  /// When the grid is shorter than max_iters, keep using its last value.
  /// With this off a short grid is rejected with GridTooShort.
  bool clamp_grid = true;
  std::size_t max_iters = 100;
  /// Stop once ||X^T r||_inf <= stop_tolerance. 0 runs all iterations
  /// unless an exact fixed point is hit.
  double stop_tolerance = 0.0;
  /// Keep beta^k and r^k in every record. Turn off for very long runs.
  bool store_vectors = true;

  void validate() const;
};

/// Column most correlated with the residual. Ties go to the smallest index.
struct Selection {
  std::size_t index = 0;
  /// Signed r^T X_j at the selected column.
  double correlation = 0.0;
};

Selection select_column(const Vector& resid, const Matrix& X);

/// sgn with sgn(0) = 0.
inline int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

/// Coefficients and residuals after k updates. Residuals are carried
/// separately and updated incrementally, never recomputed from beta.
struct BoostState {
  Vector beta;
  Vector resid;
  std::size_t k = 0;
};

/// beta = 0, r = y.
BoostState initial_state(const StandardizedProblem& problem);

BoostState step_lsboost(const StandardizedProblem& problem, const BoostState& state, double epsilon);
BoostState step_fse(const StandardizedProblem& problem, const BoostState& state, double epsilon);
BoostState step_fsek(const StandardizedProblem& problem, const BoostState& state, double epsilon_k);
BoostState step_rfs(const StandardizedProblem& problem, const BoostState& state, double epsilon, double delta);

/// Magnitude threshold used when counting nonzero coefficients.
inline constexpr double kSparsityThreshold = 1e-5;

/// State at iteration k together with the selection made from it.
struct IterationRecord {
  std::size_t k = 0;
  std::size_t j = 0;
  int sign = 0;
  /// Signed r^k^T X_{j_k}.
  double correlation = 0.0;
  /// Additive increment applied to beta_{j_k} at iteration k; 0 on the
  /// final record, where no step was taken.
  double step = 0.0;
  /// Learning rate and regularization value in force at iteration k.
  double epsilon = 0.0;
  double delta = kUnboundedDelta;
  double train_error = 0.0;
  double l1_norm = 0.0;
  std::size_t l0_norm = 0;
  /// ||X^T r^k||_inf.
  double inf_corr = 0.0;
  /// Empty unless AlgorithmConfig::store_vectors.
  Vector beta;
  Vector resid;
};

struct BoostTrace {
  AlgorithmConfig config;
  std::size_t p = 0;
  /// records[k] for k = 0..K, records[0] being the initial state.
  std::vector<IterationRecord> records;
  /// True when the run ended on the stop tolerance or an exact fixed point
  /// rather than the iteration budget.
  bool converged = false;

  std::size_t iterations() const { return records.empty() ? 0 : records.size() - 1; }
  /// Number of steps taken in each coordinate during the first k iterations.
  std::vector<std::size_t> visit_counts(std::size_t k) const;
};

/// Runs the configured variant for max_iters iterations or until the stop
/// tolerance is met. Throws on invalid configurations.
BoostTrace run(const StandardizedProblem& problem, const AlgorithmConfig& config);

/// PathRFS driver; `run` dispatches here for Variant::PathRFS.
BoostTrace run_path(const StandardizedProblem& problem, const AlgorithmConfig& config);

}  // namespace stagewise
