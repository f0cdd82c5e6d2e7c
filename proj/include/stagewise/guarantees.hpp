#pragma once

#include "stagewise/boosters.hpp"
#include "stagewise/oracles.hpp"
#include "stagewise/spectral.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace stagewise {

/// Data characteristics every a priori bound is built from.
struct GuaranteeConstants {
  std::size_t n = 0;
  std::size_t p = 0;
  double lambda_pmin = 0.0;
  /// ||X beta_ls||_2, or ||y||_2 when use_y_norm was requested.
  double fitted_norm = 0.0;
  double loss_star = 0.0;
  double epsilon = 0.0;
  double delta = kUnboundedDelta;
  bool uses_y_norm = false;
  /// Added to gamma(). Only the verifier's negative control sets this.
  double gamma_shift = 0.0;

  /// 1 - eps (2 - eps) lambda_pmin / (4p); only meaningful for 0 < eps <= 1.
  double gamma() const;
};

/// ||y||_2 is a valid (looser) stand-in for ||X beta_ls||_2 in every bound.
GuaranteeConstants make_constants(const StandardizedProblem& problem, const SpectralSummary& summary,
                                  const LeastSquaresSolution& ls, double epsilon,
                                  double delta = kUnboundedDelta, bool use_y_norm = false);

/// LS-Boost(eps) after k iterations.
struct LsBoostBounds {
  std::size_t k = 0;
  /// L_n(beta^k) - L_n^*.
  double train_gap = 0.0;
  /// Distance from beta^k to the set of least-squares solutions.
  double coeff_dist = 0.0;
  /// ||X beta^k - X beta_ls||_2.
  double prediction_dist = 0.0;
  /// ||grad L_n(beta^k)||_inf = ||X^T r^k||_inf / n.
  double gradient = 0.0;
  /// ||beta^k||_1. Uses the observed prediction distance when supplied,
  /// otherwise coincides with lk.
  double l1_shrink = 0.0;
  /// F min{ sqrt(k eps), eps / (1 - sqrt(gamma)) }.
  double l1_shrink_alt = 0.0;
  /// min{ F sqrt(k eps / (2 - eps)), eps F (1 - gamma^{k/2}) / (1 - sqrt(gamma)) }.
  double lk = 0.0;
  /// ||beta^k||_0.
  std::size_t sparsity = 0;
};

/// `observed_pred_dist` is ||X beta_ls - X beta^k||_2 from an actual run;
/// it sharpens the first shrinkage term.
LsBoostBounds lsboost_bounds(const GuaranteeConstants& c, std::size_t k,
                             std::optional<double> observed_pred_dist = std::nullopt);

/// FSe: each bound holds for some i <= k, i.e. for the running minimum.
struct FseBounds {
  std::size_t k = 0;
  double train_gap = 0.0;
  double coeff_dist = 0.0;
  double prediction_dist = 0.0;
  /// ||X^T r^i||_inf (no 1/n factor).
  double correlation = 0.0;
  /// ||beta^i||_1 <= k eps.
  double l1_shrink = 0.0;
  std::size_t sparsity = 0;
};

FseBounds fse_bounds(const GuaranteeConstants& c, std::size_t k);

/// Training-error bound expressed through the shrinkage bound:
/// p / (2 n lambda_pmin) [F^2 / (sbound + eps) + eps]^2.
double fse_tradeoff(const GuaranteeConstants& c, double sbound);
/// Training-error level the FSe bound approaches as k grows:
/// L_n^* + p eps^2 / (2 n lambda_pmin). Reported as an absolute loss.
double fse_limit_loss(const GuaranteeConstants& c);
/// Learning rate minimizing the FSe training bound for a fixed k:
/// F / sqrt(k + 1).
double fse_best_epsilon(const GuaranteeConstants& c, std::size_t k);

/// R-FS(eps, delta). (i) and (ii) hold for some i <= k; (iii) for every k.
struct RfsBounds {
  std::size_t k = 0;
  /// L_n(beta^i) - L*_{n,delta}.
  double train_gap = 0.0;
  /// ||X beta^i - X beta*_delta||_2.
  double prediction_dist = 0.0;
  double l1_shrink = 0.0;
  std::size_t sparsity = 0;
};

RfsBounds rfs_bounds(const GuaranteeConstants& c, std::size_t k);

/// Bound on (1/(k+1)) sum_{i<=k} (L_n(beta^i) - L*_{n,delta_i}) for the path
/// variant, with delta_bar the last grid value.
double path_bound(const GuaranteeConstants& c, const std::vector<double>& delta_grid, std::size_t k);

/// Gradient and l2-shrinkage bounds for LS-Boost that need quantities from
/// an actual trace.
struct LsBoostExtraBounds {
  std::size_t k = 0;
  /// Bound on min_{i<=k} ||X^T r^i||_inf / n.
  double gradient = 0.0;
  /// Bound on ||beta^k||_2.
  double l2_shrink = 0.0;
  std::size_t j_max = 0;
};

/// Needs records k and k+1 with stored vectors; throws InvalidArgument
/// otherwise or when the trace is not LS-Boost.
LsBoostExtraBounds lsboost_extra_bounds(const GuaranteeConstants& c, const LeastSquaresSolution& ls,
                                        const BoostTrace& trace, std::size_t k);

struct EfficiencyReport {
  double tau = 0.0;
  /// ceil((4p / lambda_pmin) ln(1/tau^2)).
  std::size_t k_lsboost = 0;
  /// ceil((4p / lambda_pmin) / tau^2) - 1.
  std::size_t k_fse = 0;
  /// F / sqrt(k_fse + 1).
  double epsilon_fse = 0.0;
  double eta = 0.0;
  /// F sqrt(k_lsboost).
  double sbound_lsboost = 0.0;
  /// eps_fse k_fse.
  double sbound_fse = 0.0;
  double vartheta = 0.0;
  /// tau^2 ln(1/tau^2) and tau sqrt(ln(1/tau^2)).
  double eta_continuous = 0.0;
  double vartheta_continuous = 0.0;
};

/// Throws InvalidArgument unless 0 < tau <= 1.
EfficiencyReport efficiency(const GuaranteeConstants& c, double tau);
double eta_continuous(double tau);
double vartheta_continuous(double tau);

/// Lower and upper envelopes for the LS-Boost training error at step k.
struct SandwichRow {
  std::size_t k = 0;
  double lk = 0.0;
  /// L*_{n, lk}.
  double lower = 0.0;
  /// F^2 gamma^k / (2n) + L_n^*.
  double upper = 0.0;
};

/// `lasso_at_lk[k]` is L*_{n, lk} for lk = lsboost_bounds(c, k).lk. A zero
/// budget gives the null loss, which the caller supplies the same way.
std::vector<SandwichRow> sandwich(const GuaranteeConstants& c, const std::vector<double>& lasso_at_lk);

/// Evaluates the Lasso oracle at every lk for k = 0..K (warm-started) and
/// returns the sandwich rows.
std::vector<SandwichRow> sandwich(const StandardizedProblem& problem, const GuaranteeConstants& c, std::size_t K,
                                  double tol = 1e-8);

/// One row per iteration for one algorithm run: every bound that applies
/// to the variant, NaN where a bound does not apply.
struct GuaranteeRow {
  std::size_t k = 0;
  double train_error_bound = 0.0;
  double coeff_dist_bound = 0.0;
  double prediction_dist_bound = 0.0;
  double gradient_bound = 0.0;
  double l1_shrink_bound = 0.0;
  double lk_estimate = 0.0;
  double lower_sandwich = 0.0;
  double upper_sandwich = 0.0;
};

struct GuaranteeProfile {
  Variant variant = Variant::LSBoost;
  GuaranteeConstants constants;
  std::vector<GuaranteeRow> rows;
};

/// A priori profile for k = 0..K. The training-error column bounds the gap
/// to the variant's optimum (L_n^*, L*_{n,delta}, or the path average); the
/// sandwich columns are absolute losses. Sandwich columns
/// are filled for LS-Boost only when `lasso_at_lk` is given. PathRFS needs
/// the grid.
GuaranteeProfile guarantee_profile(Variant variant, const GuaranteeConstants& c, std::size_t K,
                                   const std::vector<double>& delta_grid = {},
                                   const std::vector<double>& lasso_at_lk = {});

}  // namespace stagewise
