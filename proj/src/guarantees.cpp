#include "stagewise/guarantees.hpp"

#include "stagewise/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stagewise {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double dn(std::size_t v) { return static_cast<double>(v); }

// The bracket F^2 / (eps (k+1)) + eps shared by the FSe bounds.
double fse_bracket(const GuaranteeConstants& c, std::size_t k) {
  const double F2 = c.fitted_norm * c.fitted_norm;
  return F2 / (c.epsilon * dn(k + 1)) + c.epsilon;
}

void require_epsilon(const GuaranteeConstants& c, bool at_most_one) {
  if (!(c.epsilon > 0.0) || (at_most_one && c.epsilon > 1.0)) {
    throw Error(ErrorCode::EpsilonOutOfRange, "learning rate out of range for this bound");
  }
}

}  // namespace

double GuaranteeConstants::gamma() const {
  return 1.0 - epsilon * (2.0 - epsilon) * lambda_pmin / (4.0 * dn(p)) + gamma_shift;
}

GuaranteeConstants make_constants(const StandardizedProblem& problem, const SpectralSummary& summary,
                                  const LeastSquaresSolution& ls, double epsilon, double delta, bool use_y_norm) {
  GuaranteeConstants c;
  c.n = problem.n();
  c.p = problem.p();
  c.lambda_pmin = summary.lambda_pmin;
  c.fitted_norm = use_y_norm ? problem.y().norm() : ls.fitted_norm;
  c.loss_star = ls.loss_star;
  c.epsilon = epsilon;
  c.delta = delta;
  c.uses_y_norm = use_y_norm;
  return c;
}

LsBoostBounds lsboost_bounds(const GuaranteeConstants& c, std::size_t k, std::optional<double> observed_pred_dist) {
  require_epsilon(c, true);
  const double F = c.fitted_norm;
  const double g = c.gamma();
  // 1 - g^t through expm1 so that g close to 1 keeps its digits.
  const double log_g = std::log(g);
  const double one_minus_root_g = -std::expm1(0.5 * log_g);
  const double gk_half = std::pow(g, 0.5 * dn(k));
  const double eps = c.epsilon;

  LsBoostBounds b;
  b.k = k;
  b.train_gap = F * F * std::pow(g, dn(k)) / (2.0 * dn(c.n));
  b.coeff_dist = F * gk_half / std::sqrt(c.lambda_pmin);
  b.prediction_dist = F * gk_half;
  b.gradient = F * gk_half / dn(c.n);

  const double geometric = eps * F * -std::expm1(0.5 * dn(k) * log_g) / one_minus_root_g;
  b.lk = std::min(F * std::sqrt(dn(k) * eps / (2.0 - eps)), geometric);
  if (observed_pred_dist) {
    const double explained = std::max(F * F - *observed_pred_dist * *observed_pred_dist, 0.0);
    b.l1_shrink = std::min(std::sqrt(dn(k)) * std::sqrt(eps / (2.0 - eps)) * std::sqrt(explained), geometric);
  } else {
    b.l1_shrink = b.lk;
  }
  b.l1_shrink_alt = F * std::min(std::sqrt(dn(k) * eps), eps / one_minus_root_g);
  b.sparsity = k;
  return b;
}

FseBounds fse_bounds(const GuaranteeConstants& c, std::size_t k) {
  require_epsilon(c, false);
  const double B = fse_bracket(c, k);
  const double P = dn(c.p);
  const double lam = c.lambda_pmin;

  FseBounds b;
  b.k = k;
  b.train_gap = P / (2.0 * dn(c.n) * lam) * B * B;
  b.coeff_dist = std::sqrt(P) / lam * B;
  b.prediction_dist = std::sqrt(P) / std::sqrt(lam) * B;
  b.correlation = 0.5 * B;
  b.l1_shrink = dn(k) * c.epsilon;
  b.sparsity = k;
  return b;
}

double fse_tradeoff(const GuaranteeConstants& c, double sbound) {
  require_epsilon(c, false);
  const double bracket = c.fitted_norm * c.fitted_norm / (sbound + c.epsilon) + c.epsilon;
  return dn(c.p) / (2.0 * dn(c.n) * c.lambda_pmin) * bracket * bracket;
}

double fse_limit_loss(const GuaranteeConstants& c) {
  return c.loss_star + dn(c.p) * c.epsilon * c.epsilon / (2.0 * dn(c.n) * c.lambda_pmin);
}

double fse_best_epsilon(const GuaranteeConstants& c, std::size_t k) { return c.fitted_norm / std::sqrt(dn(k + 1)); }

RfsBounds rfs_bounds(const GuaranteeConstants& c, std::size_t k) {
  require_epsilon(c, false);
  if (!(c.delta >= c.epsilon) || !std::isfinite(c.delta)) {
    throw Error(ErrorCode::InvalidArgument, "R-FS bounds need a finite delta >= eps");
  }
  const double F2 = c.fitted_norm * c.fitted_norm;
  const double eps = c.epsilon;
  const double delta = c.delta;

  RfsBounds b;
  b.k = k;
  b.train_gap = delta / dn(c.n) * (F2 / (2.0 * eps * dn(k + 1)) + 2.0 * eps);
  b.prediction_dist = std::sqrt(delta * F2 / (eps * dn(k + 1)) + 4.0 * delta * eps);
  b.l1_shrink = -delta * std::expm1(dn(k) * std::log1p(-eps / delta));
  b.sparsity = k;
  return b;
}

double path_bound(const GuaranteeConstants& c, const std::vector<double>& delta_grid, std::size_t k) {
  require_epsilon(c, false);
  if (delta_grid.empty()) throw Error(ErrorCode::GridTooShort, "path bound needs a nonempty grid");
  const double delta_bar = delta_grid.back();
  const double F2 = c.fitted_norm * c.fitted_norm;
  return delta_bar * F2 / (2.0 * dn(c.n) * c.epsilon * dn(k + 1)) + 2.0 * delta_bar * c.epsilon / dn(c.n);
}

LsBoostExtraBounds lsboost_extra_bounds(const GuaranteeConstants& c, const LeastSquaresSolution& ls,
                                        const BoostTrace& trace, std::size_t k) {
  require_epsilon(c, true);
  if (trace.config.variant != Variant::LSBoost) {
    throw Error(ErrorCode::InvalidArgument, "extra bounds apply to LS-Boost traces only");
  }
  if (k + 1 >= trace.records.size() || trace.records[k + 1].beta.size() == 0) {
    throw Error(ErrorCode::InvalidArgument, "trace must hold stored vectors through iteration k+1");
  }
  const Vector& X_ls = ls.fitted;
  const double eps = c.epsilon;
  const double F2 = c.fitted_norm * c.fitted_norm;
  auto remaining = [&](std::size_t i) {
    // ||X beta_ls - X beta^i||^2 via the residuals: r^i - r_ls.
    const Vector& y = trace.records[0].resid;
    const Vector diff = trace.records[i].resid - (y - X_ls);
    return std::max(F2 - diff.squaredNorm(), 0.0);
  };

  LsBoostExtraBounds b;
  b.k = k;
  const double first = std::sqrt(remaining(k + 1)) / (dn(c.n) * std::sqrt(eps * (2.0 - eps) * dn(k + 1)));
  const double second = c.fitted_norm * std::pow(c.gamma(), 0.5 * dn(k)) / dn(c.n);
  b.gradient = std::min(first, second);

  const auto counts = trace.visit_counts(k);
  b.j_max = counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
  b.l2_shrink = std::sqrt(dn(b.j_max)) * std::sqrt(eps / (2.0 - eps)) * std::sqrt(remaining(k));
  return b;
}

double eta_continuous(double tau) {
  const double t2 = tau * tau;
  return t2 * std::log(1.0 / t2);
}

double vartheta_continuous(double tau) { return tau * std::sqrt(std::log(1.0 / (tau * tau))); }

EfficiencyReport efficiency(const GuaranteeConstants& c, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) throw Error(ErrorCode::InvalidArgument, "tau must lie in (0, 1]");
  const double kappa4 = 4.0 * dn(c.p) / c.lambda_pmin;
  const double F = c.fitted_norm;

  EfficiencyReport r;
  r.tau = tau;
  r.k_lsboost = static_cast<std::size_t>(std::ceil(kappa4 * std::log(1.0 / (tau * tau))));
  r.k_fse = static_cast<std::size_t>(std::ceil(kappa4 / (tau * tau))) - 1;
  r.epsilon_fse = F / std::sqrt(dn(r.k_fse + 1));
  r.eta = dn(r.k_lsboost) / dn(r.k_fse);
  r.sbound_lsboost = F * std::sqrt(dn(r.k_lsboost));
  r.sbound_fse = r.epsilon_fse * dn(r.k_fse);
  r.vartheta = r.sbound_fse > 0.0 ? r.sbound_lsboost / r.sbound_fse : 0.0;
  r.eta_continuous = eta_continuous(tau);
  r.vartheta_continuous = vartheta_continuous(tau);
  return r;
}

std::vector<SandwichRow> sandwich(const GuaranteeConstants& c, const std::vector<double>& lasso_at_lk) {
  std::vector<SandwichRow> rows;
  rows.reserve(lasso_at_lk.size());
  for (std::size_t k = 0; k < lasso_at_lk.size(); ++k) {
    const LsBoostBounds b = lsboost_bounds(c, k);
    rows.push_back({k, b.lk, lasso_at_lk[k], b.train_gap + c.loss_star});
  }
  return rows;
}

std::vector<SandwichRow> sandwich(const StandardizedProblem& problem, const GuaranteeConstants& c, std::size_t K,
                                  double tol) {
  std::vector<double> lower;
  lower.reserve(K + 1);
  LassoOptions options;
  options.tol = tol;
  for (std::size_t k = 0; k <= K; ++k) {
    const double lk = lsboost_bounds(c, k).lk;
    if (!(lk > 0.0)) {
      lower.push_back(null_loss(problem));
      continue;
    }
    const LassoSolution sol = solve_lasso(problem, lk, options);
    options.start = sol.beta_star;
    lower.push_back(sol.loss_star_delta);
  }
  return sandwich(c, lower);
}

GuaranteeProfile guarantee_profile(Variant variant, const GuaranteeConstants& c, std::size_t K,
                                   const std::vector<double>& delta_grid, const std::vector<double>& lasso_at_lk) {
  GuaranteeProfile profile;
  profile.variant = variant;
  profile.constants = c;
  profile.rows.reserve(K + 1);
  for (std::size_t k = 0; k <= K; ++k) {
    GuaranteeRow row{k, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN};
    switch (variant) {
      case Variant::LSBoost: {
        const LsBoostBounds b = lsboost_bounds(c, k);
        row.train_error_bound = b.train_gap;
        row.coeff_dist_bound = b.coeff_dist;
        row.prediction_dist_bound = b.prediction_dist;
        row.gradient_bound = b.gradient;
        row.l1_shrink_bound = b.l1_shrink;
        row.lk_estimate = b.lk;
        row.upper_sandwich = b.train_gap + c.loss_star;
        if (k < lasso_at_lk.size()) row.lower_sandwich = lasso_at_lk[k];
        break;
      }
      case Variant::FSe: {
        const FseBounds b = fse_bounds(c, k);
        row.train_error_bound = b.train_gap;
        row.coeff_dist_bound = b.coeff_dist;
        row.prediction_dist_bound = b.prediction_dist;
        row.gradient_bound = b.correlation / dn(c.n);
        row.l1_shrink_bound = b.l1_shrink;
        break;
      }
      case Variant::RFS: {
        const RfsBounds b = rfs_bounds(c, k);
        row.train_error_bound = b.train_gap;
        row.prediction_dist_bound = b.prediction_dist;
        row.l1_shrink_bound = b.l1_shrink;
        break;
      }
      case Variant::PathRFS:
        row.train_error_bound = path_bound(c, delta_grid, k);
        row.l1_shrink_bound = delta_grid[std::min(k, delta_grid.size() - 1)];
        break;
      case Variant::FSek:
        break;  // no a priori bounds for an arbitrary schedule
    }
    profile.rows.push_back(row);
  }
  return profile;
}

}  // namespace stagewise
