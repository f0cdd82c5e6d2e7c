#include "stagewise/error.hpp"
#include "stagewise/guarantees.hpp"
#include "stagewise/harness.hpp"
#include "stagewise/oracles.hpp"
#include "stagewise/spectral.hpp"
#include "stagewise/subgrad.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

// The invariant suite behind `verify`: every guarantee checked on
// a handful of seeded instances, grouped into families.

namespace stagewise {
namespace {

using nlohmann::json;

class Family {
 public:
  explicit Family(std::string name) { r_.name = std::move(name); }

  // observed <= bound up to rel * |bound| + abs.
  void check(double observed, double bound, double rel = 1e-9, double abs = 1e-12) {
    ++r_.checks;
    const double slack = bound - observed;
    r_.max_violation = std::max(r_.max_violation, -slack);
    r_.min_slack = std::min(r_.min_slack, slack);
    r_.max_slack = std::max(r_.max_slack, slack);
    if (!(observed <= bound + rel * std::abs(bound) + abs)) r_.passed = false;
  }
  void merge(const Family& other) {
    r_.checks += other.r_.checks;
    r_.passed = r_.passed && other.r_.passed;
    r_.max_violation = std::max(r_.max_violation, other.r_.max_violation);
    r_.min_slack = std::min(r_.min_slack, other.r_.min_slack);
    r_.max_slack = std::max(r_.max_slack, other.r_.max_slack);
  }
  const FamilyResult& result() const { return r_; }

 private:
  FamilyResult r_;
};

enum FamilyId {
  kConsistency,
  kContraction,
  kLsBoost,
  kLsBoostExtra,
  kFse,
  kRfs,
  kPath,
  kEquivalence,
  kDuality,
  kEfficiency,
  kFamilyCount
};

const char* kFamilyNames[kFamilyCount] = {
    "trace_consistency", "lsboost_contraction", "lsboost_bounds_check", "lsboost_extra",       "fse_bounds_check",
    "rfs_bounds_check",  "path_bound_check",    "subgrad_equivalence",  "duality",             "efficiency"};

struct Instance {
  StandardizedProblem problem;
  SpectralDecomposition factors;
  LeastSquaresSolution ls;
};

Instance make_instance(const VerifyOptions& opt, std::size_t index) {
  const std::size_t p = index % 2 == 0 ? 12 : 60;
  const double rho = index % 3 == 0 ? 0.0 : 0.5;
  SyntheticSpec spec = example_a(30, p, rho, 2.0, opt.seed * 1000 + index);
  StandardizedProblem problem = standardize(generate_synthetic(spec).data);
  SpectralDecomposition factors = decompose(problem);
  LeastSquaresSolution ls = solve_least_squares(problem, factors);
  return {std::move(problem), std::move(factors), std::move(ls)};
}

double max_abs_diff(const Vector& a, const Vector& b) { return (a - b).lpNorm<Eigen::Infinity>(); }

void check_consistency(Family& f, const StandardizedProblem& pr, const BoostTrace& t) {
  for (const IterationRecord& r : t.records) {
    f.check(max_abs_diff(pr.y() - pr.X() * r.beta, r.resid), 1e-10, 0.0, 0.0);
  }
}

void run_instance(const VerifyOptions& opt, const Instance& inst, std::vector<Family>& fam) {
  const StandardizedProblem& pr = inst.problem;
  const LeastSquaresSolution& ls = inst.ls;
  const double n = static_cast<double>(pr.n());
  const std::size_t M = opt.iterations;
  const Vector r_ls = pr.y() - ls.fitted;

  // LS-Boost
  for (double eps : {0.1, 1.0}) {
    AlgorithmConfig a;
    a.variant = Variant::LSBoost;
    a.epsilon = eps;
    a.max_iters = M;
    const BoostTrace t = run(pr, a);
    check_consistency(fam[kConsistency], pr, t);
    GuaranteeConstants c = make_constants(pr, inst.factors.summary, ls, eps);
    c.gamma_shift = opt.gamma_shift;
    const double g = c.gamma();
    for (std::size_t k = 0; k < t.records.size(); ++k) {
      const IterationRecord& r = t.records[k];
      const double gap = r.train_error - ls.loss_star;
      if (k + 1 < t.records.size()) {
        fam[kContraction].check(t.records[k + 1].train_error - ls.loss_star, g * gap, 0.0, 1e-12);
      }
      const double pred = (r.resid - r_ls).norm();
      const LsBoostBounds b = lsboost_bounds(c, k, pred);
      Family& F = fam[kLsBoost];
      F.check(gap, b.train_gap, 1e-9, 1e-12 * ls.fitted_norm * ls.fitted_norm);
      F.check(distance_to_ls_set(pr, inst.factors, ls, r.beta), b.coeff_dist, 1e-9, 1e-10);
      F.check(pred, b.prediction_dist, 1e-9, 1e-10);
      F.check(r.inf_corr / n, b.gradient, 1e-9, 1e-12);
      F.check(r.l1_norm, b.l1_shrink, 1e-9, 1e-10);
      F.check(static_cast<double>(r.l0_norm), static_cast<double>(k), 0.0, 0.0);
      if (k + 1 < t.records.size()) {
        const LsBoostExtraBounds e = lsboost_extra_bounds(c, ls, t, k);
        double min_grad = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i <= k; ++i) min_grad = std::min(min_grad, t.records[i].inf_corr / n);
        fam[kLsBoostExtra].check(min_grad, e.gradient, 1e-9, 1e-12);
        fam[kLsBoostExtra].check(r.beta.norm(), e.l2_shrink, 1e-9, 1e-10);
      }
    }
    // LS-Boost as CM descent with correlation-scaled steps.
    const auto states = descend(ResidualObjective::cm(pr), correlation_scaled_step(pr, eps), M);
    for (std::size_t k = 0; k < states.size(); ++k) {
      fam[kEquivalence].check(max_abs_diff(states[k].r, t.records[k].resid), 1e-12, 0.0, 0.0);
      fam[kEquivalence].check(max_abs_diff(states[k].beta_shadow, t.records[k].beta), 1e-12, 0.0, 0.0);
    }
  }

  // FSe
  for (double eps : {0.01, 0.1}) {
    AlgorithmConfig a;
    a.variant = Variant::FSe;
    a.epsilon = eps;
    a.max_iters = M;
    const BoostTrace t = run(pr, a);
    check_consistency(fam[kConsistency], pr, t);
    const GuaranteeConstants c = make_constants(pr, inst.factors.summary, ls, eps);
    double best_gap = std::numeric_limits<double>::infinity(), best_dist = best_gap, best_pred = best_gap,
           best_corr = best_gap;
    for (std::size_t k = 0; k < t.records.size(); ++k) {
      const IterationRecord& r = t.records[k];
      best_gap = std::min(best_gap, r.train_error - ls.loss_star);
      best_dist = std::min(best_dist, distance_to_ls_set(pr, inst.factors, ls, r.beta));
      best_pred = std::min(best_pred, (r.resid - r_ls).norm());
      best_corr = std::min(best_corr, r.inf_corr);
      const FseBounds b = fse_bounds(c, k);
      Family& F = fam[kFse];
      F.check(best_gap, b.train_gap);
      F.check(best_dist, b.coeff_dist);
      F.check(best_pred, b.prediction_dist);
      F.check(best_corr, b.correlation);
      F.check(r.l1_norm, b.l1_shrink, 0.0, 1e-12);
      F.check(static_cast<double>(r.l0_norm), static_cast<double>(k), 0.0, 0.0);
    }
    const auto states = descend(ResidualObjective::cm(pr), constant_step(eps), M);
    for (std::size_t k = 0; k < states.size(); ++k) {
      fam[kEquivalence].check(max_abs_diff(states[k].r, t.records[k].resid), 1e-12, 0.0, 0.0);
    }
  }

  // R-FS against the Lasso oracle.
  const double dmax = compute_delta_max(pr).value;
  LassoOptions lopt;
  lopt.tol = opt.oracle_tol;
  for (double frac : {0.2, 0.6}) {
    const double delta = frac * dmax;
    const LassoSolution lasso = solve_lasso(pr, delta, lopt);
    // Conservative optimum: the certified lower bound on L*_{n,delta}.
    const double lstar = lasso.loss_star_delta - lasso.certificate.gap_bound;
    const double strong = lasso.certificate.primal_value + delta / n * lasso.certificate.dual_value - null_loss(pr);
    fam[kDuality].check(std::abs(strong - lasso.certificate.gap_bound), 1e-10, 0.0, 0.0);
    fam[kDuality].check(std::abs(strong), 1e-6, 0.0, 0.0);

    for (double eps : {0.01, 0.05}) {
      const double e = std::min(eps, delta);
      AlgorithmConfig a;
      a.variant = Variant::RFS;
      a.epsilon = e;
      a.delta = delta;
      a.max_iters = M;
      const BoostTrace t = run(pr, a);
      check_consistency(fam[kConsistency], pr, t);
      const GuaranteeConstants c = make_constants(pr, inst.factors.summary, ls, e, delta);
      double best_gap = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < t.records.size(); ++k) {
        const IterationRecord& r = t.records[k];
        best_gap = std::min(best_gap, r.train_error - lstar);
        const RfsBounds b = rfs_bounds(c, k);
        fam[kRfs].check(best_gap, b.train_gap);
        fam[kRfs].check(r.l1_norm, b.l1_shrink, 0.0, 1e-10);
        fam[kRfs].check(b.l1_shrink, delta, 0.0, 0.0);
        const DualCertificate cert = certify(pr, r.beta, delta);
        fam[kDuality].check(-cert.omega, 1e-12, 0.0, 0.0);
        fam[kDuality].check(r.train_error - lasso.loss_star_delta, cert.gap_bound, 0.0, 1e-9);
      }
      const auto states = descend(ResidualObjective::rcm(pr, delta), constant_step(e), M);
      for (std::size_t k = 0; k < states.size(); ++k) {
        fam[kEquivalence].check(max_abs_diff(states[k].r, t.records[k].resid), 1e-12, 0.0, 0.0);
        fam[kEquivalence].check(max_abs_diff(states[k].beta_shadow, t.records[k].beta), 1e-12, 0.0, 0.0);
      }
    }
  }

  // PATH-R-FS on a geometric grid, each value held for a block of iterations.
  {
    const std::size_t points = 8;
    const std::size_t hold = std::max<std::size_t>(1, M / points);
    std::vector<double> distinct(points), grid;
    for (std::size_t i = 0; i < points; ++i) {
      distinct[i] = dmax * std::pow(0.02, 1.0 - static_cast<double>(i) / static_cast<double>(points - 1));
    }
    for (double d : distinct) grid.insert(grid.end(), hold, d);
    std::vector<double> optimum(points);
    for (std::size_t i = 0; i < points; ++i) {
      const LassoSolution s = solve_lasso(pr, distinct[i], lopt);
      optimum[i] = s.loss_star_delta - s.certificate.gap_bound;
    }
    const double eps = std::min(0.01, distinct.front());
    AlgorithmConfig a;
    a.variant = Variant::PathRFS;
    a.epsilon = eps;
    a.delta_grid = grid;
    a.max_iters = grid.size();
    const BoostTrace t = run(pr, a);
    check_consistency(fam[kConsistency], pr, t);
    const GuaranteeConstants c = make_constants(pr, inst.factors.summary, ls, eps);
    double sum = 0.0;
    for (std::size_t k = 0; k < t.records.size(); ++k) {
      const IterationRecord& r = t.records[k];
      sum += r.train_error - optimum[std::min(k / hold, points - 1)];
      fam[kPath].check(sum / static_cast<double>(k + 1), path_bound(c, grid, k));
      fam[kPath].check(r.l1_norm, r.delta, 1e-10, 0.0);
    }
  }

  // Weak duality at random feasible beta and random residuals in P_res.
  Rng rng(opt.seed + 77);
  for (int trial = 0; trial < 10; ++trial) {
    const double delta = (0.1 + rng.uniform()) * dmax;
    Vector beta(pr.p());
    for (Eigen::Index j = 0; j < beta.size(); ++j) beta(j) = rng.normal();
    beta = project_l1_ball(beta, delta);
    Vector other(pr.p());
    for (Eigen::Index j = 0; j < other.size(); ++j) other(j) = rng.normal();
    const Vector r_tilde = pr.y() - pr.X() * other;
    const double lhs = training_loss(pr, beta) + delta / n * evaluate(ResidualObjective::rcm(pr, delta), r_tilde);
    fam[kDuality].check(null_loss(pr), lhs, 0.0, 1e-10);
  }
}

}  // namespace

bool VerifyReport::passed() const {
  return std::all_of(families.begin(), families.end(), [](const FamilyResult& f) { return f.passed; });
}

json VerifyReport::to_json() const {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json j;
  j["passed"] = passed();
  j["gamma_shift"] = gamma_shift;
  j["families"] = json::array();
  for (const FamilyResult& f : families) {
    j["families"].push_back({{"name", f.name},
                             {"passed", f.passed},
                             {"checks", f.checks},
                             {"max_violation", num(f.max_violation)},
                             {"min_slack", num(f.min_slack)},
                             {"max_slack", num(f.max_slack)}});
  }
  return j;
}

VerifyReport cmd_verify(const VerifyOptions& options) {
  if (options.instances == 0 || options.iterations == 0) {
    throw Error(ErrorCode::InvalidArgument, "verify needs at least one instance and one iteration");
  }
  std::vector<Family> totals;
  for (const char* name : kFamilyNames) totals.emplace_back(name);
  std::mutex merge_mutex;

  parallel_for(options.instances, options.threads, [&](std::size_t i) {
    std::vector<Family> local;
    for (const char* name : kFamilyNames) local.emplace_back(name);
    run_instance(options, make_instance(options, i), local);
    std::lock_guard lock(merge_mutex);
    for (std::size_t f = 0; f < totals.size(); ++f) totals[f].merge(local[f]);
  });

  // Closed-form efficiency ratios on a tau grid.
  Family& eff = totals[kEfficiency];
  for (int i = 1; i <= 100; ++i) {
    const double tau = i / 100.0;
    eff.check(eta_continuous(tau), std::exp(-1.0), 0.0, 1e-15);
    eff.check(vartheta_continuous(tau), std::exp(-0.5), 0.0, 1e-15);
  }

  VerifyReport report;
  report.gamma_shift = options.gamma_shift;
  for (const Family& f : totals) report.families.push_back(f.result());
  return report;
}

}  // namespace stagewise
