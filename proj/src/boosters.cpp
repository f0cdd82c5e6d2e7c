#include "stagewise/boosters.hpp"

#include "stagewise/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

namespace stagewise {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::LSBoost: return "lsboost";
    case Variant::FSe: return "fse";
    case Variant::FSek: return "fsek";
    case Variant::RFS: return "rfs";
    case Variant::PathRFS: return "path-rfs";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  std::string key;
  for (char c : name) {
    if (c != '-' && c != '_') key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (key == "lsboost" || key == "ls") return Variant::LSBoost;
  if (key == "fse" || key == "fs") return Variant::FSe;
  if (key == "fsek") return Variant::FSek;
  if (key == "rfs") return Variant::RFS;
  if (key == "pathrfs" || key == "path") return Variant::PathRFS;
  throw Error(ErrorCode::InvalidArgument, "unknown algorithm '" + std::string(name) +
                                              "' (expected lsboost, fse, fsek, rfs or path-rfs)");
}

void AlgorithmConfig::validate() const {
  auto fail = [](ErrorCode code, const std::string& msg) { throw Error(code, msg); };
  if (variant != Variant::FSek && !(epsilon > 0.0 && std::isfinite(epsilon))) {
    fail(ErrorCode::EpsilonOutOfRange, "learning rate must be positive and finite");
  }
  switch (variant) {
    case Variant::LSBoost:
      if (epsilon > 1.0) fail(ErrorCode::EpsilonOutOfRange, "LS-Boost needs 0 < eps <= 1");
      break;
    case Variant::FSe:
      break;
    case Variant::FSek:
      if (epsilon_schedule.size() < max_iters) {
        fail(ErrorCode::InvalidArgument, "FSek schedule has " + std::to_string(epsilon_schedule.size()) +
                                             " entries but max_iters is " + std::to_string(max_iters));
      }
      for (double e : epsilon_schedule) {
        if (!(e >= 0.0) || !std::isfinite(e)) fail(ErrorCode::EpsilonOutOfRange, "FSek steps must be >= 0");
      }
      break;
    case Variant::RFS:
      if (!(delta > 0.0)) fail(ErrorCode::InvalidArgument, "R-FS needs delta > 0");
      if (epsilon > delta) fail(ErrorCode::InvalidArgument, "R-FS needs eps <= delta");
      break;
    case Variant::PathRFS:
      if (delta_grid.empty()) fail(ErrorCode::GridTooShort, "PATH-R-FS needs a nonempty delta grid");
      if (!clamp_grid && delta_grid.size() < max_iters) {
        fail(ErrorCode::GridTooShort, "delta grid has " + std::to_string(delta_grid.size()) +
                                          " values for " + std::to_string(max_iters) + " iterations");
      }
      if (!(delta_grid.front() > 0.0)) fail(ErrorCode::InvalidArgument, "delta grid must be positive");
      if (epsilon > delta_grid.front()) fail(ErrorCode::InvalidArgument, "PATH-R-FS needs eps <= delta_grid[0]");
      for (std::size_t i = 1; i < delta_grid.size(); ++i) {
        if (!(delta_grid[i] >= delta_grid[i - 1])) {
          fail(ErrorCode::InvalidArgument, "delta grid must be nondecreasing");
        }
      }
      break;
  }
  if (!(stop_tolerance >= 0.0)) fail(ErrorCode::InvalidArgument, "stop tolerance must be >= 0");
}

namespace {

Selection argmax_abs(const Vector& correlations) {
  Selection best;
  double best_abs = -1.0;
  for (Eigen::Index j = 0; j < correlations.size(); ++j) {
    const double a = std::abs(correlations(j));
    if (a > best_abs) {
      best_abs = a;
      best.index = static_cast<std::size_t>(j);
      best.correlation = correlations(j);
    }
  }
  return best;
}

// Each apply_* mutates `state` in place given the selection made at it and
// returns the additive increment applied to beta_j.
double apply_lsboost(const StandardizedProblem& problem, BoostState& state, const Selection& sel, double epsilon) {
  const auto j = static_cast<Eigen::Index>(sel.index);
  const double step = epsilon * sel.correlation;
  state.beta(j) += step;
  state.resid -= step * problem.X().col(j);
  ++state.k;
  return step;
}

double apply_fse(const StandardizedProblem& problem, BoostState& state, const Selection& sel, double epsilon) {
  const auto j = static_cast<Eigen::Index>(sel.index);
  const double step = epsilon * sign_of(sel.correlation);
  state.beta(j) += step;
  state.resid -= step * problem.X().col(j);
  ++state.k;
  return step;
}

double apply_rfs(const StandardizedProblem& problem, BoostState& state, const Selection& sel, double epsilon,
                 double delta) {
  const auto j = static_cast<Eigen::Index>(sel.index);
  const double s = sign_of(sel.correlation);
  const Vector direction = s * problem.X().col(j) + (state.resid - problem.y()) / delta;
  state.resid -= epsilon * direction;
  state.beta *= 1.0 - epsilon / delta;
  const double step = epsilon * s;
  state.beta(j) += step;
  ++state.k;
  return step;
}

void check_state(const StandardizedProblem& problem, const BoostState& state) {
  if (static_cast<std::size_t>(state.beta.size()) != problem.p() ||
      static_cast<std::size_t>(state.resid.size()) != problem.n()) {
    throw Error(ErrorCode::InvalidArgument, "state dimensions do not match the problem");
  }
}

double epsilon_at(const AlgorithmConfig& config, std::size_t k) {
  if (config.variant == Variant::FSek) {
    return k < config.epsilon_schedule.size() ? config.epsilon_schedule[k] : 0.0;
  }
  return config.epsilon;
}

double delta_at(const AlgorithmConfig& config, std::size_t k) {
  switch (config.variant) {
    case Variant::RFS: return config.delta;
    case Variant::PathRFS: return config.delta_grid[std::min(k, config.delta_grid.size() - 1)];
    default: return kUnboundedDelta;
  }
}

IterationRecord make_record(const StandardizedProblem& problem, const BoostState& state, const Selection& sel,
                            const AlgorithmConfig& config) {
  IterationRecord rec;
  rec.k = state.k;
  rec.j = sel.index;
  rec.sign = sign_of(sel.correlation);
  rec.correlation = sel.correlation;
  rec.inf_corr = std::abs(sel.correlation);
  rec.epsilon = epsilon_at(config, state.k);
  rec.delta = delta_at(config, state.k);
  // Training error from the carried residual; the cross-check against
  // y - X beta is a test concern, not something the engine patches up.
  rec.train_error = state.resid.squaredNorm() / (2.0 * static_cast<double>(problem.n()));
  rec.l1_norm = state.beta.lpNorm<1>();
  rec.l0_norm = static_cast<std::size_t>((state.beta.array().abs() > kSparsityThreshold).count());
  if (config.store_vectors) {
    rec.beta = state.beta;
    rec.resid = state.resid;
  }
  return rec;
}

BoostTrace run_engine(const StandardizedProblem& problem, const AlgorithmConfig& config) {
  config.validate();
  BoostTrace trace;
  trace.config = config;
  trace.p = problem.p();
  trace.records.reserve(config.max_iters + 1);

  BoostState state = initial_state(problem);
  for (;;) {
    const Selection sel = select_column(state.resid, problem.X());
    IterationRecord rec = make_record(problem, state, sel, config);
    const bool at_fixed_point = rec.inf_corr <= config.stop_tolerance;
    if (at_fixed_point || state.k >= config.max_iters) {
      trace.converged = at_fixed_point;
      trace.records.push_back(std::move(rec));
      break;
    }
    switch (config.variant) {
      case Variant::LSBoost: rec.step = apply_lsboost(problem, state, sel, rec.epsilon); break;
      case Variant::FSe:
      case Variant::FSek: rec.step = apply_fse(problem, state, sel, rec.epsilon); break;
      case Variant::RFS:
      case Variant::PathRFS: rec.step = apply_rfs(problem, state, sel, rec.epsilon, rec.delta); break;
    }
    trace.records.push_back(std::move(rec));
  }
  return trace;
}

}  // namespace

Selection select_column(const Vector& resid, const Matrix& X) {
  return argmax_abs(X.transpose() * resid);
}

BoostState initial_state(const StandardizedProblem& problem) {
  return BoostState{Vector::Zero(static_cast<Eigen::Index>(problem.p())), problem.y(), 0};
}

BoostState step_lsboost(const StandardizedProblem& problem, const BoostState& state, double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw Error(ErrorCode::EpsilonOutOfRange, "LS-Boost needs 0 < eps <= 1");
  check_state(problem, state);
  BoostState next = state;
  apply_lsboost(problem, next, select_column(state.resid, problem.X()), epsilon);
  return next;
}

BoostState step_fse(const StandardizedProblem& problem, const BoostState& state, double epsilon) {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::EpsilonOutOfRange, "FSe needs eps > 0");
  check_state(problem, state);
  BoostState next = state;
  apply_fse(problem, next, select_column(state.resid, problem.X()), epsilon);
  return next;
}

BoostState step_fsek(const StandardizedProblem& problem, const BoostState& state, double epsilon_k) {
  if (!(epsilon_k >= 0.0)) throw Error(ErrorCode::EpsilonOutOfRange, "FSek needs eps_k >= 0");
  check_state(problem, state);
  BoostState next = state;
  apply_fse(problem, next, select_column(state.resid, problem.X()), epsilon_k);
  return next;
}

BoostState step_rfs(const StandardizedProblem& problem, const BoostState& state, double epsilon, double delta) {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::EpsilonOutOfRange, "R-FS needs eps > 0");
  if (!(delta >= epsilon)) throw Error(ErrorCode::InvalidArgument, "R-FS needs eps <= delta");
  check_state(problem, state);
  BoostState next = state;
  apply_rfs(problem, next, select_column(state.resid, problem.X()), epsilon, delta);
  return next;
}

std::vector<std::size_t> BoostTrace::visit_counts(std::size_t k) const {
  std::vector<std::size_t> counts(p, 0);
  for (std::size_t i = 0; i < std::min(k, iterations()); ++i) ++counts[records[i].j];
  return counts;
}

BoostTrace run(const StandardizedProblem& problem, const AlgorithmConfig& config) {
  if (config.variant == Variant::PathRFS) return run_path(problem, config);
  return run_engine(problem, config);
}

BoostTrace run_path(const StandardizedProblem& problem, const AlgorithmConfig& config) {
  if (config.variant != Variant::PathRFS) {
    throw Error(ErrorCode::InvalidArgument, "run_path needs a PathRFS configuration");
  }
  return run_engine(problem, config);
}

}  // namespace stagewise
