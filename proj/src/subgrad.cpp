#include "stagewise/subgrad.hpp"

#include "stagewise/error.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <string>

namespace stagewise {

ResidualObjective ResidualObjective::cm(const StandardizedProblem& problem) {
  return ResidualObjective(problem, Kind::CM, std::numeric_limits<double>::infinity());
}

ResidualObjective ResidualObjective::rcm(const StandardizedProblem& problem, double delta) {
  if (!(delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "RCM needs delta > 0");
  if (std::isinf(delta)) return cm(problem);
  return ResidualObjective(problem, Kind::RCM, delta);
}

double evaluate(const ResidualObjective& obj, const Vector& r) {
  const auto& P = obj.problem();
  const double corr = (P.X().transpose() * r).lpNorm<Eigen::Infinity>();
  if (obj.kind() == ResidualObjective::Kind::CM) return corr;
  return corr + (r - P.y()).squaredNorm() / (2.0 * obj.delta());
}

Subgradient subgradient(const ResidualObjective& obj, const Vector& r) {
  const auto& P = obj.problem();
  const Vector c = P.X().transpose() * r;
  Subgradient out;
  double best = -1.0;
  for (Eigen::Index j = 0; j < c.size(); ++j) {
    if (std::abs(c(j)) > best) {
      best = std::abs(c(j));
      out.j = static_cast<std::size_t>(j);
    }
  }
  const double cj = c(static_cast<Eigen::Index>(out.j));
  out.sign = (cj > 0.0) - (cj < 0.0);
  const double s = out.sign;
  if (obj.kind() == ResidualObjective::Kind::CM) {
    out.g = s * P.X().col(static_cast<Eigen::Index>(out.j));
  } else {
    out.g = s * P.X().col(static_cast<Eigen::Index>(out.j)) + (r - P.y()) / obj.delta();
  }
  return out;
}

StepRule constant_step(double alpha) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "step size must be positive");
  return [alpha](std::size_t, const Vector&) { return alpha; };
}

StepRule step_sequence(std::vector<double> steps) {
  return [steps = std::move(steps)](std::size_t k, const Vector&) {
    if (k >= steps.size()) {
      throw Error(ErrorCode::InvalidArgument, "step sequence exhausted at iteration " + std::to_string(k));
    }
    return steps[k];
  };
}

StepRule correlation_scaled_step(const StandardizedProblem& problem, double epsilon) {
  return [&problem, epsilon](std::size_t, const Vector& r) {
    return epsilon * (problem.X().transpose() * r).lpNorm<Eigen::Infinity>();
  };
}

std::vector<SubgradState> descend(const ResidualObjective& obj, const StepRule& steps, std::size_t iterations) {
  const auto& P = obj.problem();
  std::vector<SubgradState> out;
  out.reserve(iterations + 1);

  SubgradState state;
  state.r = P.y();
  state.beta_shadow = Vector::Zero(static_cast<Eigen::Index>(P.p()));
  for (std::size_t k = 0;; ++k) {
    state.k = k;
    Subgradient sg = subgradient(obj, state.r);
    state.g = sg.g;
    state.alpha = 0.0;
    if (k == iterations) {
      out.push_back(state);
      break;
    }
    const double alpha = steps(k, state.r);
    if (!(alpha >= 0.0)) throw Error(ErrorCode::InvalidArgument, "negative step at iteration " + std::to_string(k));
    state.alpha = alpha;
    out.push_back(state);

    // x <- x - alpha g, and the coefficient move that keeps r = y - X beta.
    state.r = state.r - alpha * sg.g;
    if (obj.kind() == ResidualObjective::Kind::RCM) state.beta_shadow *= 1.0 - alpha / obj.delta();
    state.beta_shadow(static_cast<Eigen::Index>(sg.j)) += alpha * sg.sign;
    assert(((P.y() - P.X() * state.beta_shadow) - state.r).lpNorm<Eigen::Infinity>() <=
           1e-8 * (1.0 + P.y().lpNorm<Eigen::Infinity>()));
  }
  return out;
}

double sd_bound(double dist0, double G, double alpha, std::size_t k) {
  return dist0 * dist0 / (2.0 * static_cast<double>(k + 1) * alpha) + alpha * G * G / 2.0;
}

double sequence_process_bound(double dist0, double G, const std::vector<double>& alphas) {
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double a : alphas) {
    sum += a;
    sum_sq += a * a;
  }
  return (dist0 * dist0 + G * G * sum_sq) / (2.0 * sum);
}

}  // namespace stagewise
