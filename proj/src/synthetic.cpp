#include "stagewise/synthetic.hpp"

#include "stagewise/error.hpp"

#include <cmath>
#include <numbers>

namespace stagewise {

double Rng::uniform() {
  for (;;) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    if (u > 0.0) return u;
  }
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

void SyntheticSpec::validate() const {
  if (n == 0 || p == 0) throw Error(ErrorCode::InvalidArgument, "synthetic n and p must be positive");
  if (!(rho >= 0.0 && rho < 1.0)) throw Error(ErrorCode::InvalidArgument, "rho must lie in [0, 1)");
  if (!(snr > 0.0) || !std::isfinite(snr)) throw Error(ErrorCode::InvalidArgument, "snr must be positive");
  if (beta_pop_support > p) throw Error(ErrorCode::InvalidArgument, "beta_pop_support exceeds p");
}

SyntheticSpec example_a(std::size_t n, std::size_t p, double rho, double snr, std::uint64_t seed) {
  return SyntheticSpec{n, p, rho, snr, 5, seed};
}

SyntheticSpec example_b(std::size_t n, std::size_t p, double rho, std::uint64_t seed) {
  return SyntheticSpec{n, p, rho, 1.0, 10, seed};
}

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix out(rows, cols);
  // Row-major fill so the draw order matches the row-by-row generator below.
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.cols(); ++j) out(i, j) = rng.normal();
  }
  return out;
}

SyntheticDataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const auto n = static_cast<Eigen::Index>(spec.n);
  const auto p = static_cast<Eigen::Index>(spec.p);
  const double shared = std::sqrt(spec.rho);
  const double own = std::sqrt(1.0 - spec.rho);

  SyntheticDataset out;
  out.data.X.resize(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double z = rng.normal();
    for (Eigen::Index j = 0; j < p; ++j) out.data.X(i, j) = shared * z + own * rng.normal();
  }

  out.beta_pop = Vector::Zero(p);
  out.beta_pop.head(static_cast<Eigen::Index>(spec.beta_pop_support)).setOnes();
  const double s = static_cast<double>(spec.beta_pop_support);
  out.signal_variance = spec.rho * s * s + (1.0 - spec.rho) * s;
  out.noise_variance = out.signal_variance / spec.snr;

  const double sigma = std::sqrt(out.noise_variance);
  out.data.y = out.data.X * out.beta_pop;
  for (Eigen::Index i = 0; i < n; ++i) out.data.y(i) += sigma * rng.normal();
  return out;
}

}  // namespace stagewise
