#pragma once

#include "stagewise/problem.hpp"

#include <cstdint>
#include <random>

namespace stagewise {

/// Seedable generator used for every random draw in the project.
///
/// Uniforms come from std::mt19937_64, whose output sequence is fixed by
/// the standard, taking the top 53 bits. Normals use the trigonometric
/// Box-Muller transform so that no implementation-defined distribution
/// object is involved.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct SyntheticSpec {
  std::size_t n = 50;
  std::size_t p = 500;
  double rho = 0.0;
  double snr = 1.0;
  std::size_t beta_pop_support = 5;
  std::uint64_t seed = 0;

  /// Throws InvalidArgument on rho outside [0,1), snr <= 0, support > p or
  /// a zero dimension.
  void validate() const;
};

/// The Eg-A design: equicorrelated Gaussian covariates with 5 leading unit
/// coefficients.
SyntheticSpec example_a(std::size_t n, std::size_t p, double rho, double snr, std::uint64_t seed);
/// Eg-B: as Eg-A with 10 leading unit coefficients and SNR 1.
SyntheticSpec example_b(std::size_t n, std::size_t p, double rho, std::uint64_t seed);

struct SyntheticDataset {
  RawDataset data;
  Vector beta_pop;
  /// Var(x'beta_pop) under the population covariance.
  double signal_variance = 0.0;
  double noise_variance = 0.0;
};

/// Rows x_i = sqrt(rho) z_i 1 + sqrt(1 - rho) w_i with z_i, w_i standard
/// normal, which has unit variances and pairwise correlation rho; then
/// y = X beta_pop + noise with noise variance signal_variance / snr.
SyntheticDataset generate_synthetic(const SyntheticSpec& spec);

/// Matrix with i.i.d. standard normal entries.
Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng);

}  // namespace stagewise
