#pragma once

#include "stagewise/problem.hpp"
#include "stagewise/synthetic.hpp"

#include <cstdint>

namespace stagewise::fixtures {

// T1: orthonormal 2x2 design, y = (3, 1), uncentered.
inline StandardizedProblem t1() {
  RawDataset raw;
  raw.X = Matrix::Identity(2, 2);
  raw.y = Vector(2);
  raw.y << 3.0, 1.0;
  return standardize(raw, false);
}

// Fixed rank-deficient instance (5 x 8, rank 4 after centering). Reference
// values below come from numpy / scipy.optimize.linprog / cvxpy.
inline StandardizedProblem frozen_instance() {
  RawDataset raw;
  raw.X.resize(5, 8);
  raw.X << 1, 2, 0, -1, 3, 1, 0, 2,
           0, 1, 1, 2, -1, 0, 2, 1,
           2, 0, 1, 1, 0, -2, 1, 0,
           1, 1, -1, 0, 2, 1, 1, -1,
           -1, 3, 2, 1, 1, 0, -2, 1;
  raw.y.resize(5);
  raw.y << 3.0, -1.0, 2.0, 0.5, 1.0;
  return standardize(raw, true);
}

namespace frozen {
inline constexpr double kLambdaPmin = 0.74222414395086245;
inline constexpr double kLambdaMax = 3.3651157457833256;
inline constexpr double kFittedNorm = 3.0331501776206204;
inline constexpr double kDeltaMax = 6.5266781703807748;
inline constexpr double kBetaLs[8] = {1.3591108656681703,  -0.08910240843234826, 0.3995622245343254,
                                      -1.34633322359878,   1.0260070341161613,   -1.123301251055805,
                                      -0.9551601451270552, 0.8620405016821987};
inline constexpr double kDelta03 = 1.9580034511142324;
inline constexpr double kLasso03 = 0.36746080248586865;
inline constexpr double kDelta07 = 4.568674719266542;
inline constexpr double kLasso07 = 0.067434483185448063;
}  // namespace frozen

inline StandardizedProblem random_problem(std::size_t n, std::size_t p, double rho, std::uint64_t seed,
                                          double snr = 1.0) {
  SyntheticSpec spec = example_a(n, p, rho, snr, seed);
  if (spec.beta_pop_support > p) spec.beta_pop_support = p;
  return standardize(generate_synthetic(spec).data);
}

}  // namespace stagewise::fixtures
