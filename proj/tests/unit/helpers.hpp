#pragma once

#include <cstdint>

#include "mmm/random.hpp"
#include "mmm/types.hpp"

namespace mmm::testing {

inline Matrix gaussian(Index rows, Index cols, std::uint64_t seed) {
  NormalSampler s(seed);
  return s.standard_matrix(rows, cols);
}

// Small model with every block populated; y and m carry Gaussian noise.
inline Dataset toy_dataset(Index n, std::uint64_t seed, double noise = 0.3) {
  const Index q = 4, p = 3, t = 2;
  Matrix x = gaussian(n, q, seed);
  Matrix cov = gaussian(n, 1, seed + 1);
  Matrix alpha(q, p);
  alpha << 1.0, 0.0, 0.5, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.3, 0.0, 0.0;
  Matrix beta(p, t);
  beta << 1.0, 0.0, 0.0, -0.7, 0.4, 0.0;
  Matrix m = x * alpha + cov * Matrix::Constant(1, p, 0.2) +
             noise * gaussian(n, p, seed + 2) + Matrix::Constant(n, p, 0.5);
  Matrix y = m * beta + x.col(3) * Matrix::Constant(1, t, 0.25) +
             noise * gaussian(n, t, seed + 3);
  return assemble_dataset(x, m, y, cov);
}

}  // namespace mmm::testing
