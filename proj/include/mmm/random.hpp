#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

#include "mmm/types.hpp"

namespace mmm {

// SplitMix64 (Steele, Lea & Flood). Fully specified, so shuffles and
// resampling indices are reproducible across platforms.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t operator()() { return next(); }
  static constexpr std::uint64_t min() { return 0; }
  static constexpr std::uint64_t max() { return ~std::uint64_t{0}; }

  /// Uniform integer in [0, bound) by rejection; bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t state_;
};

/// Independent stream seed for (base, k1, k2, ...).
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> keys);

/// Fisher-Yates shuffle of 0..n-1 driven by SplitMix64(seed).
std::vector<Index> shuffled_indices(Index n, std::uint64_t seed);

/// n draws with replacement from 0..n-1.
std::vector<Index> resample_indices(Index n, std::uint64_t seed);

// Gaussian sampling for simulation; deterministic per seed on a given
// standard library.
class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : engine_(seed) {}

  double standard() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  Matrix standard_matrix(Index rows, Index cols);

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace mmm
