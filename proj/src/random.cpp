#include "mmm/random.hpp"

#include <numeric>

namespace mmm {

std::uint64_t SplitMix64::below(std::uint64_t bound) {
  // Reject the 2^64 mod bound smallest draws so every residue is equally likely.
  const std::uint64_t threshold = (std::uint64_t{0} - bound) % bound;
  std::uint64_t r = next();
  while (r < threshold) r = next();
  return r % bound;
}

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> keys) {
  SplitMix64 mix(base);
  std::uint64_t h = mix.next();
  for (std::uint64_t k : keys) {
    SplitMix64 step(h ^ (k + 0x632be59bd9b4e019ULL));
    h = step.next();
  }
  return h;
}

std::vector<Index> shuffled_indices(Index n, std::uint64_t seed) {
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  SplitMix64 rng(seed);
  for (Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(i) + 1));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  return idx;
}

std::vector<Index> resample_indices(Index n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<Index> idx(static_cast<std::size_t>(n));
  for (auto& v : idx) v = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
  return idx;
}

Matrix NormalSampler::standard_matrix(Index rows, Index cols) {
  // Row-major fill order so a prefix of rows is stable when n grows.
  Matrix out(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) out(i, j) = standard();
  return out;
}

}  // namespace mmm
