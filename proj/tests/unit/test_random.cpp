#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "mmm/random.hpp"

using namespace mmm;

TEST_CASE("splitmix64 reference values") {
  // Published outputs for seed 1234567.
  SplitMix64 g(1234567);
  CHECK(g.next() == 6457827717110365317ULL);
  CHECK(g.next() == 3203168211198807973ULL);
  CHECK(g.next() == 9817491932198370423ULL);
}

TEST_CASE("below stays in range") {
  SplitMix64 g(9);
  for (int i = 0; i < 1000; ++i) CHECK(g.below(7) < 7);
}

TEST_CASE("derive_seed separates streams") {
  CHECK(derive_seed(1, {2}) == derive_seed(1, {2}));
  CHECK(derive_seed(1, {2}) != derive_seed(1, {3}));
  CHECK(derive_seed(1, {2}) != derive_seed(2, {2}));
  CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
}

TEST_CASE("shuffled_indices is a permutation") {
  auto idx = shuffled_indices(50, 11);
  CHECK(idx == shuffled_indices(50, 11));
  CHECK(idx != shuffled_indices(50, 12));
  std::sort(idx.begin(), idx.end());
  std::vector<Index> expected(50);
  std::iota(expected.begin(), expected.end(), Index{0});
  CHECK(idx == expected);
}

TEST_CASE("resample_indices draws with replacement") {
  const auto idx = resample_indices(200, 5);
  CHECK(idx.size() == 200);
  CHECK(std::all_of(idx.begin(), idx.end(), [](Index i) { return i >= 0 && i < 200; }));
  std::vector<Index> sorted = idx;
  std::sort(sorted.begin(), sorted.end());
  CHECK(std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end());
}

TEST_CASE("normal sampler moments") {
  NormalSampler s(3);
  const Matrix a = s.standard_matrix(20000, 1);
  const double mean = a.mean();
  const double var = (a.array() - mean).square().sum() / (a.size() - 1);
  CHECK(std::abs(mean) < 0.03);
  CHECK(std::abs(var - 1.0) < 0.05);
}
