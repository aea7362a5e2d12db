#include <doctest.h>

#include <random>

#include "maslov_properties.hpp"

namespace {
constexpr int kTrials = 50;
}

TEST_CASE("reparametrization invariance") {
  std::mt19937 rng(101);
  for (int i = 0; i < kTrials; ++i) CHECK(props::reparametrization(rng, 1 + i % 2));
}

TEST_CASE("path additivity") {
  std::mt19937 rng(102);
  for (int i = 0; i < kTrials; ++i) CHECK(props::path_additivity(rng, 1 + i % 2));
}

TEST_CASE("symplectic invariance") {
  std::mt19937 rng(103);
  for (int i = 0; i < kTrials; ++i) CHECK(props::symplectic_invariance(rng, 1 + i % 2));
}

TEST_CASE("additivity over symplectic sums") {
  std::mt19937 rng(104);
  for (int i = 0; i < kTrials; ++i) CHECK(props::sum_additivity(rng, 1 + i % 2));
}

TEST_CASE("monotonicity in the coefficient") {
  std::mt19937 rng(105);
  for (int i = 0; i < kTrials; ++i) CHECK(props::monotonicity(rng, 1 + i % 2));
}

TEST_CASE("integrated paths stay symplectic") {
  std::mt19937 rng(106);
  for (int i = 0; i < kTrials; ++i) CHECK(props::symplecticity_defect(rng, 1 + i % 3) <= hmorse::kTolSymp);
}
