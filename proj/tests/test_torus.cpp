#include <random>

#include <gtest/gtest.h>

#include <dimervar/enumerate.hpp>
#include <dimervar/torus.hpp>

using namespace dimervar;

TEST(Torus, UniformFourByFour) {
  EXPECT_NEAR(torus_partition(2, {1, 1, 1, 1}), 272, 1e-9);
  auto pc = partition_components(2, {1, 1, 1, 1});
  EXPECT_EQ(pc.sign[0], 0);
}

TEST(Torus, MatchesEnumeration) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> U(0.05, 3);
  for (int k = 0; k < 20; ++k) {
    WeightVector w{U(gen), U(gen), U(gen), U(gen)};
    const double exact = torus_weighted_sum(2, w);
    EXPECT_NEAR(torus_partition(2, w) / exact, 1, 1e-10);
  }
}

TEST(Torus, DominantWeights) {
  WeightVector w{2, 1, 1, 1};
  EXPECT_NEAR(torus_partition(2, w), torus_weighted_sum(2, w), 1e-9 * torus_weighted_sum(2, w));
  EXPECT_NEAR(partition_components(2, w).P(0), -351, 1e-9);
}

TEST(Torus, SignRuleMatchesPhaseTracking) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> U(0.1, 2);
  for (int k = 0; k < 40; ++k) {
    WeightVector w{U(gen), U(gen), U(gen), U(gen)};
    if (k % 4 == 0) w.a = w.b + w.c + w.d + 0.5;
    for (int n : {2, 4, 6}) {
      const int numeric = product_sign_numeric(0, n, w);
      if (numeric != 0) {
        EXPECT_EQ(p1_sign_rule(w), numeric);
      }
    }
  }
}

TEST(Torus, SizeValidation) {
  EXPECT_THROW(partition_components(3, {1, 1, 1, 1}), InvalidRegion);
  EXPECT_THROW(partition_components(0, {1, 1, 1, 1}), InvalidRegion);
  EXPECT_THROW(partition_components(1024, {1, 1, 1, 1}), NumericOverflow);
  EXPECT_THROW(partition_components(2, {1, -1, 1, 1}), InvalidWeights);
}

TEST(Torus, OverflowOnlyInLinearScale) {
  const double lz = torus_log_partition(128, {1, 1, 1, 1});
  EXPECT_TRUE(std::isfinite(lz));
  EXPECT_THROW(torus_partition(128, {1, 1, 1, 1}), NumericOverflow);
}

TEST(Torus, FreeEnergyConverges) {
  for (WeightVector w : {WeightVector{1, 1, 1, 1}, {1.5, 0.7, 1.2, 0.9}, {2, 1, 1, 1}}) {
    const int n = 64;
    EXPECT_NEAR(torus_log_partition(n, w) / (2.0 * n * n), log_Z(w), 1e-2);
  }
}

TEST(Torus, DenseKasteleyn) {
  for (WeightVector w : {WeightVector{1, 1, 1, 1}, {1.3, 0.4, 2.1, 0.8}, {3, 1, 1, 1}}) {
    auto chk = dense_kasteleyn_check(w);
    EXPECT_LT(chk.max_rel_err, 1e-10);
  }
}

TEST(Torus, FiniteProbabilities) {
  auto p = edge_probability_finite(2, {1, 1, 1, 1});
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(p[i], 0.25, 1e-12);
  auto q = edge_probability_finite(64, {2, 1, 1, 1});
  EXPECT_NEAR(q.pa, 0.5, 0.02);
  EXPECT_NEAR(q.sum(), 1, 1e-9);
}

TEST(Torus, FiniteProbabilitiesMatchEnumeration) {
  // p_a is the expected N_a divided by the 8 class-a edges of the 4x4 torus.
  WeightVector w{1.4, 0.6, 0.9, 1.3};
  double num = 0, den = 0;
  for (const auto& [s, k] : torus_matching_polynomial(2)) {
    const double term = static_cast<double>(k) * std::pow(w.a, s.N_a) * std::pow(w.b, s.N_b) *
                        std::pow(w.c, s.N_c) * std::pow(w.d, s.N_d);
    num += s.N_a * term;
    den += term;
  }
  auto p = edge_probability_finite(2, w);
  EXPECT_NEAR(p.pa, num / den / 8, 1e-10);
}
