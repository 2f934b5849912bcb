#include <set>

#include <gtest/gtest.h>

#include <dimervar/enumerate.hpp>

using namespace dimervar;

TEST(Count, Rectangles) {
  EXPECT_EQ(count_tilings(rectangle_region(2, 2)), 2);
  EXPECT_EQ(count_tilings(rectangle_region(2, 3)), 3);
  EXPECT_EQ(count_tilings(rectangle_region(3, 3)), 0);
  EXPECT_EQ(count_tilings(rectangle_region(4, 4)), 36);
  EXPECT_EQ(count_tilings(rectangle_region(6, 6)), 6728);
  EXPECT_EQ(count_tilings(rectangle_region(8, 8)), 12988816);
  EXPECT_EQ(count_tilings(rectangle_region(2, 10)), 89);
}

TEST(Count, AztecPowersOfTwo) {
  for (int n = 1; n <= 5; ++n) EXPECT_EQ(count_tilings(aztec_diamond(n)), BigInt(1) << (n * (n + 1) / 2));
}

TEST(Count, Transposed) {
  EXPECT_EQ(count_tilings(rectangle_region(10, 3)), count_tilings(rectangle_region(3, 10)));
}

TEST(Count, CellCap) {
  EXPECT_THROW(count_tilings(rectangle_region(10, 10)), CapExceeded);
  EXPECT_EQ(count_tilings(rectangle_region(10, 10), 100), BigInt("258584046368"));
}

TEST(Enumerate, MatchesCount) {
  for (const Region& R : {rectangle_region(4, 4), rectangle_region(3, 6), aztec_diamond(4)}) {
    auto ts = enumerate_tilings(R);
    EXPECT_EQ(BigInt(ts.size()), count_tilings(R));
    std::set<Tiling> distinct(ts.begin(), ts.end());
    EXPECT_EQ(distinct.size(), ts.size());
    for (const auto& t : ts) EXPECT_NO_THROW(tiling_partners(R, t));
  }
}

TEST(Enumerate, Cap) { EXPECT_THROW(enumerate_tilings(rectangle_region(6, 6), 100), CapExceeded); }

TEST(Enumerate, EarlyStop) {
  int seen = 0;
  for_each_tiling(rectangle_region(4, 4), [&](const Tiling&) { return ++seen < 5; });
  EXPECT_EQ(seen, 5);
}

TEST(Torus, MatchingCount) {
  auto ms = torus_matchings(2);
  EXPECT_EQ(ms.size(), 272u);
  for (const auto& m : ms) EXPECT_EQ(matching_stats(m).total(), 8);
  EXPECT_THROW(torus_matchings(3), CapExceeded);
}

TEST(Torus, PolynomialAgreesWithSubsetRecursion) {
  std::array<Rational, 4> w{Rational(3, 2), Rational(1, 3), Rational(5, 7), Rational(2)};
  EXPECT_EQ(torus_weighted_sum(2, w), torus_weighted_sum_dp(2, w));
  std::array<BigInt, 4> one{1, 1, 1, 1};
  EXPECT_EQ(torus_weighted_sum(2, one), 272);
}

TEST(Torus, ClassBalance) {
  // Translating by one cell swaps a <-> b and c <-> d.
  auto poly = torus_matching_polynomial(2);
  BigInt total = 0;
  for (const auto& [s, k] : poly) {
    total += k;
    MatchingStats swapped{s.N_b, s.N_a, s.N_d, s.N_c};
    EXPECT_EQ(poly.at(swapped), k);
  }
  EXPECT_EQ(total, 272);
}
