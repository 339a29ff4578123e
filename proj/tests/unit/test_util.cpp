#include "rbmscale/bits.hpp"
#include "rbmscale/error.hpp"
#include "rbmscale/format.hpp"
#include "rbmscale/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <set>

using namespace rbmscale;

TEST(Bits, StringConvention) {
  EXPECT_EQ(from_bitstring("1000"), 1U);
  EXPECT_EQ(from_bitstring("0001"), 8U);
  EXPECT_EQ(to_bitstring(6, 4), "0110");
  EXPECT_EQ(from_bitstring(to_bitstring(0b101101, 6)), 0b101101U);
  EXPECT_THROW(from_bitstring("10x"), DomainError);
}

TEST(Bits, FlipsAndMagnetization) {
  EXPECT_EQ(flip(0b0101, 1), 0b0111U);
  EXPECT_EQ(flip_all(0b0101, 4), 0b1010U);
  EXPECT_EQ(magnetization(0b1111, 4), 4);
  EXPECT_EQ(magnetization(0b0000, 4), -4);
  EXPECT_EQ(magnetization(0b0011, 4), 0);
  const Eigen::VectorXd v = to_occupation(0b1101, 4);
  EXPECT_EQ(v, Eigen::Vector4d(1, 0, 1, 1));
  EXPECT_EQ(from_occupation(v), 0b1101U);
}

TEST(Format, RoundTrip) {
  for (double x : {0.1, -2.2360679774997898, 1e-300, 6.02214076e23, 0.0}) {
    EXPECT_EQ(parse_real(format_real(x)), x);
  }
  EXPECT_EQ(format_real(1.0), "1");
  EXPECT_TRUE(std::isnan(parse_real("nan")));
  EXPECT_THROW(parse_real("1.5x"), DomainError);
  EXPECT_EQ(split_fields("a,,b", ','), (std::vector<std::string>{"a", "", "b"}));
  EXPECT_EQ(trim("  x y \t"), "x y");
}

TEST(Rng, ReproducibleStreams) {
  Rng a(42);
  Rng b(42);
  for (int k = 0; k < 100; ++k) EXPECT_EQ(a.next(), b.next());
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_EQ(derive_seed(7, 3), derive_seed(7, 3));
}

TEST(Rng, Distributions) {
  Rng rng(3);
  const int n = 200000;
  double sum = 0.0;
  double sum_sq = 0.0;
  double u_sum = 0.0;
  std::vector<int> counts(7, 0);
  for (int k = 0; k < n; ++k) {
    const double z = rng.normal();
    sum += z;
    sum_sq += z * z;
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    u_sum += u;
    counts[rng.below(7)]++;
  }
  EXPECT_NEAR(sum / n, 0.0, 4 / std::sqrt(n));
  EXPECT_NEAR(sum_sq / n, 1.0, 0.02);
  EXPECT_NEAR(u_sum / n, 0.5, 4 * std::sqrt(1.0 / 12 / n));
  for (int c : counts) EXPECT_NEAR(c / static_cast<double>(n), 1.0 / 7, 4 * std::sqrt(1.0 / 7 * 6 / 7 / n));
}
