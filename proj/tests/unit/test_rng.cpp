#include <cmath>

#include <gtest/gtest.h>

#include "drabi/error.hpp"
#include "drabi/rng.hpp"

using namespace drabi;

TEST(Rng, SameSeedSameStream) {
  Rng a = Rng::for_stream(42, 3), b = Rng::for_stream(42, 3);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next(), b.next());
}

TEST(Rng, StreamsDiffer) {
  Rng a = Rng::for_stream(42, 0), b = Rng::for_stream(42, 1), c = Rng::for_stream(43, 0);
  int same_ab = 0, same_ac = 0;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    same_ab += x == b.next();
    same_ac += x == c.next();
  }
  EXPECT_EQ(same_ab, 0);
  EXPECT_EQ(same_ac, 0);
}

TEST(Rng, SerializedStateContinuesExactly) {
  Rng a = Rng::for_stream(7, 9);
  for (int i = 0; i < 12345; ++i) a.uniform();
  Rng b = Rng::deserialize(a.serialize());
  EXPECT_TRUE(a == b);
  for (int i = 0; i < 1000; ++i) {
    ASSERT_EQ(a.uniform(), b.uniform());
    ASSERT_EQ(a.normal(), b.normal());
    ASSERT_EQ(a.below(17), b.below(17));
  }
  EXPECT_THROW(Rng::deserialize("not a state"), ParseError);
}

TEST(Rng, DistributionMoments) {
  Rng r(11);
  const int n = 400000;
  double su = 0, se = 0, sn = 0, sn2 = 0;
  std::vector<int> counts(5, 0);
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    se += r.exponential();
    const double z = r.normal();
    sn += z;
    sn2 += z * z;
    ++counts[r.below(5)];
  }
  EXPECT_NEAR(su / n, 0.5, 5 * std::sqrt(1.0 / 12 / n));
  EXPECT_NEAR(se / n, 1.0, 5 * std::sqrt(1.0 / n));
  EXPECT_NEAR(sn / n, 0.0, 5 * std::sqrt(1.0 / n));
  EXPECT_NEAR(sn2 / n, 1.0, 5 * std::sqrt(2.0 / n));
  for (int c : counts) EXPECT_NEAR(c, n / 5.0, 5 * std::sqrt(n * 0.16));
}
