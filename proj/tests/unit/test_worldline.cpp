#include <gtest/gtest.h>

#include "drabi/rng.hpp"
#include "drabi/wlmc.hpp"
#include "drabi/worldline.hpp"

using namespace drabi;

TEST(Worldline, Initial) {
  const auto wl = init_worldline(10.0);
  EXPECT_TRUE(wl.kinks.empty());
  EXPECT_EQ(wl.base_sign, 1);
  EXPECT_EQ(wl.magnetization(), 1.0);
  EXPECT_TRUE(wl.valid());
  const auto s = measure(wl, 1.0);
  EXPECT_EQ(s.n_kinks, 0u);
  EXPECT_EQ(s.sigma_x_est, 0.0);
  EXPECT_EQ(s.m2, 1.0);
}

TEST(Worldline, QuarterKinksHaveZeroMagnetization) {
  Worldline wl{8.0, 1, {2.0, 6.0}};
  const auto s = measure(wl, 1.0);
  EXPECT_EQ(s.m, 0.0);
  EXPECT_EQ(s.n_kinks, 2u);
  EXPECT_EQ(wl.sign_at(1.0), 1);
  EXPECT_EQ(wl.sign_at(3.0), -1);
  EXPECT_EQ(wl.sign_at(7.0), 1);
}

TEST(Worldline, Validity) {
  EXPECT_FALSE((Worldline{8.0, 1, {2.0}}.valid()));
  EXPECT_FALSE((Worldline{8.0, 1, {3.0, 2.0}}.valid()));
  EXPECT_FALSE((Worldline{8.0, 1, {2.0, 8.0}}.valid()));
  EXPECT_FALSE((Worldline{8.0, 0, {}}.valid()));
  EXPECT_TRUE((Worldline{8.0, -1, {0.0, 5.0}}.valid()));
}

TEST(Worldline, SegmentsCoverTheCircle) {
  Worldline wl{10.0, -1, {1.0, 4.0, 6.5, 9.0}};
  const auto segs = segments_with_cuts(wl, {2.0, 7.0});
  ASSERT_EQ(segs.size(), 6u);
  double length = 0.0;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    length += segs[i].end - segs[i].start;
    if (i > 0) EXPECT_EQ(segs[i].start, segs[i - 1].end);
  }
  EXPECT_DOUBLE_EQ(length, 10.0);
  EXPECT_LT(segs.front().start, 0.0);  // wraps through zero
  EXPECT_LE(segs.back().end - segs.front().start, 10.0);
  double m = 0.0;
  for (const auto& s : segs) m += s.sign * (s.end - s.start);
  EXPECT_DOUBLE_EQ(m / 10.0, wl.magnetization());
}

TEST(Worldline, SegmentRoundTripDropsEqualSignBoundaries) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    Worldline wl{7.0, rng.uniform() < 0.5 ? 1 : -1, {}};
    const int n = 2 * static_cast<int>(rng.below(5));
    for (int i = 0; i < n; ++i) wl.kinks.push_back(7.0 * rng.uniform());
    std::sort(wl.kinks.begin(), wl.kinks.end());
    std::vector<double> cuts;
    for (int i = 0; i < 3; ++i) cuts.push_back(7.0 * rng.uniform());
    std::sort(cuts.begin(), cuts.end());
    const auto back = worldline_from_segments(7.0, segments_with_cuts(wl, cuts));
    EXPECT_EQ(back.kinks, wl.kinks);
    EXPECT_EQ(back.base_sign, wl.base_sign);
  }
}

TEST(Worldline, KinkAtZero) {
  Worldline wl{4.0, 1, {0.0, 2.0}};
  EXPECT_TRUE(wl.valid());
  EXPECT_EQ(wl.sign_at(1.0), 1);
  EXPECT_EQ(wl.sign_at(3.0), -1);
  const auto back = worldline_from_segments(4.0, segments_with_cuts(wl, {}));
  EXPECT_EQ(back.kinks, wl.kinks);
  EXPECT_DOUBLE_EQ(wl.magnetization(), 0.0);
}
