#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "arisppo/rng.hpp"

using arisppo::Rng;
using arisppo::Stream;

TEST(Rng, EqualSeedsGiveEqualSequences) {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, DifferentSeedsDivergeQuickly) {
  Rng a(1), b(2);
  int same = 0;
  for (int i = 0; i < 100; ++i) same += a.next_u64() == b.next_u64();
  EXPECT_LT(same, 100);
  EXPECT_EQ(same, 0);
}

TEST(Rng, StreamsAreIndependentOfEachOther) {
  Rng channel(7, Stream::channel), policy(7, Stream::policy);
  EXPECT_NE(channel.next_u64(), policy.next_u64());
  // drawing from one stream does not shift another
  Rng p1(7, Stream::policy);
  Rng c1(7, Stream::channel);
  for (int i = 0; i < 10; ++i) (void)c1.next_u64();
  Rng p2(7, Stream::policy);
  EXPECT_EQ(p1.next_u64(), p2.next_u64());
}

TEST(Rng, CopyIsASnapshot) {
  Rng a(3);
  (void)a.next_u64();
  Rng snap = a;
  const auto x = a.next_u64();
  EXPECT_EQ(snap.next_u64(), x);
  EXPECT_EQ(snap, a);
}

TEST(Rng, SubstreamsDifferAndAreStable) {
  Rng base(9);
  EXPECT_NE(base.substream(0).next_u64(), base.substream(1).next_u64());
  EXPECT_EQ(base.substream(5).next_u64(), Rng(9).substream(5).next_u64());
}

TEST(Rng, UniformStaysInRange) {
  Rng r(11);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    ASSERT_GT(r.uniform_open_low(), 0.0);
  }
  EXPECT_LT(lo, 1e-3);
  EXPECT_GT(hi, 1.0 - 1e-3);
}

TEST(Rng, BelowIsUnbiasedOverSmallRange) {
  Rng r(13);
  std::array<int, 3> counts{};
  const int n = 60000;
  for (int i = 0; i < n; ++i) ++counts[r.below(3)];
  for (int c : counts) EXPECT_NEAR(c, n / 3.0, 5.0 * std::sqrt(n * (1.0 / 3) * (2.0 / 3)));
}

TEST(Rng, NormalMomentsMatchStandardGaussian) {
  Rng r(17);
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    s += x;
    s2 += x * x;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.015);
}
