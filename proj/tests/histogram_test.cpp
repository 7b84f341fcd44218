#include <gtest/gtest.h>

#include <random>

#include "mammoseg/histogram.hpp"
#include "test_support.hpp"

using namespace mammoseg;

TEST(Histogram, CountsIntensities) {
  const GrayImage img(2, 2, std::vector<std::uint8_t>{0, 0, 255, 255});
  const auto h = histogram(img);
  EXPECT_EQ(h.bins[0], 2u);
  EXPECT_EQ(h.bins[255], 2u);
  EXPECT_EQ(h.total(), 4u);
}

TEST(Histogram, ConstantImage) {
  const auto h = histogram(GrayImage(3, 3, 7));
  EXPECT_EQ(h.bins[7], 9u);
  EXPECT_EQ(h.total(), 9u);
}

TEST(Histogram, SumEqualsPixelCount) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    const auto img = support::random_image(rng, 1 + i, 2 + i);
    EXPECT_EQ(histogram(img).total(), img.size());
  }
}

TEST(Otsu, TwoClustersPicksSmallestTiedThreshold) {
  Histogram h;
  h.bins[50] = 6;
  h.bins[200] = 4;
  // Every t in [50,199] gives the same split; the oracle agrees on 50.
  EXPECT_EQ(support::otsu_oracle(h), 50);
  EXPECT_EQ(otsu_threshold(h), 50);
}

TEST(Otsu, SingleValueHistogramGivesZero) {
  Histogram h;
  h.bins[128] = 10;
  EXPECT_EQ(otsu_threshold(h), 0);
}

TEST(Otsu, EmptyHistogramThrows) {
  try {
    otsu_threshold(Histogram{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyHistogram);
  }
}

TEST(Otsu, MatchesExhaustiveOracle) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const auto h = support::random_histogram(rng, i);
    ASSERT_EQ(otsu_threshold(h), support::otsu_oracle(h)) << "histogram #" << i;
  }
}

TEST(Otsu, LargeCountsStayExact) {
  // Near the 2^30 sample limit the variances need more than 128 bits.
  Histogram h;
  h.bins[0] = (1u << 29);
  h.bins[255] = (1u << 29) - 7;
  h.bins[100] = 3;
  h.bins[101] = 4;
  EXPECT_EQ(otsu_threshold(h), support::otsu_oracle(h));
}

TEST(Binarize, ForegroundIsStrictlyAboveThreshold) {
  const GrayImage img(2, 1, std::vector<std::uint8_t>{10, 200});
  const auto m = binarize(img, 128);
  EXPECT_EQ(m[0], 0);
  EXPECT_EQ(m[1], 1);
  EXPECT_EQ(count_foreground(binarize(img, 255)), 0u);
  const auto inv = binarize(img, 128, true);
  EXPECT_EQ(inv[0], 1);
  EXPECT_EQ(inv[1], 0);
}

TEST(Binarize, RejectsOutOfRangeThreshold) {
  EXPECT_THROW(binarize(GrayImage(1, 1), 256), Error);
  EXPECT_THROW(binarize(GrayImage(1, 1), -1), Error);
}
