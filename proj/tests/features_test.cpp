#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sweepdepth/features.hpp"

namespace sweepdepth {
namespace {

TEST(ExtractFeatures, ConstantImageHasZeroGradient) {
  const Image img(10, 12, 3, 0.4);
  const FeatureMap f = extract_features(img, FeatureKind::Gradient, 1);
  ASSERT_EQ(f.channels(), 3);
  for (int y = 0; y < f.height(); ++y) {
    for (int x = 0; x < f.width(); ++x) {
      EXPECT_NEAR(f.data(y, x, 0), 0.4, 1e-12);
      EXPECT_EQ(f.data(y, x, 1), 0.0);
      EXPECT_EQ(f.data(y, x, 2), 0.0);
    }
  }
}

TEST(ExtractFeatures, RgbAtScaleOneIsIdentity) {
  std::mt19937_64 rng(1);
  const Image img = oracle::random_image(rng, 7, 9, 3);
  const FeatureMap f = extract_features(img, FeatureKind::Rgb, 1);
  EXPECT_EQ(f.data, img);
  EXPECT_EQ(f.scale, 1);
}

TEST(ExtractFeatures, CheckerboardBoxAverage) {
  Image img(4, 4);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) img(y, x) = (x + y) % 2;
  }
  const FeatureMap f = extract_features(img, FeatureKind::Intensity, 2);
  ASSERT_EQ(f.height(), 2);
  ASSERT_EQ(f.width(), 2);
  for (double v : f.data.data()) EXPECT_DOUBLE_EQ(v, 0.5);
}

TEST(ExtractFeatures, OutputSizeRoundsUp) {
  const Image img(10, 13, 3, 0.5);
  for (int scale : {1, 2, 4}) {
    const FeatureMap f = extract_features(img, FeatureKind::Intensity, scale);
    EXPECT_EQ(f.height(), (10 + scale - 1) / scale);
    EXPECT_EQ(f.width(), (13 + scale - 1) / scale);
    for (double v : f.data.data()) EXPECT_NEAR(v, 0.5, 1e-12);
  }
}

TEST(ExtractFeatures, GradientIsCentralDifference) {
  Image img(5, 6);
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 6; ++x) img(y, x) = 0.1 * x + 0.03 * y * y;
  }
  const FeatureMap f = extract_features(img, FeatureKind::Gradient, 1);
  EXPECT_NEAR(f.data(2, 3, 1), 0.1, 1e-12);
  EXPECT_NEAR(f.data(2, 3, 2), 0.5 * (0.03 * 9 - 0.03 * 1), 1e-12);
}

TEST(ExtractFeatures, Errors) {
  const Image img(4, 4, 3, 0.5);
  try {
    parse_feature_kind("sift");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownExtractor);
  }
  EXPECT_THROW(extract_features(img, FeatureKind::Gradient, 3), Error);
  EXPECT_THROW(extract_features(Image(4, 4, 1), FeatureKind::Rgb, 1), Error);
  EXPECT_EQ(parse_feature_kind("gradient"), FeatureKind::Gradient);
}

TEST(ExtractFeatures, ShiftEquivarianceAwayFromBorders) {
  std::mt19937_64 rng(3);
  const Image img = oracle::random_image(rng, 12, 14, 3);
  const int sx = 2, sy = 1;
  Image shifted(12, 14, 3, 0.0);
  for (int y = sy; y < 12; ++y) {
    for (int x = sx; x < 14; ++x) {
      for (int c = 0; c < 3; ++c) shifted(y, x, c) = img(y - sy, x - sx, c);
    }
  }
  for (FeatureKind kind : {FeatureKind::Intensity, FeatureKind::Rgb, FeatureKind::Gradient}) {
    const FeatureMap a = extract_features(img, kind, 1);
    const FeatureMap b = extract_features(shifted, kind, 1);
    for (int y = sy + 1; y < 11; ++y) {
      for (int x = sx + 1; x < 13; ++x) {
        for (int c = 0; c < a.channels(); ++c) {
          EXPECT_NEAR(b.data(y, x, c), a.data(y - sy, x - sx, c), 1e-12);
        }
      }
    }
  }
}

TEST(ExtractFeatures, GradientDependsOnlyOnThreeByThreeNeighbourhood) {
  std::mt19937_64 rng(4);
  Image img = oracle::random_image(rng, 9, 9, 3);
  const FeatureMap before = extract_features(img, FeatureKind::Gradient, 1);
  // Perturb everything outside the 3x3 block around (4, 4).
  for (int y = 0; y < 9; ++y) {
    for (int x = 0; x < 9; ++x) {
      if (std::abs(y - 4) <= 1 && std::abs(x - 4) <= 1) continue;
      for (int c = 0; c < 3; ++c) img(y, x, c) = 1.0 - img(y, x, c);
    }
  }
  const FeatureMap after = extract_features(img, FeatureKind::Gradient, 1);
  for (int c = 0; c < 3; ++c) EXPECT_EQ(before.data(4, 4, c), after.data(4, 4, c));
  for (double v : after.data.data()) EXPECT_TRUE(std::isfinite(v));
}

}  // namespace
}  // namespace sweepdepth
