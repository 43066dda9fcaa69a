#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sweepdepth/losses.hpp"

namespace sweepdepth {
namespace {

Mask full_mask(int h, int w, unsigned char v = 1) {
  Mask m(h, w);
  for (auto& x : m.data()) x = v;
  return m;
}

SynthesizedView view_of(const Image& img, unsigned char valid = 1) {
  return {img, full_mask(img.height(), img.width(), valid)};
}

TEST(Ssim, IdenticalImagesScoreOne) {
  std::mt19937_64 rng(1);
  const Image a = oracle::random_image(rng, 6, 7, 3);
  for (double v : ssim(a, a).data()) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(Ssim, BlackAgainstWhite) {
  // mu_a = 0, mu_b = 1, zero variance: (C1 * C2) / ((1 + C1) * C2).
  const double c1 = 1e-4;
  const double expected = c1 / (1.0 + c1);
  const Image s = ssim(Image(5, 5, 1, 0.0), Image(5, 5, 1, 1.0));
  for (double v : s.data()) EXPECT_NEAR(v, expected, 1e-15);
  EXPECT_NEAR(expected, 9.999e-5, 1e-8);
}

TEST(Ssim, ApproachesOneUnderVanishingNoise) {
  std::mt19937_64 rng(2);
  const Image a = oracle::random_image(rng, 8, 8, 1, 0.2, 0.8);
  double previous = -1;
  for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
    Image b = a;
    std::uniform_real_distribution<double> n(-eps, eps);
    for (double& v : b.data()) v += n(rng);
    const Image s = ssim(a, b);
    double lo = 1;
    for (double v : s.data()) lo = std::min(lo, v);
    EXPECT_GT(lo, previous);
    previous = lo;
  }
  EXPECT_GT(previous, 0.999);
}

TEST(Ssim, ShapeMismatch) {
  try {
    ssim(Image(3, 3, 1), Image(3, 4, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ShapeMismatch);
  }
}

TEST(PhotometricError, ZeroForIdenticalImages) {
  std::mt19937_64 rng(3);
  const Image a = oracle::random_image(rng, 5, 6, 3);
  for (double v : photometric_error(a, a).data()) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(PhotometricError, BlackAgainstWhite) {
  const double s = 1e-4 / (1.0 + 1e-4);
  const double expected = 0.85 / 2 * (1 - s) + 0.15;
  const Image pe = photometric_error(Image(5, 5, 3, 0.0), Image(5, 5, 3, 1.0));
  ASSERT_EQ(pe.channels(), 1);
  for (double v : pe.data()) EXPECT_NEAR(v, expected, 1e-12);
  EXPECT_NEAR(expected, 0.574957, 1e-6);
}

TEST(PhotometricError, AlphaZeroIsPureL1) {
  std::mt19937_64 rng(4);
  const Image a = oracle::random_image(rng, 4, 5, 2);
  const Image b = oracle::random_image(rng, 4, 5, 2);
  const Image pe = photometric_error(a, b, 0.0);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 5; ++x) {
      const double l1 = (std::abs(a(y, x, 0) - b(y, x, 0)) + std::abs(a(y, x, 1) - b(y, x, 1))) / 2;
      EXPECT_NEAR(pe(y, x), l1, 1e-15);
    }
  }
}

TEST(MinReprojection, PerfectSourceGivesZero) {
  std::mt19937_64 rng(5);
  const Image t = oracle::random_image(rng, 6, 6, 3);
  EXPECT_NEAR(min_reprojection_loss(t, {view_of(t)}).value, 0.0, 1e-12);
  const Image garbage = oracle::random_image(rng, 6, 6, 3);
  EXPECT_NEAR(min_reprojection_loss(t, {view_of(garbage), view_of(t)}).value, 0.0, 1e-12);
}

TEST(MinReprojection, ComplementaryHalves) {
  // Each source matches the target on its half and is garbage on the other.
  // Width 12 with a 3x3 SSIM window: each half is matched away from the seam,
  // so build each source to be perfect one column past its half as well.
  std::mt19937_64 rng(6);
  const Image t = oracle::random_image(rng, 6, 12, 1);
  Image left = oracle::random_image(rng, 6, 12, 1);
  Image right = oracle::random_image(rng, 6, 12, 1);
  for (int y = 0; y < 6; ++y) {
    for (int x = 0; x < 12; ++x) {
      if (x < 7) left(y, x) = t(y, x);
      if (x >= 5) right(y, x) = t(y, x);
    }
  }
  const ReprojectionLoss r = min_reprojection_loss(t, {view_of(left), view_of(right)});
  EXPECT_NEAR(r.value, 0.0, 1e-12);
  for (double v : r.per_pixel.data()) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(MinReprojection, PixelsWithoutValidSourceAreExcluded) {
  std::mt19937_64 rng(7);
  const Image t = oracle::random_image(rng, 4, 4, 1);
  const Image g = oracle::random_image(rng, 4, 4, 1);
  SynthesizedView v = view_of(g);
  v.valid(0, 0) = 0;
  const ReprojectionLoss r = min_reprojection_loss(t, {v});
  EXPECT_EQ(r.included(0, 0), 0);
  EXPECT_EQ(r.per_pixel(0, 0), 0.0);
  const ReprojectionLoss none = min_reprojection_loss(t, {view_of(g, 0)});
  EXPECT_EQ(none.value, 0.0);
}

TEST(MinReprojection, NonIncreasingAsSourcesAreAdded) {
  std::mt19937_64 rng(8);
  const Image t = oracle::random_image(rng, 8, 8, 3);
  std::vector<SynthesizedView> views;
  Image previous;
  for (int n = 0; n < 5; ++n) {
    views.push_back({oracle::random_image(rng, 8, 8, 3), oracle::random_mask(rng, 8, 8, 0.8)});
    const ReprojectionLoss r = min_reprojection_loss(t, views);
    if (n > 0) {
      for (int i = 0; i < 64; ++i) {
        // Pixels newly covered carry no previous value to compare with.
        if (previous.data()[i] > 0) EXPECT_LE(r.per_pixel.data()[i], previous.data()[i]);
      }
    }
    previous = r.per_pixel;
  }
}

TEST(MinReprojection, EmptySources) {
  try {
    min_reprojection_loss(Image(2, 2, 1), {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptySources);
  }
}

TEST(MinReprojection, MatchesOracle) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const Image t = oracle::random_image(rng, 8, 8, 3);
    std::vector<SynthesizedView> views;
    std::vector<Image> imgs;
    std::vector<Mask> masks;
    for (int s = 0; s < 1 + trial % 3; ++s) {
      imgs.push_back(oracle::random_image(rng, 8, 8, 3));
      masks.push_back(oracle::random_mask(rng, 8, 8, 0.7));
      views.push_back({imgs.back(), masks.back()});
    }
    EXPECT_NEAR(min_reprojection_loss(t, views).value, oracle::min_reprojection(t, imgs, masks), 1e-6);
  }
}

TEST(ConsistencyMask, GoldenCases) {
  const DepthMap d_hat(3, 3, 1, 2.0);
  for (auto [ratio, expected] : {std::pair{1.0, 0}, std::pair{2.0, 0}, std::pair{2.5, 1}, std::pair{0.5, 0},
                                 std::pair{0.4, 1}}) {
    const Mask m = consistency_mask(DepthMap(3, 3, 1, 2.0 * ratio), d_hat);
    for (auto v : m.data()) EXPECT_EQ(v, expected) << ratio;
  }
}

TEST(ConsistencyMask, InvariantToCommonScale) {
  std::mt19937_64 rng(10);
  const DepthMap a = oracle::random_image(rng, 10, 10, 1, 0.5, 5.0);
  const DepthMap b = oracle::random_image(rng, 10, 10, 1, 0.5, 5.0);
  const Mask ref = consistency_mask(a, b);
  for (double k : {0.25, 3.0, 17.0}) {
    DepthMap ka = a, kb = b;
    for (double& v : ka.data()) v *= k;
    for (double& v : kb.data()) v *= k;
    EXPECT_EQ(consistency_mask(ka, kb), ref) << k;
  }
}

TEST(ConsistencyMask, MatchesScalarLoop) {
  std::mt19937_64 rng(11);
  const DepthMap a = oracle::random_image(rng, 16, 16, 1, 0.1, 10.0);
  const DepthMap b = oracle::random_image(rng, 16, 16, 1, 0.1, 10.0);
  const Mask m = consistency_mask(a, b);
  int on = 0;
  for (int i = 0; i < 256; ++i) {
    EXPECT_EQ(m.data()[i] != 0, oracle::mask_value(a.data()[i], b.data()[i]));
    on += m.data()[i];
  }
  EXPECT_NEAR(mask_fraction(m), on / 256.0, 1e-15);
}

TEST(ConsistencyMask, RejectsNonPositiveDepth) {
  DepthMap a(2, 2, 1, 1.0);
  a(1, 1) = 0.0;
  try {
    consistency_mask(a, DepthMap(2, 2, 1, 1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonPositiveDepth);
  }
}

TEST(ConsistencyLoss, Examples) {
  const DepthMap teacher(4, 4, 1, 3.0);
  EXPECT_EQ(consistency_loss(DepthMap(4, 4, 1, 9.0), teacher, Mask(4, 4)), 0.0);
  EXPECT_NEAR(consistency_loss(DepthMap(4, 4, 1, 3.5), teacher, full_mask(4, 4)), 0.5, 1e-15);

  DepthMap student(4, 4, 1, 0.0);
  Mask half(4, 4);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) {
      half(y, x) = x < 2;
      student(y, x) = x < 2 ? 4.0 : 10.0;
    }
  }
  EXPECT_NEAR(consistency_loss(student, teacher, half), 0.5, 1e-15);
  EXPECT_THROW(consistency_loss(student, DepthMap(4, 3, 1, 1.0), half), Error);
}

TEST(Smoothness, ConstantDepthIsZero) {
  std::mt19937_64 rng(12);
  EXPECT_EQ(smoothness_loss(DepthMap(5, 6, 1, 4.0), oracle::random_image(rng, 5, 6, 3)), 0.0);
}

TEST(Smoothness, InvariantToDepthScale) {
  std::mt19937_64 rng(13);
  const DepthMap d = oracle::random_image(rng, 7, 9, 1, 0.5, 8.0);
  const Image img = oracle::random_image(rng, 7, 9, 3);
  const double ref = smoothness_loss(d, img);
  for (double k : {0.1, 2.0, 50.0}) {
    DepthMap kd = d;
    for (double& v : kd.data()) v *= k;
    EXPECT_NEAR(smoothness_loss(kd, img), ref, 1e-12 * ref);
  }
}

TEST(Smoothness, InverseDepthRampClosedForm) {
  // Inverse depth 1..5 across the row: mean 3, each x-step of the normalised
  // map is 1/3, no y variation, constant image.
  DepthMap d(4, 5);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 5; ++x) d(y, x) = 1.0 / (x + 1);
  }
  EXPECT_NEAR(smoothness_loss(d, Image(4, 5, 3, 0.5)), 1.0 / 3.0, 1e-12);
}

TEST(Smoothness, MatchesOracle) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const DepthMap d = oracle::random_image(rng, 8, 8, 1, 0.2, 20.0);
    const Image img = oracle::random_image(rng, 8, 8, 1 + 2 * (trial % 2));
    EXPECT_NEAR(smoothness_loss(d, img), oracle::smoothness(d, img), 1e-6);
  }
}

TEST(Smoothness, RejectsNonPositiveDepth) {
  DepthMap d(3, 3, 1, 1.0);
  d(0, 2) = -1.0;
  try {
    smoothness_loss(d, Image(3, 3, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonPositiveDepth);
  }
}

TEST(TotalLoss, AllZeroComposition) {
  std::mt19937_64 rng(15);
  const Image t = oracle::random_image(rng, 6, 6, 3);
  const DepthMap d(6, 6, 1, 2.0);
  const LossReport r = total_loss(t, {view_of(t)}, d, d, d, t);
  EXPECT_NEAR(r.total, 0.0, 1e-12);
  EXPECT_EQ(r.mask_fraction, 0.0);
}

TEST(TotalLoss, FullMaskSuppressesReprojection) {
  std::mt19937_64 rng(16);
  const Image t = oracle::random_image(rng, 6, 6, 3);
  const Image g = oracle::random_image(rng, 6, 6, 3);
  const DepthMap student = oracle::random_image(rng, 6, 6, 1, 1.0, 3.0);
  const DepthMap teacher(6, 6, 1, 2.0);
  const DepthMap cv(6, 6, 1, 9.0);
  const LossReport r = total_loss(t, {view_of(g)}, student, teacher, cv, t, {0.01, 0.85});
  EXPECT_EQ(r.mask_fraction, 1.0);
  EXPECT_GT(r.lp, 0.0);
  EXPECT_NEAR(r.total, r.lc + 0.01 * r.ls, 1e-15);
}

TEST(TotalLoss, MatchesOracleComposition) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const Image t = oracle::random_image(rng, 8, 8, 3);
    const Image v = oracle::random_image(rng, 8, 8, 3);
    const DepthMap student = oracle::random_image(rng, 8, 8, 1, 0.5, 5.0);
    const DepthMap teacher = oracle::random_image(rng, 8, 8, 1, 0.5, 5.0);
    const DepthMap cv = oracle::random_image(rng, 8, 8, 1, 0.5, 5.0);
    const LossReport r = total_loss(t, {view_of(v)}, student, teacher, cv, t);

    double masked = 0;
    Mask m(8, 8);
    for (int y = 0; y < 8; ++y) {
      for (int x = 0; x < 8; ++x) {
        m(y, x) = oracle::mask_value(cv(y, x), teacher(y, x));
        if (!m(y, x)) masked += oracle::pe_at(v, t, y, x) / 64;
      }
    }
    const double lc = oracle::consistency(student, teacher, m);
    const double ls = oracle::smoothness(student, t);
    EXPECT_NEAR(r.lc, lc, 1e-6);
    EXPECT_NEAR(r.ls, ls, 1e-6);
    EXPECT_NEAR(r.total, masked + lc + 1e-3 * ls, 1e-6);
    EXPECT_GE(r.lp, 0.0);
    EXPECT_GE(r.mask_fraction, 0.0);
    EXPECT_LE(r.mask_fraction, 1.0);
  }
}

}  // namespace
}  // namespace sweepdepth
