#include <random>

#include <Eigen/Geometry>
#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sweepdepth/geometry.hpp"

namespace sweepdepth {
namespace {

Intrinsics test_camera() { return Intrinsics::make(50.0, 55.0, 31.0, 23.0, 64, 48); }

Pose random_pose(std::mt19937_64& rng, double max_angle = 0.1, double max_t = 0.3) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Eigen::Vector3d axis = Eigen::Vector3d(u(rng), u(rng), u(rng)).normalized();
  const Eigen::Matrix3d r = Eigen::AngleAxisd(max_angle * u(rng), axis).toRotationMatrix();
  return Pose::make(r, Eigen::Vector3d(max_t * u(rng), max_t * u(rng), max_t * u(rng)));
}

DepthMap constant_depth(const Intrinsics& k, double d) { return DepthMap(k.height, k.width, 1, d); }

TEST(Backproject, PrincipalPointMapsToOpticalAxis) {
  const Intrinsics k = test_camera();
  const Eigen::Vector3d p = backproject(k.cx, k.cy, 5.0, k);
  EXPECT_EQ(p, Eigen::Vector3d(0, 0, 5.0));
}

TEST(Backproject, UnitFocalOffset) {
  const Intrinsics k = test_camera();
  const Eigen::Vector3d p = backproject(k.cx + k.fx, k.cy, 1.0, k);
  EXPECT_DOUBLE_EQ(p.x(), 1.0);
  EXPECT_DOUBLE_EQ(p.y(), 0.0);
  EXPECT_DOUBLE_EQ(p.z(), 1.0);
}

TEST(Backproject, HandComputedPoint) {
  const Intrinsics k = Intrinsics::make(200, 200, 96, 48, 192, 96);
  const Eigen::Vector3d p = backproject(100, 50, 2.0, k);
  EXPECT_NEAR(p.x(), 0.04, 1e-15);
  EXPECT_NEAR(p.y(), 0.02, 1e-15);
  EXPECT_DOUBLE_EQ(p.z(), 2.0);
}

TEST(Backproject, RejectsNonPositiveDepth) {
  const Intrinsics k = test_camera();
  for (double d : {0.0, -1.0}) {
    try {
      backproject(1, 1, d, k);
      FAIL() << "expected NonPositiveDepth";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::NonPositiveDepth);
    }
  }
}

TEST(Backproject, ProjectRoundTrip) {
  const Intrinsics k = test_camera();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pu(-20, 80), pd(1e-3, 1e3);
  for (int i = 0; i < 1000; ++i) {
    const double u = pu(rng), v = pu(rng), d = pd(rng);
    const auto px = project(backproject(u, v, d, k), k);
    ASSERT_TRUE(px);
    EXPECT_NEAR(px->x(), u, 1e-9);
    EXPECT_NEAR(px->y(), v, 1e-9);
  }
}

TEST(Intrinsics, Validation) {
  EXPECT_THROW(Intrinsics::make(0, 1, 1, 1, 4, 4), Error);
  EXPECT_THROW(Intrinsics::make(1, 1, 4, 1, 4, 4), Error);
  EXPECT_THROW(Intrinsics::make(1, 1, 1, -0.5, 4, 4), Error);
  EXPECT_NO_THROW(Intrinsics::make(1, 1, 0, 0, 4, 4));
}

TEST(Intrinsics, ScaledDividesByFactor) {
  const Intrinsics k = Intrinsics::make(64, 60, 31.5, 23.5, 63, 47).scaled(4);
  EXPECT_DOUBLE_EQ(k.fx, 16.0);
  EXPECT_DOUBLE_EQ(k.fy, 15.0);
  EXPECT_DOUBLE_EQ(k.cx, 31.5 / 4);
  EXPECT_EQ(k.width, 16);
  EXPECT_EQ(k.height, 12);
}

TEST(Pose, RejectsNonOrthonormalRotation) {
  Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
  r(0, 0) = 1.0 + 1e-6;
  EXPECT_THROW(Pose::make(r, Eigen::Vector3d::Zero()), Error);
  Eigen::Matrix3d reflection = Eigen::Matrix3d::Identity();
  reflection(2, 2) = -1;
  EXPECT_THROW(Pose::make(reflection, Eigen::Vector3d::Zero()), Error);
}

TEST(Pose, RelativeFromCameraPoses) {
  std::mt19937_64 rng(3);
  const Pose a = random_pose(rng), b = random_pose(rng);
  const Pose rel = Pose::relative(a, b);
  const Eigen::Vector3d p(0.3, -0.2, 2.0);
  // Same world point through either path.
  EXPECT_LT((b.apply(rel.apply(p)) - a.apply(p)).norm(), 1e-12);
}

TEST(ReprojectGrid, IdentityWarp) {
  const Intrinsics k = test_camera();
  std::mt19937_64 rng(1);
  DepthMap d = oracle::random_image(rng, k.height, k.width, 1, 0.5, 20.0);
  const PixelGrid g = reproject_grid(d, Pose::identity(), k);
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      EXPECT_NEAR(g.u(y, x), x, 1e-12);
      EXPECT_NEAR(g.v(y, x), y, 1e-12);
      EXPECT_EQ(g.valid(y, x), 1);
    }
  }
}

TEST(ReprojectGrid, ForwardMotionScalesAboutPrincipalPoint) {
  // Plane at depth 2, camera advances 1 unit: every point ends at depth 1,
  // so image offsets from the principal point double.
  const Intrinsics k = test_camera();
  const PixelGrid g = reproject_grid(constant_depth(k, 2.0), Pose::translation_only(0, 0, -1.0), k);
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      EXPECT_NEAR(g.u(y, x), k.cx + 2.0 * (x - k.cx), 1e-9);
      EXPECT_NEAR(g.v(y, x), k.cy + 2.0 * (y - k.cy), 1e-9);
    }
  }
  EXPECT_EQ(g.valid(static_cast<int>(k.cy), static_cast<int>(k.cx)), 1);
  EXPECT_EQ(g.valid(0, 0), 0);
}

TEST(ReprojectGrid, BehindCameraIsInvalid) {
  const Intrinsics k = test_camera();
  DepthMap d = constant_depth(k, 5.0);
  d(10, 10) = 1.0;
  const PixelGrid g = reproject_grid(d, Pose::translation_only(0, 0, -2.0), k);
  EXPECT_EQ(g.valid(10, 10), 0);
  EXPECT_EQ(g.valid(static_cast<int>(k.cy), static_cast<int>(k.cx)), 1);
}

TEST(ReprojectGrid, Errors) {
  const Intrinsics k = test_camera();
  try {
    reproject_grid(DepthMap(k.height, k.width + 1, 1, 1.0), Pose::identity(), k);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
  DepthMap bad = constant_depth(k, 1.0);
  bad(3, 3) = 0.0;
  try {
    reproject_grid(bad, Pose::identity(), k);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonPositiveDepth);
  }
}

TEST(ReprojectGrid, CompositionThroughIntermediateFrame) {
  const Intrinsics k = test_camera();
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const Pose t1 = random_pose(rng), t2 = random_pose(rng);
    const double depth = 3.0 + trial;
    const PixelGrid direct = reproject_grid(constant_depth(k, depth), t2.compose(t1), k);
    const PixelGrid first = reproject_grid(constant_depth(k, depth), t1, k);
    for (int y = 0; y < k.height; y += 3) {
      for (int x = 0; x < k.width; x += 3) {
        // Continue from the intermediate pixel with the intermediate depth.
        const double z1 = t1.apply(backproject(x, y, depth, k)).z();
        const auto second = project(t2.apply(backproject(first.u(y, x), first.v(y, x), z1, k)), k);
        ASSERT_TRUE(second);
        EXPECT_NEAR(second->x(), direct.u(y, x), 1e-6);
        EXPECT_NEAR(second->y(), direct.v(y, x), 1e-6);
      }
    }
  }
}

TEST(PlaneWarpGrid, IdentityGrid) {
  const Intrinsics k = test_camera();
  const PixelGrid g = plane_warp_grid(4.0, Pose::identity(), k);
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      EXPECT_NEAR(g.u(y, x), x, 1e-12);
      EXPECT_NEAR(g.v(y, x), y, 1e-12);
      EXPECT_EQ(g.valid(y, x), 1);
    }
  }
}

TEST(PlaneWarpGrid, MatchesPerPixelReprojection) {
  const Intrinsics k = test_camera();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ud(0.5, 30.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Pose t = random_pose(rng, 0.2, 0.5);
    const double d = ud(rng);
    const PixelGrid h = plane_warp_grid(d, t, k);
    const PixelGrid r = reproject_grid(constant_depth(k, d), t, k);
    for (int y = 0; y < k.height; ++y) {
      for (int x = 0; x < k.width; ++x) {
        ASSERT_EQ(h.valid(y, x), r.valid(y, x)) << y << "," << x;
        if (!r.valid(y, x)) continue;
        EXPECT_NEAR(h.u(y, x), r.u(y, x), 1e-6);
        EXPECT_NEAR(h.v(y, x), r.v(y, x), 1e-6);
      }
    }
  }
}

TEST(PlaneWarpGrid, LateralShiftIsStereoDisparity) {
  const Intrinsics k = test_camera();
  for (double d : {1.0, 2.5, 7.0}) {
    const double tx = 0.1;
    const PixelGrid g = plane_warp_grid(d, Pose::translation_only(tx, 0, 0), k);
    for (int y = 0; y < k.height; y += 5) {
      for (int x = 0; x < k.width; x += 5) {
        EXPECT_NEAR(g.u(y, x) - x, k.fx * tx / d, 1e-9);
        EXPECT_NEAR(g.v(y, x), y, 1e-9);
      }
    }
  }
}

TEST(PlaneWarpGrid, RejectsNonPositiveDepth) {
  try {
    plane_warp_grid(0.0, Pose::identity(), test_camera());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonPositiveDepth);
  }
}

PixelGrid grid_from(int h, int w, double du, double dv) {
  PixelGrid g(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      g.u(y, x) = x + du;
      g.v(y, x) = y + dv;
      g.valid(y, x) = 1;
    }
  }
  return g;
}

TEST(BilinearSample, IntegerCoordinatesAreExact) {
  std::mt19937_64 rng(2);
  const Image img = oracle::random_image(rng, 6, 9, 3);
  const Sampled s = bilinear_sample(img, grid_from(6, 9, 0, 0));
  EXPECT_EQ(s.values, img);
  for (auto v : s.valid.data()) EXPECT_EQ(v, 1);
}

TEST(BilinearSample, HalfPixelOnRampIsMidpoint) {
  Image ramp(4, 6);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 6; ++x) ramp(y, x) = 0.1 * x;
  }
  PixelGrid g(1, 1);
  g.u(0, 0) = 2.5;
  g.v(0, 0) = 1.0;
  g.valid(0, 0) = 1;
  const Sampled s = bilinear_sample(ramp, g);
  EXPECT_NEAR(s.values(0, 0), 0.5 * (ramp(1, 2) + ramp(1, 3)), 1e-15);
}

TEST(BilinearSample, OutOfBoundsIsZeroAndInvalid) {
  std::mt19937_64 rng(4);
  const Image img = oracle::random_image(rng, 5, 5, 2);
  for (auto [du, dv] : {std::pair{10.0, 0.0}, std::pair{-5.5, 0.0}, std::pair{0.0, 5.01}}) {
    const Sampled s = bilinear_sample(img, grid_from(5, 5, du, dv));
    for (double v : s.values.data()) EXPECT_EQ(v, 0.0);
    for (auto v : s.valid.data()) EXPECT_EQ(v, 0);
  }
  const Sampled s = bilinear_sample(img, grid_from(5, 5, 4.0, 0));
  EXPECT_EQ(s.valid(0, 0), 1);  // u = 4 is the last column; x >= 1 falls off
  EXPECT_EQ(s.valid(0, 1), 0);
  EXPECT_EQ(s.values(0, 1, 0), 0.0);
}

TEST(BilinearSample, InvalidGridCellsAreSkipped) {
  std::mt19937_64 rng(8);
  const Image img = oracle::random_image(rng, 4, 4, 1);
  PixelGrid g = grid_from(4, 4, 0, 0);
  g.valid(1, 2) = 0;
  const Sampled s = bilinear_sample(img, g);
  EXPECT_EQ(s.valid(1, 2), 0);
  EXPECT_EQ(s.values(1, 2), 0.0);
}

TEST(BilinearSample, ExactOnAffineImages) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> coef(-1, 1), pu(0, 15), pv(0, 11);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = coef(rng), b = coef(rng), c = coef(rng);
    Image img(12, 16);
    for (int y = 0; y < 12; ++y) {
      for (int x = 0; x < 16; ++x) img(y, x) = a * x + b * y + c;
    }
    PixelGrid g(8, 8);
    for (int i = 0; i < 64; ++i) {
      g.u.data()[i] = pu(rng);
      g.v.data()[i] = pv(rng);
      g.valid.data()[i] = 1;
    }
    g.u(0, 0) = 15.0;  // last column and row exercise the edge stencil
    g.v(0, 0) = 11.0;
    const Sampled s = bilinear_sample(img, g);
    for (int i = 0; i < 64; ++i) {
      ASSERT_EQ(s.valid.data()[i], 1);
      EXPECT_NEAR(s.values.data()[i], a * g.u.data()[i] + b * g.v.data()[i] + c, 1e-9);
    }
  }
}

}  // namespace
}  // namespace sweepdepth
