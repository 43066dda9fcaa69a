#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include <Eigen/Core>
#include <Eigen/LU>

#include "sweepdepth/core.hpp"

namespace sweepdepth {

/// Pinhole intrinsics. Pixel centers are integer coordinates.
struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  static Intrinsics make(double fx, double fy, double cx, double cy, int width, int height) {
    Intrinsics k{fx, fy, cx, cy, width, height};
    k.validate();
    return k;
  }

  void validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "focal lengths must be positive");
    }
    if (width <= 0 || height <= 0) {
      throw Error(ErrorCode::InvalidArgument, "image size must be positive");
    }
    if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
      throw Error(ErrorCode::InvalidArgument, "principal point outside the image");
    }
  }

  /// Intrinsics of a feature map downsampled by `scale`: focal lengths and
  /// principal point divided by the factor, size rounded up.
  Intrinsics scaled(int scale) const {
    if (scale < 1) throw Error(ErrorCode::InvalidArgument, "scale must be >= 1");
    return Intrinsics{fx / scale,
                      fy / scale,
                      cx / scale,
                      cy / scale,
                      (width + scale - 1) / scale,
                      (height + scale - 1) / scale};
  }

  Eigen::Matrix3d matrix() const {
    Eigen::Matrix3d k;
    k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
    return k;
  }

  Eigen::Matrix3d inverse_matrix() const {
    Eigen::Matrix3d k;
    k << 1.0 / fx, 0.0, -cx / fx, 0.0, 1.0 / fy, -cy / fy, 0.0, 0.0, 1.0;
    return k;
  }
};

/**
 * Rigid transform X_dst = rotation * X_src + translation.
 *
 * As a relative pose T_{t->s} it maps points expressed in the target camera
 * into the source camera. As a camera pose it maps camera to world.
 */
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static constexpr double kOrthonormalTolerance = 1e-9;

  static Pose identity() { return {}; }

  static Pose make(const Eigen::Matrix3d& r, const Eigen::Vector3d& t) {
    Pose p{r, t};
    p.validate();
    return p;
  }

  static Pose translation_only(double tx, double ty, double tz) {
    Pose p;
    p.translation = Eigen::Vector3d(tx, ty, tz);
    return p;
  }

  void validate() const {
    const double ortho = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity())
                             .cwiseAbs()
                             .maxCoeff();
    if (!(ortho <= kOrthonormalTolerance) ||
        !(std::abs(rotation.determinant() - 1.0) <= kOrthonormalTolerance)) {
      throw Error(ErrorCode::InvalidArgument, "rotation is not a proper orthonormal matrix");
    }
    if (!translation.allFinite()) {
      throw Error(ErrorCode::InvalidArgument, "translation is not finite");
    }
  }

  Eigen::Vector3d apply(const Eigen::Vector3d& point) const {
    return rotation * point + translation;
  }

  Pose inverse() const {
    const Eigen::Matrix3d rt = rotation.transpose();
    return Pose{rt, -(rt * translation)};
  }

  /// (*this) o (other): apply `other` first.
  Pose compose(const Pose& other) const {
    return Pose{rotation * other.rotation, rotation * other.translation + translation};
  }

  /// Relative pose T_{target->source} from two camera-to-world poses.
  static Pose relative(const Pose& target_to_world, const Pose& source_to_world) {
    return source_to_world.inverse().compose(target_to_world);
  }
};

/// Continuous sampling coordinates plus a validity mask.
struct PixelGrid {
  Grid<double> u;
  Grid<double> v;
  Mask valid;

  PixelGrid() = default;
  PixelGrid(int height, int width) : u(height, width), v(height, width), valid(height, width) {}

  int height() const noexcept { return u.height(); }
  int width() const noexcept { return u.width(); }
};

inline Eigen::Vector3d backproject(double u, double v, double depth, const Intrinsics& k) {
  if (!(depth > 0.0)) throw Error(ErrorCode::NonPositiveDepth, "backproject requires depth > 0");
  return {(u - k.cx) * depth / k.fx, (v - k.cy) * depth / k.fy, depth};
}

/// Perspective projection; nullopt for points on or behind the image plane.
inline std::optional<Eigen::Vector2d> project(const Eigen::Vector3d& point, const Intrinsics& k) {
  if (!(point.z() > 0.0)) return std::nullopt;
  return Eigen::Vector2d(k.fx * point.x() / point.z() + k.cx, k.fy * point.y() / point.z() + k.cy);
}

namespace detail {

// Absorbs round-off from projecting a pixel centre back onto itself.
inline constexpr double kEdgeSlack = 1e-9;

inline bool inside(double u, double v, int width, int height) {
  return u >= -kEdgeSlack && u <= width - 1 + kEdgeSlack && v >= -kEdgeSlack && v <= height - 1 + kEdgeSlack;
}

inline void set_cell(PixelGrid& grid, int y, int x, const Eigen::Vector3d& p, const Intrinsics& k) {
  if (!(p.z() > 0.0)) {
    grid.u(y, x) = 0.0;
    grid.v(y, x) = 0.0;
    grid.valid(y, x) = 0;
    return;
  }
  const double u = k.fx * p.x() / p.z() + k.cx;
  const double v = k.fy * p.y() / p.z() + k.cy;
  grid.u(y, x) = u;
  grid.v(y, x) = v;
  grid.valid(y, x) = inside(u, v, k.width, k.height) ? 1 : 0;
}

}  // namespace detail

/// Per-pixel reprojection of `depth` (in the target camera) into the camera
/// reached by `target_to_source`.
inline PixelGrid reproject_grid(const DepthMap& depth, const Pose& target_to_source,
                                const Intrinsics& k) {
  if (depth.height() != k.height || depth.width() != k.width || depth.channels() != 1) {
    throw Error(ErrorCode::DimensionMismatch, "depth map does not match intrinsics");
  }
  require_positive(depth, "reproject_grid requires positive depths");
  PixelGrid grid(k.height, k.width);
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      const Eigen::Vector3d p = target_to_source.apply(backproject(x, y, depth(y, x), k));
      detail::set_cell(grid, y, x, p, k);
    }
  }
  return grid;
}

/**
 * Induced homography of the fronto-parallel plane z = depth in the target
 * camera: H = K (R + t n^T / depth) K^-1 with n = (0, 0, 1).
 *
 * Returns the matrix that maps homogeneous target pixels to homogeneous
 * source pixels. The third row of (R + t n^T / d) K^-1 x, times d, is the
 * source-camera depth.
 */
inline Eigen::Matrix3d plane_homography(double depth, const Pose& target_to_source,
                                        const Intrinsics& k) {
  if (!(depth > 0.0)) throw Error(ErrorCode::NonPositiveDepth, "plane depth must be positive");
  Eigen::Matrix3d m = target_to_source.rotation;
  m.col(2) += target_to_source.translation / depth;
  return k.matrix() * m * k.inverse_matrix();
}

/// Equivalent to reproject_grid on a constant map of value `depth`, computed
/// through the plane-induced homography.
inline PixelGrid plane_warp_grid(double depth, const Pose& target_to_source, const Intrinsics& k) {
  const Eigen::Matrix3d h = plane_homography(depth, target_to_source, k);
  PixelGrid grid(k.height, k.width);
  for (int y = 0; y < k.height; ++y) {
    // Row-incremental evaluation: h * (x, y, 1) = h.col(0) * x + (h.col(1) * y + h.col(2)).
    const Eigen::Vector3d row_base = h.col(1) * static_cast<double>(y) + h.col(2);
    for (int x = 0; x < k.width; ++x) {
      const Eigen::Vector3d q = h.col(0) * static_cast<double>(x) + row_base;
      if (!(q.z() > 0.0)) {
        grid.u(y, x) = 0.0;
        grid.v(y, x) = 0.0;
        grid.valid(y, x) = 0;
        continue;
      }
      const double u = q.x() / q.z();
      const double v = q.y() / q.z();
      grid.u(y, x) = u;
      grid.v(y, x) = v;
      grid.valid(y, x) = detail::inside(u, v, k.width, k.height) ? 1 : 0;
    }
  }
  return grid;
}

struct Sampled {
  Image values;
  Mask valid;
};

/// Bilinear interpolation at grid coordinates. Invalid or out-of-bounds
/// samples produce 0 and valid = 0; no edge clamping.
inline Sampled bilinear_sample(const Image& img, const PixelGrid& grid) {
  const int h = grid.height();
  const int w = grid.width();
  const int ch = img.channels();
  Sampled out{Image(h, w, ch, 0.0), Mask(h, w)};
  const int iw = img.width();
  const int ih = img.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!grid.valid(y, x)) continue;
      if (!detail::inside(grid.u(y, x), grid.v(y, x), iw, ih)) continue;
      const double u = std::clamp(grid.u(y, x), 0.0, iw - 1.0);
      const double v = std::clamp(grid.v(y, x), 0.0, ih - 1.0);
      int x0 = static_cast<int>(std::floor(u));
      int y0 = static_cast<int>(std::floor(v));
      // Keep the 2x2 stencil inside the image when sampling the last row/column.
      x0 = std::min(x0, std::max(iw - 2, 0));
      y0 = std::min(y0, std::max(ih - 2, 0));
      const int x1 = std::min(x0 + 1, iw - 1);
      const int y1 = std::min(y0 + 1, ih - 1);
      const double ax = u - x0;
      const double ay = v - y0;
      for (int c = 0; c < ch; ++c) {
        const double top = (1.0 - ax) * img(y0, x0, c) + ax * img(y0, x1, c);
        const double bottom = (1.0 - ax) * img(y1, x0, c) + ax * img(y1, x1, c);
        out.values(y, x, c) = (1.0 - ay) * top + ay * bottom;
      }
      out.valid(y, x) = 1;
    }
  }
  return out;
}

/// View synthesis: source image resampled into the target view through the
/// target depth and relative pose T_{target->source}.
inline Sampled synthesize_view(const Image& source, const DepthMap& target_depth,
                               const Pose& target_to_source, const Intrinsics& k) {
  return bilinear_sample(source, reproject_grid(target_depth, target_to_source, k));
}

}  // namespace sweepdepth
