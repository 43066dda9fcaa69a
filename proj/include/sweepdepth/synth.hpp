#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Geometry>

#include "sweepdepth/augment.hpp"
#include "sweepdepth/core.hpp"
#include "sweepdepth/geometry.hpp"

namespace sweepdepth::synth {

enum class TextureKind { Grating, Checker, ValueNoise, Constant };

inline TextureKind parse_texture_kind(std::string_view s) {
  if (s == "grating") return TextureKind::Grating;
  if (s == "checker") return TextureKind::Checker;
  if (s == "value_noise") return TextureKind::ValueNoise;
  if (s == "constant") return TextureKind::Constant;
  throw Error(ErrorCode::InvalidArgument, "unknown texture kind '" + std::string(s) + "'");
}

constexpr std::string_view to_string(TextureKind k) {
  switch (k) {
    case TextureKind::Grating: return "grating";
    case TextureKind::Checker: return "checker";
    case TextureKind::ValueNoise: return "value_noise";
    case TextureKind::Constant: return "constant";
  }
  return "?";
}

/// Procedural texture over plane coordinates (scene units). `frequency` is
/// in cycles per scene unit; output is 0.5 + amplitude * pattern in [-1, 1].
struct Texture {
  TextureKind kind = TextureKind::Grating;
  double frequency = 1.0;
  double amplitude = 0.3;
  std::uint64_t seed = 0;

  double operator()(double s, double t) const {
    switch (kind) {
      case TextureKind::Constant:
        return 0.5;
      case TextureKind::Checker: {
        const auto cs = static_cast<long long>(std::floor(s * frequency));
        const auto ct = static_cast<long long>(std::floor(t * frequency));
        return 0.5 + (((cs + ct) & 1) ? amplitude : -amplitude);
      }
      case TextureKind::Grating:
        return 0.5 + amplitude * grating(s, t);
      case TextureKind::ValueNoise:
        return 0.5 + amplitude * value_noise(s * frequency, t * frequency);
    }
    return 0.5;
  }

 private:
  static constexpr int kGratingComponents = 3;

  double unit(std::uint64_t a, std::uint64_t b) const {
    const std::uint64_t h = CounterRng::mix(seed ^ CounterRng::mix(a * 0x9E3779B97F4A7C15ULL + b));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
  }

  /// Sum of three sinusoids with seeded orientations and phases, normalised
  /// to [-1, 1].
  double grating(double s, double t) const {
    static constexpr std::array<double, kGratingComponents> kFreqScale{1.0, 1.37, 0.71};
    static constexpr std::array<double, kGratingComponents> kWeight{0.5, 0.3, 0.2};
    double acc = 0.0;
    for (int k = 0; k < kGratingComponents; ++k) {
      const double theta = std::numbers::pi * unit(1, k);
      const double phase = 2.0 * std::numbers::pi * unit(2, k);
      const double f = frequency * kFreqScale[k];
      acc += kWeight[k] *
             std::sin(2.0 * std::numbers::pi * f * (std::cos(theta) * s + std::sin(theta) * t) + phase);
    }
    return acc;
  }

  double lattice(long long i, long long j) const {
    return 2.0 * unit(static_cast<std::uint64_t>(i) * 0x85EBCA6BULL, static_cast<std::uint64_t>(j)) - 1.0;
  }

  /// Lattice noise with quintic fade, C2 across cell borders.
  double value_noise(double s, double t) const {
    const double fs = std::floor(s);
    const double ft = std::floor(t);
    const auto i = static_cast<long long>(fs);
    const auto j = static_cast<long long>(ft);
    const auto fade = [](double a) { return a * a * a * (a * (a * 6.0 - 15.0) + 10.0); };
    const double a = fade(s - fs);
    const double b = fade(t - ft);
    const double top = (1 - a) * lattice(i, j) + a * lattice(i + 1, j);
    const double bottom = (1 - a) * lattice(i, j + 1) + a * lattice(i + 1, j + 1);
    return (1 - b) * top + b * bottom;
  }
};

struct Extent {
  double s_min = 0.0;
  double s_max = 0.0;
  double t_min = 0.0;
  double t_max = 0.0;
};

/// Textured plane through `origin` spanned by orthonormal `s_axis`, `t_axis`
/// (world frame). Unbounded unless `extent` is set. Moves by `velocity` per
/// time step, carrying its texture along.
struct PlaneElement {
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  Eigen::Vector3d s_axis = Eigen::Vector3d::UnitX();
  Eigen::Vector3d t_axis = Eigen::Vector3d::UnitY();
  std::optional<Extent> extent;
  Texture texture;
  std::array<double, 3> albedo{1.0, 1.0, 1.0};
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();

  Eigen::Vector3d normal() const { return s_axis.cross(t_axis); }
};

struct Scene {
  std::vector<PlaneElement> planes;
  std::optional<PlaneElement> mover;
};

struct Frame {
  Image image;
  DepthMap depth_gt;
  /// Camera-to-world.
  Pose pose;
  int time = 0;
  /// 1 where the mover is the visible surface.
  Mask mover;
};

/// Fronto-parallel rectangle at world depth z: s spans [x0, x1], t spans [y0, y1].
inline PlaneElement fronto_rect(double x0, double x1, double y0, double y1, double z, Texture tex,
                                std::array<double, 3> albedo = {1, 1, 1}) {
  PlaneElement e;
  e.origin = Eigen::Vector3d(0, 0, z);
  e.extent = Extent{x0, x1, y0, y1};
  e.texture = tex;
  e.albedo = albedo;
  return e;
}

inline PlaneElement fronto_plane(double z, Texture tex, std::array<double, 3> albedo = {1, 1, 1}) {
  PlaneElement e;
  e.origin = Eigen::Vector3d(0, 0, z);
  e.texture = tex;
  e.albedo = albedo;
  return e;
}

/// Ray hit: parameter along a camera ray whose camera-frame z is 1, i.e.
/// the hit depth.
struct Hit {
  double depth = 0.0;
  double s = 0.0;
  double t = 0.0;
};

inline std::optional<Hit> intersect(const PlaneElement& e, double time, const Eigen::Vector3d& center,
                                    const Eigen::Vector3d& dir) {
  const Eigen::Vector3d n = e.normal();
  const double denom = n.dot(dir);
  if (std::abs(denom) < 1e-12) return std::nullopt;
  const Eigen::Vector3d origin = e.origin + time * e.velocity;
  const double depth = n.dot(origin - center) / denom;
  if (!(depth > 0.0)) return std::nullopt;
  const Eigen::Vector3d rel = center + depth * dir - origin;
  const double s = rel.dot(e.s_axis);
  const double t = rel.dot(e.t_axis);
  if (e.extent && (s < e.extent->s_min || s > e.extent->s_max || t < e.extent->t_min || t > e.extent->t_max)) {
    return std::nullopt;
  }
  return Hit{depth, s, t};
}

/// Point-sampled render: nearest hit per pixel, no anti-aliasing. Depth is
/// the camera-frame z of the hit.
inline Frame render(const Scene& scene, const Pose& camera_to_world, const Intrinsics& k, int time) {
  Frame f{Image(k.height, k.width, 3), DepthMap(k.height, k.width), camera_to_world, time,
          Mask(k.height, k.width)};
  const Eigen::Vector3d center = camera_to_world.translation;
  const double t = static_cast<double>(time);
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      const Eigen::Vector3d ray_cam((x - k.cx) / k.fx, (y - k.cy) / k.fy, 1.0);
      const Eigen::Vector3d dir = camera_to_world.rotation * ray_cam;
      std::optional<Hit> best;
      const PlaneElement* best_element = nullptr;
      bool best_is_mover = false;
      const auto consider = [&](const PlaneElement& e, bool is_mover) {
        const auto hit = intersect(e, t, center, dir);
        if (hit && (!best || hit->depth < best->depth)) {
          best = hit;
          best_element = &e;
          best_is_mover = is_mover;
        }
      };
      for (const auto& e : scene.planes) consider(e, false);
      if (scene.mover) consider(*scene.mover, true);
      if (!best) {
        throw Error(ErrorCode::DegenerateRay,
                    "no scene element along the ray of pixel (" + std::to_string(x) + ", " + std::to_string(y) + ")");
      }
      const double value = best_element->texture(best->s, best->t);
      for (int c = 0; c < 3; ++c) f.image(y, x, c) = std::clamp(best_element->albedo[c] * value, 0.0, 1.0);
      f.depth_gt(y, x) = best->depth;
      f.mover(y, x) = best_is_mover ? 1 : 0;
    }
  }
  return f;
}

struct Sequence {
  std::vector<Frame> frames;
  Intrinsics intrinsics;

  /// Exact T_{target->source} between two frames.
  Pose relative(int target, int source) const {
    return Pose::relative(frames.at(target).pose, frames.at(source).pose);
  }
};

inline Sequence make_sequence(const Scene& scene, const std::vector<Pose>& camera_motion, const Intrinsics& k) {
  if (camera_motion.size() < 2) throw Error(ErrorCode::InvalidArgument, "a sequence needs at least two poses");
  Sequence seq;
  seq.intrinsics = k;
  seq.frames.reserve(camera_motion.size());
  for (std::size_t i = 0; i < camera_motion.size(); ++i) {
    seq.frames.push_back(render(scene, camera_motion[i], k, static_cast<int>(i)));
  }
  return seq;
}

/// Pixel-space bounding box of the mover's rectangle as seen from `camera`
/// at `time`; inclusive continuous bounds.
struct Footprint {
  double u_min = 0.0;
  double u_max = 0.0;
  double v_min = 0.0;
  double v_max = 0.0;
};

inline std::optional<Footprint> mover_footprint(const Scene& scene, const Pose& camera_to_world,
                                                const Intrinsics& k, int time) {
  if (!scene.mover || !scene.mover->extent) return std::nullopt;
  const PlaneElement& m = *scene.mover;
  const Eigen::Vector3d origin = m.origin + static_cast<double>(time) * m.velocity;
  const Pose world_to_camera = camera_to_world.inverse();
  Footprint fp{1e300, -1e300, 1e300, -1e300};
  for (double s : {m.extent->s_min, m.extent->s_max}) {
    for (double t : {m.extent->t_min, m.extent->t_max}) {
      const auto px = project(world_to_camera.apply(origin + s * m.s_axis + t * m.t_axis), k);
      if (!px) return std::nullopt;
      fp.u_min = std::min(fp.u_min, px->x());
      fp.u_max = std::max(fp.u_max, px->x());
      fp.v_min = std::min(fp.v_min, px->y());
      fp.v_max = std::max(fp.v_max, px->y());
    }
  }
  return fp;
}

/// Pixels whose centers fall inside the footprint.
inline Mask footprint_mask(const Footprint& fp, int height, int width) {
  Mask m(height, width);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      m(y, x) = (x >= fp.u_min && x <= fp.u_max && y >= fp.v_min && y <= fp.v_max) ? 1 : 0;
    }
  }
  return m;
}

/// Pixels whose 3x3 grey neighbourhood has standard deviation above
/// `threshold`.
inline Mask textured_mask(const Image& img, double threshold = 0.01) {
  const Image g = to_gray(img);
  Mask m(g.height(), g.width());
  for (int y = 0; y < g.height(); ++y) {
    for (int x = 0; x < g.width(); ++x) {
      double s = 0, ss = 0;
      int n = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int yy = y + dy;
          const int xx = x + dx;
          if (yy < 0 || xx < 0 || yy >= g.height() || xx >= g.width()) continue;
          s += g(yy, xx);
          ss += g(yy, xx) * g(yy, xx);
          ++n;
        }
      }
      const double mean = s / n;
      m(y, x) = std::sqrt(std::max(ss / n - mean * mean, 0.0)) > threshold ? 1 : 0;
    }
  }
  return m;
}

/**
 * Target pixels whose reprojection lands on the same surface in the source
 * frame. Inverse depth is affine in pixel coordinates on a plane, so the
 * bilinearly interpolated source inverse depth must agree with the
 * reprojected point to within `rel_tol`; occlusion boundaries fail this.
 * Mover pixels in either frame are excluded.
 */
inline Mask covisible_static(const Frame& target, const Frame& source, const Intrinsics& k,
                             double rel_tol = 1e-6) {
  const Pose rel = Pose::relative(target.pose, source.pose);
  const PixelGrid grid = reproject_grid(target.depth_gt, rel, k);
  Mask m(k.height, k.width);
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      if (!grid.valid(y, x) || target.mover(y, x)) continue;
      const double z = rel.apply(backproject(x, y, target.depth_gt(y, x), k)).z();
      const double u = grid.u(y, x);
      const double v = grid.v(y, x);
      const int x0 = std::min(static_cast<int>(u), std::max(k.width - 2, 0));
      const int y0 = std::min(static_cast<int>(v), std::max(k.height - 2, 0));
      const int x1 = std::min(x0 + 1, k.width - 1);
      const int y1 = std::min(y0 + 1, k.height - 1);
      const double ax = u - x0;
      const double ay = v - y0;
      const auto inv = [&](int yy, int xx) { return 1.0 / source.depth_gt(yy, xx); };
      const double interp = (1 - ay) * ((1 - ax) * inv(y0, x0) + ax * inv(y0, x1)) +
                            ay * ((1 - ax) * inv(y1, x0) + ax * inv(y1, x1));
      const bool mover = source.mover(y0, x0) || source.mover(y0, x1) || source.mover(y1, x0) ||
                         source.mover(y1, x1);
      m(y, x) = (!mover && std::abs(interp - 1.0 / z) <= rel_tol / z) ? 1 : 0;
    }
  }
  return m;
}

/// Keeps pixels whose whole 3x3 neighbourhood is set; borders are cleared.
inline Mask erode3x3(const Mask& in) {
  Mask out(in.height(), in.width());
  for (int y = 1; y + 1 < in.height(); ++y) {
    for (int x = 1; x + 1 < in.width(); ++x) {
      bool all = true;
      for (int dy = -1; dy <= 1 && all; ++dy) {
        for (int dx = -1; dx <= 1 && all; ++dx) all = in(y + dy, x + dx) != 0;
      }
      out(y, x) = all ? 1 : 0;
    }
  }
  return out;
}

}  // namespace sweepdepth::synth
