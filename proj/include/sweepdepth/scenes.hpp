#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "sweepdepth/io.hpp"
#include "sweepdepth/synth.hpp"

namespace sweepdepth::synth {

/// A renderable setup: scene, per-frame camera-to-world poses, intrinsics.
struct SceneSetup {
  std::string name;
  Scene scene;
  std::vector<Pose> camera_motion;
  Intrinsics intrinsics;
};

inline constexpr int kDefaultWidth = 64;
inline constexpr int kDefaultHeight = 48;

inline Intrinsics default_intrinsics() {
  return Intrinsics::make(64.0, 64.0, 31.5, 23.5, kDefaultWidth, kDefaultHeight);
}

inline std::vector<std::string> preset_names() {
  return {"static_lateral", "static_forward", "moving_box", "static_camera", "textureless_band"};
}

namespace detail {

inline std::vector<Pose> lateral_motion(double baseline, int frames = 3) {
  std::vector<Pose> poses;
  for (int i = 0; i < frames; ++i) poses.push_back(Pose::translation_only(baseline * (i - 1), 0, 0));
  return poses;
}

/// Wall at depth 3 and a ground plane 0.6 below the optical axis.
inline Scene backdrop(std::uint64_t seed) {
  Scene s;
  s.planes.push_back(fronto_plane(3.0, Texture{TextureKind::Grating, 1.5, 0.3, seed + 1}, {0.9, 0.85, 0.75}));
  PlaneElement ground;
  ground.origin = Eigen::Vector3d(0, 0.6, 0);
  ground.s_axis = Eigen::Vector3d::UnitX();
  ground.t_axis = Eigen::Vector3d::UnitZ();
  ground.texture = Texture{TextureKind::ValueNoise, 3.0, 0.35, seed + 2};
  ground.albedo = {0.7, 0.75, 0.8};
  s.planes.push_back(ground);
  return s;
}

}  // namespace detail

/// Bundled scenes; `seed` varies only the texture patterns.
inline SceneSetup preset(std::string_view name, std::uint64_t seed = 0) {
  SceneSetup setup{std::string(name), detail::backdrop(seed), {}, default_intrinsics()};
  if (name == "static_lateral") {
    setup.scene.planes.push_back(
        fronto_rect(-0.55, 0.05, -0.45, 0.15, 1.8, Texture{TextureKind::Grating, 2.5, 0.3, seed + 3}, {0.8, 0.9, 1.0}));
    setup.camera_motion = detail::lateral_motion(0.1);
  } else if (name == "static_forward") {
    setup.scene.planes.push_back(
        fronto_rect(-0.55, 0.05, -0.45, 0.15, 1.8, Texture{TextureKind::Grating, 2.5, 0.3, seed + 3}, {0.8, 0.9, 1.0}));
    for (int i = 0; i < 3; ++i) setup.camera_motion.push_back(Pose::translation_only(0, 0, 0.2 * (i - 1)));
  } else if (name == "moving_box") {
    // Moves with the camera, so it stays put in the image: no parallax.
    PlaneElement box =
        fronto_rect(-0.3, 0.3, -0.35, 0.25, 2.0, Texture{TextureKind::Grating, 2.5, 0.3, seed + 4}, {1.0, 0.8, 0.7});
    box.origin.x() = -0.1;
    box.velocity = Eigen::Vector3d(0.1, 0, 0);
    setup.scene.mover = box;
    setup.camera_motion = detail::lateral_motion(0.1);
  } else if (name == "static_camera") {
    setup.scene.planes.push_back(
        fronto_rect(-0.55, 0.05, -0.45, 0.15, 1.8, Texture{TextureKind::Grating, 2.5, 0.3, seed + 3}, {0.8, 0.9, 1.0}));
    setup.camera_motion = {Pose::identity(), Pose::identity(), Pose::identity()};
  } else if (name == "textureless_band") {
    setup.scene.planes.push_back(
        fronto_rect(-10.0, 10.0, -0.25, 0.15, 2.5, Texture{TextureKind::Constant, 0.0, 0.0, 0}, {0.6, 0.6, 0.6}));
    setup.camera_motion = detail::lateral_motion(0.1);
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown scene preset '" + std::string(name) + "'");
  }
  return setup;
}

// Scene description JSON -------------------------------------------------------

namespace detail {

inline Eigen::Vector3d vec3(const io::json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 3) throw Error(ErrorCode::MalformedHeader, "expected a 3-vector");
  return {v[0], v[1], v[2]};
}

inline io::json vec3_json(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }

inline io::json texture_json(const Texture& t) {
  return {{"kind", std::string(to_string(t.kind))}, {"frequency", t.frequency}, {"amplitude", t.amplitude}, {"seed", t.seed}};
}

inline Texture texture_from_json(const io::json& j) {
  Texture t;
  t.kind = parse_texture_kind(j.at("kind").get<std::string>());
  t.frequency = j.value("frequency", 1.0);
  t.amplitude = j.value("amplitude", 0.3);
  t.seed = j.value("seed", std::uint64_t{0});
  return t;
}

inline io::json element_json(const PlaneElement& e) {
  io::json j = {{"origin", vec3_json(e.origin)},
                {"s_axis", vec3_json(e.s_axis)},
                {"t_axis", vec3_json(e.t_axis)},
                {"texture", texture_json(e.texture)},
                {"albedo", e.albedo},
                {"velocity", vec3_json(e.velocity)}};
  if (e.extent) j["extent"] = {e.extent->s_min, e.extent->s_max, e.extent->t_min, e.extent->t_max};
  return j;
}

inline PlaneElement element_from_json(const io::json& j) {
  PlaneElement e;
  e.origin = vec3(j.at("origin"));
  if (j.contains("s_axis")) e.s_axis = vec3(j.at("s_axis"));
  if (j.contains("t_axis")) e.t_axis = vec3(j.at("t_axis"));
  if (std::abs(e.s_axis.norm() - 1.0) > 1e-9 || std::abs(e.t_axis.norm() - 1.0) > 1e-9 ||
      std::abs(e.s_axis.dot(e.t_axis)) > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "plane axes must be orthonormal");
  }
  if (j.contains("extent")) {
    const auto x = j.at("extent").get<std::vector<double>>();
    if (x.size() != 4 || !(x[0] < x[1]) || !(x[2] < x[3])) {
      throw Error(ErrorCode::InvalidArgument, "extent must be [s_min, s_max, t_min, t_max]");
    }
    e.extent = Extent{x[0], x[1], x[2], x[3]};
  }
  e.texture = texture_from_json(j.at("texture"));
  if (j.contains("albedo")) e.albedo = j.at("albedo").get<std::array<double, 3>>();
  if (j.contains("velocity")) e.velocity = vec3(j.at("velocity"));
  return e;
}

}  // namespace detail

/// {"name", "intrinsics", "planes": [...], "mover"?: {...}, "motion": [pose, ...]}.
inline io::json scene_to_json(const SceneSetup& s) {
  io::json planes = io::json::array();
  for (const auto& p : s.scene.planes) planes.push_back(detail::element_json(p));
  io::json motion = io::json::array();
  for (const auto& p : s.camera_motion) motion.push_back(io::pose_to_json(p));
  io::json j = {{"name", s.name}, {"intrinsics", io::intrinsics_to_json(s.intrinsics)}, {"planes", planes}, {"motion", motion}};
  if (s.scene.mover) j["mover"] = detail::element_json(*s.scene.mover);
  return j;
}

inline SceneSetup scene_from_json(const io::json& j) {
  try {
    SceneSetup s;
    s.name = j.value("name", std::string("custom"));
    s.intrinsics = j.contains("intrinsics") ? io::intrinsics_from_json(j.at("intrinsics")) : default_intrinsics();
    for (const auto& p : j.at("planes")) s.scene.planes.push_back(detail::element_from_json(p));
    if (j.contains("mover")) s.scene.mover = detail::element_from_json(j.at("mover"));
    for (const auto& p : j.at("motion")) s.camera_motion.push_back(io::pose_from_json(p));
    if (s.camera_motion.size() < 2) throw Error(ErrorCode::InvalidArgument, "scene motion needs at least two poses");
    return s;
  } catch (const io::json::exception& e) {
    throw Error(ErrorCode::MalformedHeader, std::string("scene file: ") + e.what());
  }
}

}  // namespace sweepdepth::synth
