#pragma once

// Analytic synthetic scenes with exact depth, used as ground truth for tests
// and for the `synth` subcommand.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "panogeo/pano_io.h"
#include "panogeo/rigid_motion.h"
#include "panogeo/sphere_geom.h"

namespace panogeo {

// Solid axis-aligned block inside the room, in box coordinates.
struct Obstacle {
  Vec3 min;
  Vec3 max;
  Vec3 color{0.5, 0.5, 0.5};
};

// Interior of an axis-aligned room. Face order: +x, -x, +y, -y, +z, -z.
struct BoxScene {
  Vec3 half_extents{2.0, 1.5, 2.5};
  std::array<Vec3, 6> face_colors;
  Pose box_pose = Pose::identity();  // box-to-world
  std::vector<Obstacle> obstacles;

  BoxScene();
  // Largest distance between any two points of the room.
  double room_size() const { return 2.0 * half_extents.norm(); }
  // Throws ContractError unless the world-space point is strictly inside the
  // room and outside every obstacle.
  void check_camera(const Vec3& world_center) const;
};

// Interior of a sphere.
struct SphereScene {
  Vec3 center = Vec3::Zero();
  double radius = 3.0;
};

DepthMap box_depth(const BoxScene& scene, const Pose& cam, int width, int height);
// Exit-face color blended smoothly toward neighboring faces near edges, times
// a low-frequency gradient over the surface.
EquirectImage box_rgb(const BoxScene& scene, const Pose& cam, int width, int height);

DepthMap sphere_depth(const SphereScene& scene, const Pose& cam, int width, int height);
EquirectImage sphere_rgb(const SphereScene& scene, const Pose& cam, int width, int height);

// Distance along a world-space ray (unit `dir`) to the first surface.
double box_ray_distance(const BoxScene& scene, const Vec3& origin, const Vec3& dir);

struct Trajectory {
  std::vector<Pose> poses;
  double spacing = 0.0;  // meters between consecutive centers
  double jitter = 0.0;   // radians of per-frame rotation noise
};

// Smooth walk that starts at the room center and reflects off an inner
// margin, so every center stays strictly inside the room.
Trajectory make_trajectory(const BoxScene& scene, int frames, double spacing, double jitter,
                           std::uint64_t seed);
Trajectory make_trajectory(const SphereScene& scene, int frames, double spacing, double jitter,
                           std::uint64_t seed);

// Sum of a few low-order spherical waves; smooth everywhere including the
// poles and the seam.
EquirectImage smooth_panorama(int width, int height, std::uint64_t seed);

enum class SceneKind { kBox, kSphere };

struct SceneSetConfig {
  SceneKind kind = SceneKind::kBox;
  int frames = 3;
  int width = 1024;
  int height = 512;
  double spacing = 0.3;
  double jitter = 0.1;
};

struct SceneSet {
  std::vector<FrameTriplet> frames;
  nlohmann::json scene;  // metadata stored in the manifest
};

SceneSet render_scene_set(const SceneSetConfig& cfg, std::uint64_t seed);

// Renders and writes <out_dir>/frame_XXX_{rgb,depth,pose} plus
// <out_dir>/manifest.json. Creates out_dir if needed.
Manifest gen_scene_set(const SceneSetConfig& cfg, std::uint64_t seed,
                       const std::filesystem::path& out_dir);

}  // namespace panogeo
