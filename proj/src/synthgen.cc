#include "panogeo/synthgen.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "panogeo/error.h"
#include "panogeo/parallel.h"

namespace panogeo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;
constexpr double kFaceSharpness = 6.0;

struct Hit {
  double t = kInf;
  int obstacle = -1;  // -1 for the room walls
};

// Ray from inside the room, in box coordinates.
Hit trace_box(const BoxScene& s, const Vec3& o, const Vec3& d) {
  Hit hit;
  for (int a = 0; a < 3; ++a) {
    if (d[a] > 0) hit.t = std::min(hit.t, (s.half_extents[a] - o[a]) / d[a]);
    else if (d[a] < 0) hit.t = std::min(hit.t, (-s.half_extents[a] - o[a]) / d[a]);
  }
  for (size_t k = 0; k < s.obstacles.size(); ++k) {
    const Obstacle& ob = s.obstacles[k];
    double t0 = -kInf, t1 = kInf;
    bool miss = false;
    for (int a = 0; a < 3 && !miss; ++a) {
      if (d[a] == 0) {
        miss = o[a] < ob.min[a] || o[a] > ob.max[a];
        continue;
      }
      double ta = (ob.min[a] - o[a]) / d[a];
      double tb = (ob.max[a] - o[a]) / d[a];
      if (ta > tb) std::swap(ta, tb);
      t0 = std::max(t0, ta);
      t1 = std::min(t1, tb);
    }
    if (!miss && t0 <= t1 && t0 > 0 && t0 < hit.t) {
      hit.t = t0;
      hit.obstacle = static_cast<int>(k);
    }
  }
  return hit;
}

double surface_gradient(const Vec3& q) {
  return 0.8 + 0.1 * (1.0 + std::sin(1.3 * q.x() + 0.7 * q.y() + 1.1 * q.z()));
}

Vec3 wall_color(const BoxScene& s, const Vec3& q) {
  std::array<double, 6> score;
  for (int a = 0; a < 3; ++a) {
    score[2 * a] = q[a] / s.half_extents[a];
    score[2 * a + 1] = -q[a] / s.half_extents[a];
  }
  const double top = *std::max_element(score.begin(), score.end());
  Vec3 c = Vec3::Zero();
  double wsum = 0.0;
  for (int f = 0; f < 6; ++f) {
    const double w = std::exp(kFaceSharpness * (score[f] - top));
    c += w * s.face_colors[f];
    wsum += w;
  }
  return c / wsum;
}

template <typename Fn>
EquirectImage render_rgb(int width, int height, Fn color_of_ray) {
  EquirectImage img(width, height, 3);
  parallel_for(0, height, [&](int y) {
    for (int x = 0; x < width; ++x) {
      const Vec3 c = color_of_ray(pixel_ray(x, y, width, height)).cwiseMax(0.0).cwiseMin(1.0);
      for (int ch = 0; ch < 3; ++ch) img.at(x, y, ch) = static_cast<float>(c[ch]);
    }
  });
  return img;
}

template <typename Fn>
DepthMap render_depth(int width, int height, Fn dist_of_ray) {
  DepthMap depth(width, height);
  parallel_for(0, height, [&](int y) {
    for (int x = 0; x < width; ++x) depth.set(x, y, dist_of_ray(pixel_ray(x, y, width, height)));
  });
  return depth;
}

double sphere_exit(const SphereScene& s, const Vec3& o, const Vec3& d) {
  // |o + t d - c|^2 = r^2 with o inside: the positive root.
  const Vec3 oc = o - s.center;
  const double b = oc.dot(d);
  const double c = oc.squaredNorm() - s.radius * s.radius;
  const double disc = b * b - c;
  const double root = std::sqrt(disc);
  // Stable form of -b + root.
  return b > 0 ? -c / (b + root) : root - b;
}

void check_sphere_camera(const SphereScene& s, const Vec3& center) {
  if (!((center - s.center).norm() < s.radius)) {
    throw ContractError("camera center must be strictly inside the sphere");
  }
}

double reflect_into(double v, double limit) {
  while (std::abs(v) > limit) v = v > 0 ? 2 * limit - v : -2 * limit - v;
  return v;
}

Rotation heading_rotation(double yaw, double jitter, Rng& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  Vec3 axis(n01(rng), n01(rng), n01(rng));
  if (axis.norm() < 1e-12) axis = Vec3::UnitY();
  return Rotation::from_axis_angle(Vec3::UnitY(), yaw) *
         Rotation::from_axis_angle(axis, jitter * amp(rng));
}

// Walk in the horizontal plane within |p_a| <= limit_a, reflecting at the
// limits. `accept` can veto a position (for obstacles).
template <typename Accept>
Trajectory walk(const Vec3& limit, int frames, double spacing, double jitter, std::uint64_t seed,
                const Pose& to_world, Accept accept) {
  if (frames < 1) throw ContractError("trajectory needs at least one frame");
  if (!(spacing >= 0) || !(jitter >= 0)) {
    throw ContractError("spacing and jitter must be non-negative");
  }
  Rng rng(seed);
  std::uniform_real_distribution<double> uni(-kPi, kPi);
  std::normal_distribution<double> turn(0.0, 0.3);
  Trajectory tr;
  tr.spacing = spacing;
  tr.jitter = jitter;
  double heading = uni(rng);
  Vec3 p = Vec3::Zero();
  for (int i = 0; i < frames; ++i) {
    if (i > 0) {
      Vec3 next = p;
      for (int attempt = 0; attempt < 100; ++attempt) {
        heading += turn(rng);
        next = p + spacing * Vec3(std::sin(heading), 0.0, std::cos(heading));
        for (int a = 0; a < 3; ++a) next[a] = reflect_into(next[a], limit[a]);
        if (accept(next)) break;
        next = p;
      }
      const Vec3 step = next - p;
      if (step.norm() > 1e-12) heading = std::atan2(step.x(), step.z());
      p = next;
    }
    const Rotation r = heading_rotation(heading, jitter, rng);
    tr.poses.push_back(to_world * Pose{r, p});
  }
  return tr;
}

nlohmann::json vec_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

}  // namespace

BoxScene::BoxScene() {
  face_colors = {Vec3(0.85, 0.25, 0.2), Vec3(0.2, 0.7, 0.3),  Vec3(0.9, 0.85, 0.6),
                 Vec3(0.3, 0.25, 0.2),  Vec3(0.25, 0.4, 0.85), Vec3(0.75, 0.6, 0.85)};
}

void BoxScene::check_camera(const Vec3& world_center) const {
  if (!(half_extents.array() > 0).all()) throw ContractError("box half extents must be positive");
  const Vec3 q = box_pose.inverse().apply(world_center);
  if (!(q.array().abs() < half_extents.array()).all()) {
    throw ContractError("camera center must be strictly inside the box");
  }
  for (const Obstacle& ob : obstacles) {
    if ((q.array() >= ob.min.array()).all() && (q.array() <= ob.max.array()).all()) {
      throw ContractError("camera center lies inside an obstacle");
    }
  }
}

double box_ray_distance(const BoxScene& scene, const Vec3& origin, const Vec3& dir) {
  const Pose inv = scene.box_pose.inverse();
  return trace_box(scene, inv.apply(origin), inv.rot * dir).t;
}

DepthMap box_depth(const BoxScene& scene, const Pose& cam, int width, int height) {
  scene.check_camera(cam.trans);
  const Pose cam_in_box = scene.box_pose.inverse() * cam;
  return render_depth(width, height, [&](const Vec3& ray) {
    return trace_box(scene, cam_in_box.trans, cam_in_box.rot * ray).t;
  });
}

EquirectImage box_rgb(const BoxScene& scene, const Pose& cam, int width, int height) {
  scene.check_camera(cam.trans);
  const Pose cam_in_box = scene.box_pose.inverse() * cam;
  return render_rgb(width, height, [&](const Vec3& ray) {
    const Vec3 d = cam_in_box.rot * ray;
    const Hit hit = trace_box(scene, cam_in_box.trans, d);
    const Vec3 q = cam_in_box.trans + hit.t * d;
    const Vec3 base = hit.obstacle < 0 ? wall_color(scene, q) : scene.obstacles[hit.obstacle].color;
    return Vec3(base * surface_gradient(q));
  });
}

DepthMap sphere_depth(const SphereScene& scene, const Pose& cam, int width, int height) {
  check_sphere_camera(scene, cam.trans);
  return render_depth(width, height, [&](const Vec3& ray) {
    return sphere_exit(scene, cam.trans, cam.rot * ray);
  });
}

EquirectImage sphere_rgb(const SphereScene& scene, const Pose& cam, int width, int height) {
  check_sphere_camera(scene, cam.trans);
  return render_rgb(width, height, [&](const Vec3& ray) {
    const Vec3 d = cam.rot * ray;
    const Vec3 n = (cam.trans + sphere_exit(scene, cam.trans, d) * d - scene.center) / scene.radius;
    return Vec3(0.5 + 0.3 * std::sin(2.0 * n.x() + 0.3), 0.5 + 0.3 * std::sin(2.0 * n.y() + 1.0),
                0.5 + 0.3 * std::sin(2.0 * n.z() + 2.0));
  });
}

Trajectory make_trajectory(const BoxScene& scene, int frames, double spacing, double jitter,
                           std::uint64_t seed) {
  const Vec3 limit = 0.6 * scene.half_extents;
  return walk(limit, frames, spacing, jitter, seed, scene.box_pose, [&](const Vec3& q) {
    for (const Obstacle& ob : scene.obstacles) {
      const Vec3 lo = ob.min.array() - 0.1;
      const Vec3 hi = ob.max.array() + 0.1;
      if ((q.array() >= lo.array()).all() && (q.array() <= hi.array()).all()) return false;
    }
    return true;
  });
}

Trajectory make_trajectory(const SphereScene& scene, int frames, double spacing, double jitter,
                           std::uint64_t seed) {
  const double lim = 0.5 * scene.radius / std::sqrt(3.0);
  return walk(Vec3::Constant(lim), frames, spacing, jitter, seed, Pose{Rotation(), scene.center},
              [](const Vec3&) { return true; });
}

EquirectImage smooth_panorama(int width, int height, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_real_distribution<double> freq(1.0, 3.0);
  std::uniform_real_distribution<double> phase(-kPi, kPi);
  constexpr int kWaves = 4;
  struct Wave {
    Vec3 axis;
    double freq, phase;
  };
  std::array<std::array<Wave, kWaves>, 3> waves;
  for (auto& channel : waves) {
    for (Wave& w : channel) {
      Vec3 a(n01(rng), n01(rng), n01(rng));
      if (a.norm() < 1e-12) a = Vec3::UnitZ();
      w = {a.normalized(), freq(rng), phase(rng)};
    }
  }
  return render_rgb(width, height, [&](const Vec3& d) {
    Vec3 c;
    for (int ch = 0; ch < 3; ++ch) {
      double v = 0.5;
      for (const Wave& w : waves[ch]) v += 0.1 * std::sin(w.freq * w.axis.dot(d) + w.phase);
      c[ch] = v;
    }
    return c;
  });
}

SceneSet render_scene_set(const SceneSetConfig& cfg, std::uint64_t seed) {
  if (cfg.frames < 1) throw ContractError("scene set needs at least one frame");
  if (cfg.width != 2 * cfg.height || cfg.height < 1) {
    throw ContractError("resolution must be 2:1");
  }
  SceneSet set;
  if (cfg.kind == SceneKind::kBox) {
    const BoxScene scene;
    const Trajectory tr = make_trajectory(scene, cfg.frames, cfg.spacing, cfg.jitter, seed);
    for (const Pose& p : tr.poses) {
      set.frames.push_back({box_rgb(scene, p, cfg.width, cfg.height),
                            box_depth(scene, p, cfg.width, cfg.height), p});
    }
    nlohmann::json colors = nlohmann::json::array();
    for (const Vec3& c : scene.face_colors) colors.push_back(vec_json(c));
    set.scene = {{"kind", "box"}, {"half_extents", vec_json(scene.half_extents)},
                 {"face_colors", colors}, {"room_size", scene.room_size()}};
  } else {
    const SphereScene scene;
    const Trajectory tr = make_trajectory(scene, cfg.frames, cfg.spacing, cfg.jitter, seed);
    for (const Pose& p : tr.poses) {
      set.frames.push_back({sphere_rgb(scene, p, cfg.width, cfg.height),
                            sphere_depth(scene, p, cfg.width, cfg.height), p});
    }
    set.scene = {{"kind", "sphere"}, {"center", vec_json(scene.center)},
                 {"radius", scene.radius}, {"room_size", 2 * scene.radius}};
  }
  set.scene["seed"] = seed;
  set.scene["spacing"] = cfg.spacing;
  set.scene["jitter"] = cfg.jitter;
  return set;
}

Manifest gen_scene_set(const SceneSetConfig& cfg, std::uint64_t seed,
                       const std::filesystem::path& out_dir) {
  const SceneSet set = render_scene_set(cfg, seed);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw FormatError("cannot create " + out_dir.string() + ": " + ec.message());

  double max_depth = 0.0;
  for (const FrameTriplet& f : set.frames) {
    for (double d : f.depth.distances()) max_depth = std::max(max_depth, d);
  }
  const double scale = depth_scale_for(max_depth);

  Manifest m;
  m.base_dir = out_dir;
  m.scene = set.scene;
  for (size_t i = 0; i < set.frames.size(); ++i) {
    char stem[32];
    std::snprintf(stem, sizeof(stem), "frame_%03zu", i);
    m.frames.push_back(save_triplet(set.frames[i], m, stem, scale));
  }
  write_manifest(m, out_dir / "manifest.json");
  return m;
}

}  // namespace panogeo
