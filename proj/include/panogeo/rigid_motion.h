#pragma once

#include <random>
#include <vector>

#include "panogeo/sphere_geom.h"

namespace panogeo {

// Element of SO(3) stored as a 3x3 matrix. Construction checks
// orthonormality and det = +1 to 1e-9.
class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}
  explicit Rotation(const Mat3& m);

  static Rotation identity() { return Rotation(); }
  // Right-handed rotation of `angle` radians about `axis`.
  static Rotation from_axis_angle(const Vec3& axis, double angle);
  // Closest rotation in Frobenius norm (polar decomposition).
  static Rotation project(const Mat3& m);

  const Mat3& matrix() const { return m_; }
  Rotation transpose() const;
  Rotation operator*(const Rotation& other) const;
  Vec3 operator*(const Vec3& v) const { return m_ * v; }

 private:
  struct Unchecked {};
  Rotation(const Mat3& m, Unchecked) : m_(m) {}

  Mat3 m_;
};

// Camera-to-world rigid transform: X_world = rot * X_cam + trans.
struct Pose {
  Rotation rot;
  Vec3 trans = Vec3::Zero();

  static Pose identity() { return Pose{}; }

  Pose inverse() const;
  Pose operator*(const Pose& other) const;  // composition, other applied first
  Vec3 apply(const Vec3& x) const { return rot * x + trans; }
};

using Rng = std::mt19937_64;

// Haar-uniform rotation via a normalized 4D Gaussian quaternion.
Rotation sample_uniform_rotation(Rng& rng);

// Geodesic distance on SO(3) in [0, pi].
double rot_angular_distance(const Rotation& a, const Rotation& b);

// Angle between two vectors in [0, pi]. Throws DomainError when either norm
// is below 1e-12.
double vec_angular_distance(const Vec3& a, const Vec3& b);

// g_i^{-1} * g_j: frame j expressed in camera i coordinates.
Pose relative_pose(const Pose& g_i, const Pose& g_j);

struct AnchoredSet {
  std::vector<Pose> poses;
  std::vector<PointCloud> clouds;
};

// Re-expresses poses and world clouds relative to frame k so that the anchor
// pose becomes the identity.
AnchoredSet anchor_frame(const std::vector<Pose>& poses,
                         const std::vector<PointCloud>& clouds, size_t k);

// Applies the pose to every point; output is tagged anchor_world.
PointCloud transform_cloud(const Pose& pose, const PointCloud& cloud);

}  // namespace panogeo
