#include "panogeo/rigid_motion.h"

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>

#include "panogeo/error.h"

namespace panogeo {

Rotation::Rotation(const Mat3& m) : m_(m) {
  if (!m.allFinite()) throw ContractError("rotation has non-finite entries");
  const double ortho = (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
  const double det = m.determinant();
  if (ortho > 1e-9 || std::abs(det - 1.0) > 1e-9) {
    throw ContractError("matrix is not a rotation (orthonormality error " +
                        std::to_string(ortho) + ", det " + std::to_string(det) +
                        ")");
  }
}

Rotation Rotation::from_axis_angle(const Vec3& axis, double angle) {
  const double n = axis.norm();
  if (!(n > 1e-12)) throw DomainError("rotation axis has zero length");
  return Rotation(Eigen::AngleAxisd(angle, axis / n).toRotationMatrix(),
                  Unchecked{});
}

Rotation Rotation::project(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0) d(2, 2) = -1;
  return Rotation(svd.matrixU() * d * svd.matrixV().transpose(), Unchecked{});
}

Rotation Rotation::transpose() const { return Rotation(m_.transpose(), Unchecked{}); }

Rotation Rotation::operator*(const Rotation& other) const {
  return Rotation(m_ * other.m_, Unchecked{});
}

Pose Pose::inverse() const {
  const Rotation rt = rot.transpose();
  return Pose{rt, -(rt * trans)};
}

Pose Pose::operator*(const Pose& other) const {
  return Pose{rot * other.rot, rot * other.trans + trans};
}

Rotation sample_uniform_rotation(Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::Quaterniond q;
  double n = 0.0;
  do {
    q = Eigen::Quaterniond(normal(rng), normal(rng), normal(rng), normal(rng));
    n = q.norm();
  } while (n < 1e-6);
  q.coeffs() /= n;
  // Re-project to absorb rounding in the quaternion-to-matrix conversion.
  return Rotation::project(q.toRotationMatrix());
}

double rot_angular_distance(const Rotation& a, const Rotation& b) {
  // atan2 of the skew and trace parts of A^T B equals the arccos of the
  // clamped trace expression but stays exact near zero.
  const Mat3 m = a.matrix().transpose() * b.matrix();
  const double c = std::clamp((m.trace() - 1.0) / 2.0, -1.0, 1.0);
  const Vec3 skew(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
  const double s = std::min(1.0, skew.norm() / 2.0);
  return std::atan2(s, c);
}

double vec_angular_distance(const Vec3& a, const Vec3& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (!(na > 1e-12) || !(nb > 1e-12)) {
    throw DomainError("angular distance of near-zero vector");
  }
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

Pose relative_pose(const Pose& g_i, const Pose& g_j) { return g_i.inverse() * g_j; }

AnchoredSet anchor_frame(const std::vector<Pose>& poses,
                         const std::vector<PointCloud>& clouds, size_t k) {
  if (k >= poses.size()) {
    throw ContractError("anchor index " + std::to_string(k) + " out of range");
  }
  const Pose to_anchor = poses[k].inverse();
  AnchoredSet out;
  out.poses.reserve(poses.size());
  for (const Pose& g : poses) out.poses.push_back(to_anchor * g);
  out.clouds.reserve(clouds.size());
  for (const PointCloud& c : clouds) {
    // R_k^T (x - t_k), evaluated in that order for exactness at the anchor.
    std::vector<Vec3> pts;
    pts.reserve(c.size());
    for (const Vec3& x : c.points()) {
      pts.push_back(poses[k].rot.matrix().transpose() * (x - poses[k].trans));
    }
    out.clouds.emplace_back(CloudFrame::kAnchorWorld, std::move(pts), c.colors());
  }
  return out;
}

PointCloud transform_cloud(const Pose& pose, const PointCloud& cloud) {
  std::vector<Vec3> pts;
  pts.reserve(cloud.size());
  for (const Vec3& x : cloud.points()) pts.push_back(pose.apply(x));
  return PointCloud(CloudFrame::kAnchorWorld, std::move(pts), cloud.colors());
}

}  // namespace panogeo
