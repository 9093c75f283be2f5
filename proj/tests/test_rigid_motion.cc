#include <gtest/gtest.h>

#include <numbers>

#include "oracles.h"
#include "panogeo/error.h"
#include "panogeo/rigid_motion.h"
#include "panogeo/synthgen.h"

namespace panogeo {
namespace {

using std::numbers::pi;

Pose random_pose(Rng& rng) {
  std::normal_distribution<double> n(0.0, 2.0);
  return Pose{sample_uniform_rotation(rng), Vec3(n(rng), n(rng), n(rng))};
}

void expect_pose_near(const Pose& a, const Pose& b, double tol) {
  EXPECT_LE((a.rot.matrix() - b.rot.matrix()).cwiseAbs().maxCoeff(), tol);
  EXPECT_LE((a.trans - b.trans).cwiseAbs().maxCoeff(), tol);
}

TEST(Rotation, RejectsNonOrthonormal) {
  Mat3 m = Mat3::Identity();
  m(0, 1) = 1e-6;
  EXPECT_THROW(Rotation{m}, ContractError);
  EXPECT_THROW(Rotation{Mat3(-Mat3::Identity())}, ContractError);
  const Rotation p = Rotation::project(m);
  EXPECT_LT((p.matrix().transpose() * p.matrix() - Mat3::Identity()).norm(), 1e-12);
}

TEST(SampleUniformRotation, Deterministic) {
  Rng a(42), b(42);
  EXPECT_EQ(sample_uniform_rotation(a).matrix(), sample_uniform_rotation(b).matrix());
}

TEST(SampleUniformRotation, OrthonormalAndUniform) {
  Rng rng(7);
  const Vec3 v(0.3, -0.5, 0.8);
  Vec3 mean = Vec3::Zero();
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const Rotation r = sample_uniform_rotation(rng);
    const Mat3& m = r.matrix();
    if (i % 1000 == 0) {
      EXPECT_LT((m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_NEAR(m.determinant(), 1.0, 1e-12);
    }
    mean += r * v.normalized();
  }
  EXPECT_LT((mean / n).norm(), 0.02);
}

TEST(RotAngularDistance, Examples) {
  const Rotation i;
  EXPECT_EQ(rot_angular_distance(i, i), 0.0);
  EXPECT_NEAR(rot_angular_distance(i, Rotation::from_axis_angle(Vec3::UnitZ(), pi / 6)), pi / 6,
              1e-12);
  EXPECT_NEAR(rot_angular_distance(i, Rotation::from_axis_angle(Vec3::UnitX(), pi)), pi, 1e-12);
}

TEST(RotAngularDistance, MetricProperties) {
  Rng rng(11);
  for (int k = 0; k < 200; ++k) {
    const Rotation a = sample_uniform_rotation(rng);
    const Rotation b = sample_uniform_rotation(rng);
    const Rotation c = sample_uniform_rotation(rng);
    const double ab = rot_angular_distance(a, b);
    EXPECT_NEAR(ab, rot_angular_distance(b, a), 1e-9);
    EXPECT_NEAR(ab, rot_angular_distance(Rotation(), a.transpose() * b), 1e-9);
    EXPECT_LE(rot_angular_distance(a, c), ab + rot_angular_distance(b, c) + 1e-9);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, pi);
    EXPECT_EQ(rot_angular_distance(a, a), 0.0);
  }
}

TEST(RotAngularDistance, MatchesAxisAngle) {
  Rng rng(5);
  std::uniform_real_distribution<double> ang(0.0, pi);
  for (int k = 0; k < 100; ++k) {
    const double t = ang(rng);
    const Rotation r = Rotation::from_axis_angle(oracle::random_unit(rng), t);
    EXPECT_NEAR(rot_angular_distance(Rotation(), r), t, 1e-9);
  }
}

TEST(VecAngularDistance, Examples) {
  EXPECT_EQ(vec_angular_distance(Vec3(1, 0, 0), Vec3(1, 0, 0)), 0.0);
  EXPECT_DOUBLE_EQ(vec_angular_distance(Vec3(1, 0, 0), Vec3(0, 1, 0)), pi / 2);
  EXPECT_DOUBLE_EQ(vec_angular_distance(Vec3(1, 0, 0), Vec3(-1, 0, 0)), pi);
  EXPECT_THROW(vec_angular_distance(Vec3(1e-13, 0, 0), Vec3(1, 0, 0)), DomainError);
  EXPECT_THROW(vec_angular_distance(Vec3(1, 0, 0), Vec3::Zero()), DomainError);
}

TEST(RelativePose, Examples) {
  Rng rng(3);
  const Pose g = random_pose(rng);
  expect_pose_near(relative_pose(g, g), Pose::identity(), 1e-12);
  const Pose r = relative_pose(Pose::identity(), Pose{Rotation(), Vec3(1, 0, 0)});
  EXPECT_EQ(r.rot.matrix(), Mat3::Identity());
  EXPECT_EQ(r.trans, Vec3(1, 0, 0));
}

TEST(RelativePose, GroupLaw) {
  Rng rng(4);
  for (int k = 0; k < 100; ++k) {
    const Pose a = random_pose(rng), b = random_pose(rng), c = random_pose(rng);
    expect_pose_near(relative_pose(a, c), relative_pose(a, b) * relative_pose(b, c), 1e-9);
  }
}

TEST(RelativePose, ExpressesFrameJInCameraI) {
  Rng rng(8);
  const Pose gi = random_pose(rng), gj = random_pose(rng);
  const Vec3 xj(0.4, -1.2, 2.0);
  // The same world point seen from camera i.
  const Vec3 xi = gi.inverse().apply(gj.apply(xj));
  EXPECT_LT((relative_pose(gi, gj).apply(xj) - xi).norm(), 1e-12);
}

TEST(AnchorFrame, IdentityAnchorLeavesInputs) {
  Rng rng(9);
  std::vector<Pose> poses = {random_pose(rng), Pose::identity(), random_pose(rng)};
  const PointCloud cloud(CloudFrame::kAnchorWorld, {Vec3(1, 2, 3), Vec3(-1, 0, 2)});
  const AnchoredSet a = anchor_frame(poses, {cloud}, 1);
  for (size_t i = 0; i < poses.size(); ++i) expect_pose_near(a.poses[i], poses[i], 0.0);
  EXPECT_EQ(a.clouds[0].points(), cloud.points());
  EXPECT_EQ(a.clouds[0].frame(), CloudFrame::kAnchorWorld);
}

TEST(AnchorFrame, RelativePosesInvariantAcrossAnchors) {
  Rng rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Pose> poses;
    for (int i = 0; i < 5; ++i) poses.push_back(random_pose(rng));
    const AnchoredSet a = anchor_frame(poses, {}, 1);
    const AnchoredSet b = anchor_frame(poses, {}, 4);
    expect_pose_near(a.poses[1], Pose::identity(), 1e-12);
    for (size_t i = 0; i < poses.size(); ++i) {
      for (size_t j = 0; j < poses.size(); ++j) {
        expect_pose_near(relative_pose(a.poses[i], a.poses[j]),
                         relative_pose(b.poses[i], b.poses[j]), 1e-9);
      }
    }
  }
}

TEST(AnchorFrame, AnchorCloudEqualsLocalPoints) {
  BoxScene scene;
  Rng rng(12);
  const Trajectory tr = make_trajectory(scene, 3, 0.4, 0.2, 12);
  std::vector<PointCloud> world;
  std::vector<PointCloud> local;
  for (const Pose& p : tr.poses) {
    local.push_back(depth_to_local_points(box_depth(scene, p, 64, 32)));
    world.push_back(transform_cloud(p, local.back()));
  }
  for (size_t k = 0; k < tr.poses.size(); ++k) {
    const AnchoredSet a = anchor_frame(tr.poses, world, k);
    ASSERT_EQ(a.clouds[k].size(), local[k].size());
    for (size_t i = 0; i < local[k].size(); ++i) {
      EXPECT_LT((a.clouds[k].points()[i] - local[k].points()[i]).norm(), 1e-9);
    }
  }
}

TEST(AnchorFrame, OutOfRange) {
  EXPECT_THROW(anchor_frame({Pose::identity()}, {}, 1), ContractError);
}

TEST(Pose, InverseAndApply) {
  Rng rng(13);
  const Pose g = random_pose(rng);
  expect_pose_near(g * g.inverse(), Pose::identity(), 1e-12);
  const Vec3 x(1, -2, 0.5);
  EXPECT_LT((g.inverse().apply(g.apply(x)) - x).norm(), 1e-12);
}

}  // namespace
}  // namespace panogeo
