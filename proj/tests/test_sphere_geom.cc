#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "oracles.h"
#include "panogeo/error.h"
#include "panogeo/sphere_geom.h"
#include "panogeo/synthgen.h"

namespace panogeo {
namespace {

using std::numbers::pi;

TEST(PixelToAngles, PixelCenterConvention) {
  auto c = pixel_to_angles(2, 1, 4, 2);
  EXPECT_DOUBLE_EQ(c.theta, 0.25 * pi);
  EXPECT_DOUBLE_EQ(c.phi, -0.25 * pi);

  c = pixel_to_angles(4 / 2 - 0.5, 2 / 2 - 0.5, 4, 2);
  EXPECT_DOUBLE_EQ(c.theta, 0.0);
  EXPECT_DOUBLE_EQ(c.phi, 0.0);

  c = pixel_to_angles(0, 0, 1024, 512);
  EXPECT_DOUBLE_EQ(c.theta, -pi + pi / 1024);
  EXPECT_DOUBLE_EQ(c.phi, pi / 2 - pi / 1024);
}

TEST(PixelToAngles, RejectsOutOfRange) {
  EXPECT_THROW(pixel_to_angles(-0.1, 0, 4, 2), DomainError);
  EXPECT_THROW(pixel_to_angles(4, 0, 4, 2), DomainError);
  EXPECT_THROW(pixel_to_angles(0, 2, 4, 2), DomainError);
}

TEST(AnglesToPixel, ForwardAxis) {
  const PixelCoord p = angles_to_pixel({0.0, 0.0}, 4, 2);
  EXPECT_DOUBLE_EQ(p.u, 1.5);
  EXPECT_DOUBLE_EQ(p.v, 0.5);
}

TEST(AnglesToPixel, RoundTrip) {
  std::mt19937_64 rng(1);
  const int w = 1024, h = 512;
  // Rows past the last pixel center would sit beyond the south pole.
  std::uniform_real_distribution<double> ux(0.0, w), uy(0.0, h - 0.5);
  for (int i = 0; i < 1000; ++i) {
    const double u = ux(rng), v = uy(rng);
    const PixelCoord p = angles_to_pixel(pixel_to_angles(u, v, w, h), w, h);
    // Columns come back in [-0.5, W - 0.5).
    EXPECT_NEAR(wrap_column(p.u, w), wrap_column(u, w), 1e-9);
    EXPECT_NEAR(p.v, v, 1e-9);
  }
}

TEST(AnglesToPixel, SeamColumnsMeetAfterWrap) {
  const int w = 1024, h = 512;
  const double eps = 1e-6;
  const PixelCoord a = angles_to_pixel({pi - eps, 0.0}, w, h);
  const PixelCoord b = angles_to_pixel({-pi, 0.0}, w, h);
  EXPECT_NEAR(b.u, -0.5, 1e-12);
  EXPECT_NEAR(a.u, w - 0.5 - eps * w / (2 * pi), 1e-9);
  EXPECT_NEAR(wrap_column(a.u, w), wrap_column(b.u, w), 1e-3);
  // Pixel u = W is the same longitude as u = 0.
  EXPECT_DOUBLE_EQ(wrap_longitude(2 * pi * (w + 0.5) / w - pi),
                   pixel_to_angles(0, 0, w, h).theta);
}

TEST(AnglesToDir, Axes) {
  auto expect_vec = [](const Vec3& a, const Vec3& b) {
    EXPECT_NEAR((a - b).norm(), 0.0, 1e-15);
  };
  expect_vec(angles_to_dir({0, 0}).vec(), Vec3(0, 0, 1));
  expect_vec(angles_to_dir({pi / 2, 0}).vec(), Vec3(1, 0, 0));
  expect_vec(angles_to_dir({0, pi / 2}).vec(), Vec3(0, 1, 0));
}

TEST(AnglesToDir, UnitNorm) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> th(-pi, pi), ph(-pi / 2, pi / 2);
  for (int i = 0; i < 10000; ++i) {
    EXPECT_NEAR(angles_to_dir({th(rng), ph(rng)}).vec().norm(), 1.0, 1e-12);
  }
}

TEST(DirToAngles, PolesAndForward) {
  auto c = dir_to_angles(Vec3(0, 0, 1));
  EXPECT_EQ(c.theta, 0.0);
  EXPECT_EQ(c.phi, 0.0);
  c = dir_to_angles(Vec3(0, 1, 0));
  EXPECT_EQ(c.theta, 0.0);
  EXPECT_DOUBLE_EQ(c.phi, pi / 2);
  c = dir_to_angles(Vec3(0, -3, 0));
  EXPECT_EQ(c.theta, 0.0);
  EXPECT_DOUBLE_EQ(c.phi, -pi / 2);
}

TEST(DirToAngles, ZeroVectorIsDomainError) {
  EXPECT_THROW(dir_to_angles(Vec3::Zero()), DomainError);
  EXPECT_THROW(Direction(0, 0, 0), DomainError);
}

TEST(DirToAngles, RoundTripDirections) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10000; ++i) {
    const Vec3 d = oracle::random_unit(rng);
    const Vec3 back = angles_to_dir(dir_to_angles(d)).vec();
    EXPECT_LT(std::atan2(d.cross(back).norm(), d.dot(back)), 1e-9);
    EXPECT_TRUE(dir_to_angles(d).is_valid());
  }
}

TEST(PixelRay, MatchesWrittenOutConvention) {
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 16; ++x) {
      EXPECT_NEAR((pixel_ray(x, y, 16, 8) - oracle::pixel_dir(x, y, 16, 8)).norm(), 0.0, 1e-15);
    }
  }
}

TEST(DepthToLocalPoints, ShellKeepsDistance) {
  const DepthMap d(64, 32, 2.5);
  const PointCloud pc = depth_to_local_points(d);
  ASSERT_EQ(pc.size(), 64u * 32u);
  EXPECT_EQ(pc.frame(), CloudFrame::kCameraLocal);
  for (const Vec3& p : pc.points()) EXPECT_NEAR(p.norm(), 2.5, 1e-15);
}

TEST(DepthToLocalPoints, SingleValidPixel) {
  // Even-sized images have no pixel centered exactly on the forward axis, so
  // use the pixel just right/below of it on a fine grid.
  const int w = 2048, h = 1024;
  DepthMap d(w, h);
  d.set(w / 2, h / 2, 2.0);
  const PointCloud pc = depth_to_local_points(d);
  ASSERT_EQ(pc.size(), 1u);
  EXPECT_NEAR((pc.points()[0] - 2.0 * oracle::pixel_dir(w / 2, h / 2, w, h)).norm(), 0.0, 1e-15);
  // Half a pixel off in both angles.
  EXPECT_NEAR((pc.points()[0] - Vec3(0, 0, 2)).norm(), 0.0, 2.0 * std::sqrt(2.0) * pi / w * 1.01);
}

TEST(DepthToLocalPoints, AllInvalidGivesEmptyCloud) {
  EXPECT_TRUE(depth_to_local_points(DepthMap(8, 4)).empty());
}

TEST(DepthToLocalPoints, RowMajorOverValidPixels) {
  DepthMap d(8, 4);
  d.set(5, 0, 1.0);
  d.set(1, 2, 2.0);
  d.set(6, 2, 3.0);
  const PointCloud pc = depth_to_local_points(d);
  ASSERT_EQ(pc.size(), 3u);
  EXPECT_NEAR(pc.points()[0].norm(), 1.0, 1e-15);
  EXPECT_NEAR(pc.points()[1].norm(), 2.0, 1e-15);
  EXPECT_NEAR(pc.points()[2].norm(), 3.0, 1e-15);
}

TEST(DepthToLocalPoints, BoxScenePointsLieOnWalls) {
  BoxScene scene;
  const Pose cam{Rotation::from_axis_angle(Vec3(0.2, 1, 0.1), 0.7), Vec3(0.3, -0.2, 0.5)};
  const DepthMap d = box_depth(scene, cam, 256, 128);
  const PointCloud pc = depth_to_local_points(d);
  for (const Vec3& p : pc.points()) {
    const Vec3 q = cam.apply(p);
    const double m = (q.array().abs() / scene.half_extents.array()).maxCoeff();
    EXPECT_NEAR(m, 1.0, 1e-9);
  }
}

TEST(OrganizedPoints, HolesFollowValidity) {
  DepthMap d(8, 4, 1.0);
  d.invalidate(3, 1);
  const OrganizedCloud oc = depth_to_organized_points(d);
  EXPECT_FALSE(oc.is_valid(3, 1));
  EXPECT_TRUE(oc.is_valid(4, 1));
  EXPECT_NEAR(oc.at(4, 1).norm(), 1.0, 1e-15);
}

TEST(Types, Invariants) {
  EXPECT_THROW(EquirectImage(10, 4, 3), ContractError);
  EXPECT_THROW(EquirectImage(8, 4, 2), ContractError);
  EXPECT_THROW(DepthMap(10, 4), ContractError);
  DepthMap d(8, 4);
  EXPECT_THROW(d.set(0, 0, 0.0), ContractError);
  EXPECT_THROW(d.set(0, 0, -1.0), ContractError);
  EXPECT_THROW(d.set(0, 0, std::nan("")), ContractError);
  EXPECT_NEAR(Direction(3, 0, 4).vec().norm(), 1.0, 1e-15);
  EXPECT_THROW(PointCloud(CloudFrame::kCameraLocal, {Vec3::Zero()}, {Rgb8{}, Rgb8{}}),
               ContractError);
}

TEST(WrapLongitude, Range) {
  EXPECT_DOUBLE_EQ(wrap_longitude(pi), -pi);
  EXPECT_DOUBLE_EQ(wrap_longitude(-pi), -pi);
  EXPECT_NEAR(wrap_longitude(3 * pi + 0.25), -pi + 0.25, 1e-12);
  EXPECT_NEAR(wrap_longitude(-2 * pi - 0.5), -0.5, 1e-12);
}

}  // namespace
}  // namespace panogeo
