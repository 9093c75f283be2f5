#include <gtest/gtest.h>

#include <numbers>

#include "oracles.h"
#include "panogeo/error.h"
#include "panogeo/resample.h"
#include "panogeo/synthgen.h"

namespace panogeo {
namespace {

using std::numbers::pi;

Rotation yaw(double a) { return Rotation::from_axis_angle(Vec3::UnitY(), a); }

TEST(RotateEquirect, IdentityNearestIsBitIdentical) {
  const EquirectImage img = smooth_panorama(128, 64, 1);
  EXPECT_EQ(rotate_equirect(img, Rotation(), Interp::kNearest), img);
  DepthMap d(128, 64);
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 128; ++x) {
      if ((x * 7 + y) % 5) d.set(x, y, 1.0 + 0.01 * x + 0.02 * y);
    }
  }
  EXPECT_EQ(rotate_equirect(d, Rotation(), Interp::kNearest), d);
}

TEST(RotateEquirect, IdentityBilinearWithinRounding) {
  const EquirectImage img = smooth_panorama(128, 64, 2);
  const EquirectImage out = rotate_equirect(img, Rotation());
  for (size_t i = 0; i < img.data().size(); ++i) EXPECT_NEAR(out.data()[i], img.data()[i], 1e-5);
}

TEST(RotateEquirect, RoundTripPsnr) {
  const EquirectImage img = smooth_panorama(1024, 512, 3);
  Rng rng(21);
  for (int k = 0; k < 3; ++k) {
    const Rotation r = sample_uniform_rotation(rng);
    const EquirectImage back = rotate_equirect(rotate_equirect(img, r), r.transpose());
    EXPECT_GE(oracle::psnr(back.data(), img.data()), 40.0);
  }
}

TEST(RotateEquirect, GroupAction) {
  const EquirectImage img = smooth_panorama(1024, 512, 4);
  Rng rng(22);
  const Rotation a = sample_uniform_rotation(rng);
  const Rotation b = sample_uniform_rotation(rng);
  const EquirectImage two_step = rotate_equirect(rotate_equirect(img, a), b);
  const EquirectImage one_step = rotate_equirect(img, b * a);
  EXPECT_GE(oracle::psnr(two_step.data(), one_step.data()), 35.0);
}

TEST(RotateEquirect, ContentMovesToRotatedDirection) {
  // A bright blob around direction s must show up around R s.
  const int w = 256, h = 128;
  const Vec3 s = Vec3(0.3, 0.4, 0.8).normalized();
  EquirectImage img(w, h, 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      img.at(x, y) = static_cast<float>(std::exp(-20.0 * (oracle::pixel_dir(x, y, w, h) - s).squaredNorm()));
    }
  }
  const Rotation r = Rotation::from_axis_angle(Vec3(1, 2, -1), 1.1);
  const EquirectImage out = rotate_equirect(img, r);
  int bx = 0, by = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (out.at(x, y) > out.at(bx, by)) bx = x, by = y;
    }
  }
  const Vec3 peak = oracle::pixel_dir(bx, by, w, h);
  EXPECT_LT(std::acos(std::min(1.0, peak.dot(r * s))), 2.0 * pi / w * 2);
}

TEST(RotateEquirect, YawByWholePixelsShiftsColumnsAcrossSeam) {
  const int w = 64, h = 32, k = 5;
  const EquirectImage img = smooth_panorama(w, h, 5);
  const EquirectImage out = rotate_equirect(img, yaw(2 * pi * k / w), Interp::kNearest);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) EXPECT_EQ(out.at(x, y, c), img.at((x - k + w) % w, y, c));
    }
  }
  const EquirectImage lin = rotate_equirect(img, yaw(2 * pi * k / w));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) EXPECT_NEAR(lin.at(x, y, 1), img.at((x - k + w) % w, y, 1), 1e-4);
  }
}

TEST(RotateEquirect, SeamContinuity) {
  // Half-pixel yaw puts output samples exactly between the last and first source columns.
  const int w = 64, h = 32;
  const EquirectImage img = smooth_panorama(w, h, 6);
  const EquirectImage out = rotate_equirect(img, yaw(pi / w));
  for (int y = 0; y < h; ++y) {
    const float expect = 0.5f * (img.at(w - 1, y, 0) + img.at(0, y, 0));
    EXPECT_NEAR(out.at(0, y, 0), expect, 1e-5);
  }
}

TEST(RotateEquirectDepth, ConstantStaysConstant) {
  const DepthMap d(128, 64, 3.25);
  Rng rng(23);
  const Rotation r = sample_uniform_rotation(rng);
  for (Interp interp : {Interp::kNearest, Interp::kBilinear}) {
    const DepthMap out = rotate_equirect(d, r, interp);
    EXPECT_EQ(out.valid_count(), d.valid_count());
    for (double v : out.distances()) EXPECT_NEAR(v, 3.25, 1e-12);
  }
}

TEST(RotateEquirectDepth, BilinearNeedsAllFourTaps) {
  const int w = 64, h = 32;
  DepthMap d(w, h, 2.0);
  d.invalidate(10, 10);
  // Quarter-pixel yaw: output (x, y) reads between source columns x - 1 and x.
  const DepthMap out = rotate_equirect(d, yaw(0.5 * pi / w), Interp::kBilinear);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (y == 10 && (x == 10 || x == 11)) EXPECT_FALSE(out.valid(x, y));
      // Rows may round onto the neighbor tap.
      if (std::abs(y - 10) > 1 || x < 10 || x > 11) EXPECT_TRUE(out.valid(x, y)) << x << "," << y;
    }
  }
  const DepthMap near = rotate_equirect(d, yaw(0.5 * pi / w), Interp::kNearest);
  EXPECT_EQ(near.valid_count(), d.valid_count());
}

TEST(RotateEquirectDepth, NearestOnlyCopiesSourceValues) {
  BoxScene scene;
  const DepthMap d = box_depth(scene, Pose::identity(), 128, 64);
  std::vector<double> src = d.distances();
  std::sort(src.begin(), src.end());
  const DepthMap out = rotate_equirect(d, Rotation::from_axis_angle(Vec3(1, 1, 0), 0.4));
  for (double v : out.distances()) EXPECT_TRUE(std::binary_search(src.begin(), src.end(), v));
}

TEST(Resize, ConstantAndShapes) {
  const EquirectImage img(64, 32, 3, 0.25f);
  const EquirectImage out = resize_equirect(img, 128, 64);
  EXPECT_EQ(out.width(), 128);
  for (float v : out.data()) EXPECT_NEAR(v, 0.25f, 1e-7);
  const DepthMap d = resize_depth_nearest(DepthMap(64, 32, 1.5), 32, 16);
  EXPECT_EQ(d.valid_count(), 32u * 16u);
  EXPECT_THROW(resize_equirect(img, 100, 64), ContractError);
}

TEST(Pinhole, CenterPixelLooksForward) {
  const EquirectImage img = smooth_panorama(512, 256, 7);
  const Rotation r = Rotation::from_axis_angle(Vec3(0.3, 1, 0), 0.9);
  const PinholeView v = equirect_to_pinhole(img, r, 1.0, 33, 33);
  EXPECT_NEAR((pinhole_ray(16, 16, 1.0, 33, 33) - Vec3(0, 0, 1)).norm(), 0.0, 1e-15);
  const PixelCoord p = angles_to_pixel(dir_to_angles(r * Vec3(0, 0, 1)), 512, 256);
  float expect[3];
  sample_bilinear(img, p.u, p.v, expect);
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(v.image.at(16, 16, c), expect[c], 1e-6);
}

TEST(Pinhole, LongitudeField) {
  // Value linear in column so bilinear sampling reproduces longitude exactly.
  const int w = 1024, h = 512;
  EquirectImage img(w, h, 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) img.at(x, y) = static_cast<float>((x + 0.5) / w);
  }
  const PinholeView v = equirect_to_pinhole(img, Rotation(), 90.0, 64, 48);
  for (int y = 0; y < 48; ++y) {
    for (int x = 0; x < 64; ++x) {
      const double f = 32.0 / std::tan(pi / 4);
      const Vec3 d((x + 0.5 - 32) / f, -(y + 0.5 - 24) / f, 1.0);
      const double theta = std::atan2(d.x(), d.z());
      EXPECT_NEAR(v.image.at(x, y), (theta + pi) / (2 * pi), 1e-3);
    }
  }
}

TEST(Pinhole, ProjectInvertsRay) {
  const Rotation r = Rotation::from_axis_angle(Vec3(1, 0.2, 0.4), 2.0);
  for (int y = 0; y < 40; y += 3) {
    for (int x = 0; x < 50; x += 3) {
      const auto p = project_to_view(r, 70.0, 50, 40, r * pinhole_ray(x, y, 70.0, 50, 40));
      ASSERT_TRUE(p.has_value());
      EXPECT_NEAR(p->u, x + 0.5, 1e-9);
      EXPECT_NEAR(p->v, y + 0.5, 1e-9);
    }
  }
  EXPECT_FALSE(project_to_view(r, 70.0, 50, 40, r * Vec3(0, 0, -1)).has_value());
}

TEST(Pinhole, CubeFacesAgreeAtSharedEdges) {
  const int n = 128;
  const EquirectImage img = smooth_panorama(2048, 1024, 8);
  std::vector<PinholeView> faces;
  for (int k = 0; k < 4; ++k) faces.push_back(equirect_to_pinhole(img, yaw(k * pi / 2), 90.0, n, n));
  // Column n - 1 of face k and column 0 of face k + 1 straddle the shared edge.
  double worst = 0.0;
  for (int k = 0; k < 4; ++k) {
    const Raster& a = faces[k].image;
    const Raster& b = faces[(k + 1) % 4].image;
    for (int y = 0; y < n; ++y) {
      for (int c = 0; c < 3; ++c) worst = std::max(worst, double(std::abs(a.at(n - 1, y, c) - b.at(0, y, c))));
    }
  }
  EXPECT_LT(worst, 0.02);
}

TEST(Pinhole, FovOutOfRangeThrows) {
  const EquirectImage img(64, 32, 3);
  EXPECT_THROW(equirect_to_pinhole(img, Rotation(), 0.0, 8, 8), ContractError);
  EXPECT_THROW(equirect_to_pinhole(img, Rotation(), 180.0, 8, 8), ContractError);
  EXPECT_THROW(equirect_to_pinhole(img, Rotation(), -10.0, 8, 8), ContractError);
}

TEST(Dodeca, TwelveViewsOnIcosahedronVertices) {
  const auto views = dodeca_views();
  ASSERT_EQ(views.size(), 12u);
  const double adjacent = std::acos(1.0 / std::sqrt(5.0));
  Vec3 sum = Vec3::Zero();
  for (size_t i = 0; i < 12; ++i) {
    const Vec3 fi = views[i].matrix().col(2);
    sum += fi;
    int neighbors = 0;
    for (size_t j = 0; j < 12; ++j) {
      if (i == j) continue;
      const Vec3 fj = views[j].matrix().col(2);
      const double ang = std::atan2(fi.cross(fj).norm(), fi.dot(fj));
      EXPECT_GE(ang, adjacent - 1e-9);
      if (std::abs(ang - adjacent) < 1e-9) ++neighbors;
    }
    EXPECT_EQ(neighbors, 5);
  }
  EXPECT_LT(sum.norm(), 1e-12);
}

TEST(Dodeca, ViewsCoverTheSphere) {
  const auto views = dodeca_views();
  std::mt19937_64 rng(24);
  int uncovered = 0;
  for (int i = 0; i < 100000; ++i) {
    const Vec3 d = oracle::random_unit(rng);
    bool hit = false;
    for (const Rotation& r : views) {
      if (project_to_view(r, kDodecaDefaultFovDeg, 64, 64, d)) {
        hit = true;
        break;
      }
    }
    uncovered += !hit;
  }
  EXPECT_EQ(uncovered, 0);
}

TEST(Dodeca, SplitCountsAndConstantInput) {
  size_t total = 0;
  for (int k = 0; k < 3; ++k) {
    const EquirectImage img(256, 128, 3, 0.1f * (k + 1));
    const auto views = dodeca_split(img, kDodecaDefaultFovDeg, 32);
    total += views.size();
    for (const PinholeView& v : views) {
      EXPECT_EQ(v.image.width(), 32);
      EXPECT_EQ(v.fov_deg, kDodecaDefaultFovDeg);
      for (float x : v.image.data()) EXPECT_NEAR(x, 0.1f * (k + 1), 1e-6);
    }
  }
  EXPECT_EQ(total, 36u);
}

}  // namespace
}  // namespace panogeo
