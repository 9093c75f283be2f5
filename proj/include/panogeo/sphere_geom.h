#pragma once

// Equirectangular conventions used throughout the toolkit.
//
// Camera frame: x right, y up, z forward. Longitude theta is measured from +z
// toward +x in [-pi, pi); latitude phi is positive upward in [-pi/2, pi/2].
// Pixel (u, v) addresses the pixel whose center sits at (u + 0.5, v + 0.5)
// in continuous image coordinates, so column 0 starts at theta = -pi and row
// 0 starts at the zenith.

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <vector>

namespace panogeo {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct SphericalCoord {
  double theta = 0.0;  // longitude, radians
  double phi = 0.0;    // latitude, radians

  bool is_valid() const;
};

struct PixelCoord {
  double u = 0.0;
  double v = 0.0;
};

// Unit vector. Construction normalizes; a (near) zero vector is rejected.
class Direction {
 public:
  explicit Direction(const Vec3& v);
  Direction(double x, double y, double z) : Direction(Vec3(x, y, z)) {}

  const Vec3& vec() const { return v_; }
  double x() const { return v_.x(); }
  double y() const { return v_.y(); }
  double z() const { return v_.z(); }

 private:
  Vec3 v_;
};

// Generic multi-channel float raster, row-major and channel-interleaved.
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, int channels, float fill = 0.0f);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }

  float at(int x, int y, int c = 0) const {
    return data_[(static_cast<size_t>(y) * width_ + x) * channels_ + c];
  }
  float& at(int x, int y, int c = 0) {
    return data_[(static_cast<size_t>(y) * width_ + x) * channels_ + c];
  }

  const std::vector<float>& data() const { return data_; }
  std::vector<float>& data() { return data_; }

  bool operator==(const Raster& other) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

// Equirectangular raster: width == 2 * height, 1 or 3 channels.
class EquirectImage : public Raster {
 public:
  EquirectImage() = default;
  EquirectImage(int width, int height, int channels, float fill = 0.0f);
  explicit EquirectImage(Raster raster);
};

// Per-pixel Euclidean ray length in meters with a validity mask.
class DepthMap {
 public:
  DepthMap() = default;
  // All pixels start invalid.
  DepthMap(int width, int height);
  // All pixels valid at the given distance.
  DepthMap(int width, int height, double fill);

  int width() const { return width_; }
  int height() const { return height_; }

  bool valid(int x, int y) const { return valid_[index(x, y)] != 0; }
  double distance(int x, int y) const { return distances_[index(x, y)]; }

  // Rejects non-positive or non-finite distances.
  void set(int x, int y, double distance);
  void invalidate(int x, int y);

  const std::vector<double>& distances() const { return distances_; }
  const std::vector<std::uint8_t>& valid_mask() const { return valid_; }
  size_t valid_count() const;

  bool operator==(const DepthMap& other) const = default;

 private:
  size_t index(int x, int y) const {
    return static_cast<size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> distances_;
  std::vector<std::uint8_t> valid_;
};

enum class CloudFrame { kCameraLocal, kAnchorWorld };

const char* to_string(CloudFrame frame);

using Rgb8 = std::array<std::uint8_t, 3>;

// 3D points tagged with the frame they are expressed in. The tag is fixed at
// construction.
class PointCloud {
 public:
  explicit PointCloud(CloudFrame frame) : frame_(frame) {}
  PointCloud(CloudFrame frame, std::vector<Vec3> points,
             std::vector<Rgb8> colors = {});

  CloudFrame frame() const { return frame_; }
  size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  bool has_colors() const { return !colors_.empty(); }

  const std::vector<Vec3>& points() const { return points_; }
  std::vector<Vec3>& points() { return points_; }
  const std::vector<Rgb8>& colors() const { return colors_; }
  std::vector<Rgb8>& colors() { return colors_; }

 private:
  CloudFrame frame_;
  std::vector<Vec3> points_;
  std::vector<Rgb8> colors_;
};

// Point map on the pixel grid with holes where the depth was invalid.
struct OrganizedCloud {
  int width = 0;
  int height = 0;
  std::vector<Vec3> points;
  std::vector<std::uint8_t> valid;

  bool is_valid(int x, int y) const {
    return valid[static_cast<size_t>(y) * width + x] != 0;
  }
  const Vec3& at(int x, int y) const {
    return points[static_cast<size_t>(y) * width + x];
  }
};

// Wraps a longitude into [-pi, pi).
double wrap_longitude(double theta);
// Wraps a continuous column coordinate into [0, width).
double wrap_column(double u, int width);

SphericalCoord pixel_to_angles(double u, double v, int width, int height);
PixelCoord angles_to_pixel(const SphericalCoord& c, int width, int height);

Direction angles_to_dir(const SphericalCoord& c);
// Longitude is pinned to 0 at the poles.
SphericalCoord dir_to_angles(const Vec3& d);
inline SphericalCoord dir_to_angles(const Direction& d) {
  return dir_to_angles(d.vec());
}

// Ray direction through the center of integer pixel (x, y).
Vec3 pixel_ray(int x, int y, int width, int height);

// Valid pixels only, in row-major order.
PointCloud depth_to_local_points(const DepthMap& depth);
OrganizedCloud depth_to_organized_points(const DepthMap& depth);

}  // namespace panogeo
