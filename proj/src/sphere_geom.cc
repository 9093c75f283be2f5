#include "panogeo/sphere_geom.h"

#include <cmath>
#include <numbers>
#include <string>

#include "panogeo/error.h"

namespace panogeo {

using std::numbers::pi;

bool SphericalCoord::is_valid() const {
  return std::isfinite(theta) && std::isfinite(phi) && theta >= -pi &&
         theta < pi && phi >= -pi / 2 && phi <= pi / 2;
}

Direction::Direction(const Vec3& v) {
  const double n = v.norm();
  if (!(n > 1e-12) || !std::isfinite(n)) {
    throw DomainError("direction from zero or non-finite vector");
  }
  v_ = v / n;
}

Raster::Raster(int width, int height, int channels, float fill)
    : width_(width), height_(height), channels_(channels) {
  if (width < 1 || height < 1 || channels < 1) {
    throw ContractError("raster dimensions must be positive");
  }
  data_.assign(static_cast<size_t>(width) * height * channels, fill);
}

namespace {
void check_equirect(int width, int height, int channels) {
  if (width != 2 * height || height < 1 || width < 2) {
    throw ContractError("equirectangular image must have width == 2*height, got " +
                        std::to_string(width) + "x" + std::to_string(height));
  }
  if (channels != 1 && channels != 3) {
    throw ContractError("equirectangular image must have 1 or 3 channels");
  }
}
}  // namespace

EquirectImage::EquirectImage(int width, int height, int channels, float fill)
    : Raster((check_equirect(width, height, channels), width), height, channels,
             fill) {}

EquirectImage::EquirectImage(Raster raster) : Raster(std::move(raster)) {
  check_equirect(this->width(), this->height(), this->channels());
}

DepthMap::DepthMap(int width, int height) : width_(width), height_(height) {
  if (width != 2 * height || height < 1) {
    throw ContractError("depth map must have width == 2*height");
  }
  distances_.assign(static_cast<size_t>(width) * height, 0.0);
  valid_.assign(distances_.size(), 0);
}

DepthMap::DepthMap(int width, int height, double fill) : DepthMap(width, height) {
  if (!(fill > 0) || !std::isfinite(fill)) {
    throw ContractError("depth fill value must be positive and finite");
  }
  std::fill(distances_.begin(), distances_.end(), fill);
  std::fill(valid_.begin(), valid_.end(), 1);
}

void DepthMap::set(int x, int y, double distance) {
  if (!(distance > 0) || !std::isfinite(distance)) {
    throw ContractError("depth must be positive and finite");
  }
  distances_[index(x, y)] = distance;
  valid_[index(x, y)] = 1;
}

void DepthMap::invalidate(int x, int y) {
  distances_[index(x, y)] = 0.0;
  valid_[index(x, y)] = 0;
}

size_t DepthMap::valid_count() const {
  size_t n = 0;
  for (auto v : valid_) n += v;
  return n;
}

const char* to_string(CloudFrame frame) {
  return frame == CloudFrame::kCameraLocal ? "camera_local" : "anchor_world";
}

PointCloud::PointCloud(CloudFrame frame, std::vector<Vec3> points,
                       std::vector<Rgb8> colors)
    : frame_(frame), points_(std::move(points)), colors_(std::move(colors)) {
  if (!colors_.empty() && colors_.size() != points_.size()) {
    throw ContractError("color count must match point count");
  }
}

double wrap_longitude(double theta) {
  if (theta >= -pi && theta < pi) return theta;
  double w = theta - 2 * pi * std::floor((theta + pi) / (2 * pi));
  if (w >= pi) w -= 2 * pi;
  if (w < -pi) w = -pi;
  return w;
}

double wrap_column(double u, int width) {
  double w = std::fmod(u, static_cast<double>(width));
  if (w < 0) w += width;
  if (w >= width) w = 0.0;
  return w;
}

SphericalCoord pixel_to_angles(double u, double v, int width, int height) {
  if (!(u >= 0 && u < width && v >= 0 && v < height)) {
    throw DomainError("pixel (" + std::to_string(u) + ", " + std::to_string(v) +
                      ") outside " + std::to_string(width) + "x" +
                      std::to_string(height));
  }
  SphericalCoord c;
  c.theta = wrap_longitude(2 * pi * (u + 0.5) / width - pi);
  c.phi = std::max(-pi / 2, pi / 2 - pi * (v + 0.5) / height);
  return c;
}

PixelCoord angles_to_pixel(const SphericalCoord& c, int width, int height) {
  const double theta = wrap_longitude(c.theta);
  return {(theta + pi) * width / (2 * pi) - 0.5,
          (pi / 2 - c.phi) * height / pi - 0.5};
}

Direction angles_to_dir(const SphericalCoord& c) {
  const double cp = std::cos(c.phi);
  return Direction(cp * std::sin(c.theta), std::sin(c.phi),
                   cp * std::cos(c.theta));
}

SphericalCoord dir_to_angles(const Vec3& d) {
  const double n = d.norm();
  if (!(n > 1e-12) || !std::isfinite(n)) {
    throw DomainError("angles of zero or non-finite direction");
  }
  const Vec3 u = d / n;
  const double horiz = std::hypot(u.x(), u.z());
  SphericalCoord c;
  c.phi = std::atan2(u.y(), horiz);
  if (horiz == 0.0) {
    c.theta = 0.0;
    c.phi = u.y() > 0 ? pi / 2 : -pi / 2;
    return c;
  }
  c.theta = std::atan2(u.x(), u.z());
  if (c.theta >= pi) c.theta = -pi;
  return c;
}

Vec3 pixel_ray(int x, int y, int width, int height) {
  const double theta = 2 * pi * (x + 0.5) / width - pi;
  const double phi = pi / 2 - pi * (y + 0.5) / height;
  const double cp = std::cos(phi);
  return Vec3(cp * std::sin(theta), std::sin(phi), cp * std::cos(theta));
}

PointCloud depth_to_local_points(const DepthMap& depth) {
  PointCloud cloud(CloudFrame::kCameraLocal);
  cloud.points().reserve(depth.valid_count());
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      if (!depth.valid(x, y)) continue;
      cloud.points().push_back(depth.distance(x, y) *
                               pixel_ray(x, y, depth.width(), depth.height()));
    }
  }
  return cloud;
}

OrganizedCloud depth_to_organized_points(const DepthMap& depth) {
  OrganizedCloud out;
  out.width = depth.width();
  out.height = depth.height();
  out.points.assign(static_cast<size_t>(out.width) * out.height, Vec3::Zero());
  out.valid = depth.valid_mask();
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      if (!depth.valid(x, y)) continue;
      out.points[static_cast<size_t>(y) * out.width + x] =
          depth.distance(x, y) * pixel_ray(x, y, depth.width(), depth.height());
    }
  }
  return out;
}

}  // namespace panogeo
