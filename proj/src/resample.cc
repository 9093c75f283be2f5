#include "panogeo/resample.h"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "panogeo/error.h"
#include "panogeo/parallel.h"

namespace panogeo {

using std::numbers::pi;

namespace {

inline int wrap_index(long i, int n) {
  long m = i % n;
  return static_cast<int>(m < 0 ? m + n : m);
}

inline int clamp_index(long i, int n) {
  return static_cast<int>(std::clamp<long>(i, 0, n - 1));
}

// Source coordinates for every output pixel, row by row: R^T d for the
// output ray d.
template <typename Fn>
void for_each_rotated_pixel(int width, int height, const Rotation& r, Fn&& fn) {
  const Mat3 rt = r.matrix().transpose();
  parallel_for(0, height, [&](int y) {
    for (int x = 0; x < width; ++x) {
      const Vec3 src_dir = rt * pixel_ray(x, y, width, height);
      const PixelCoord p = angles_to_pixel(dir_to_angles(src_dir), width, height);
      fn(x, y, p);
    }
  });
}

// Source coordinates in a (src_w x src_h) panorama for every pixel of a
// (width x height) one.
template <typename Fn>
void for_each_resized_pixel(int width, int height, int src_w, int src_h, Fn&& fn) {
  if (width != 2 * height || height < 1) throw ContractError("target resolution must be 2:1");
  parallel_for(0, height, [&](int y) {
    for (int x = 0; x < width; ++x) {
      fn(x, y, angles_to_pixel(pixel_to_angles(x, y, width, height), src_w, src_h));
    }
  });
}

}  // namespace

EquirectImage resize_equirect(const EquirectImage& src, int width, int height,
                              Interp interp) {
  EquirectImage out(width, height, src.channels());
  for_each_resized_pixel(width, height, src.width(), src.height(),
                         [&](int x, int y, const PixelCoord& p) {
                           float* dst = &out.at(x, y, 0);
                           if (interp == Interp::kBilinear) {
                             sample_bilinear(src, p.u, p.v, dst);
                           } else {
                             sample_nearest(src, p.u, p.v, dst);
                           }
                         });
  return out;
}

DepthMap resize_depth_nearest(const DepthMap& src, int width, int height) {
  DepthMap out(width, height);
  for_each_resized_pixel(width, height, src.width(), src.height(),
                         [&](int x, int y, const PixelCoord& p) {
                           const int sx = wrap_index(static_cast<long>(std::floor(p.u + 0.5)),
                                                     src.width());
                           const int sy = clamp_index(static_cast<long>(std::floor(p.v + 0.5)),
                                                      src.height());
                           if (src.valid(sx, sy)) out.set(x, y, src.distance(sx, sy));
                         });
  return out;
}

void sample_bilinear(const Raster& src, double u, double v, float* out) {
  const int w = src.width();
  const int h = src.height();
  const double fu = std::floor(u);
  const double fv = std::floor(v);
  const double a = u - fu;
  const double b = v - fv;
  const int x0 = wrap_index(static_cast<long>(fu), w);
  const int x1 = wrap_index(static_cast<long>(fu) + 1, w);
  const int y0 = clamp_index(static_cast<long>(fv), h);
  const int y1 = clamp_index(static_cast<long>(fv) + 1, h);
  for (int c = 0; c < src.channels(); ++c) {
    const double top = (1 - a) * src.at(x0, y0, c) + a * src.at(x1, y0, c);
    const double bot = (1 - a) * src.at(x0, y1, c) + a * src.at(x1, y1, c);
    out[c] = static_cast<float>((1 - b) * top + b * bot);
  }
}

void sample_nearest(const Raster& src, double u, double v, float* out) {
  const int x = wrap_index(static_cast<long>(std::floor(u + 0.5)), src.width());
  const int y = clamp_index(static_cast<long>(std::floor(v + 0.5)), src.height());
  for (int c = 0; c < src.channels(); ++c) out[c] = src.at(x, y, c);
}

EquirectImage rotate_equirect(const EquirectImage& src, const Rotation& r,
                              Interp interp) {
  EquirectImage out(src.width(), src.height(), src.channels());
  for_each_rotated_pixel(src.width(), src.height(), r,
                         [&](int x, int y, const PixelCoord& p) {
                           float* dst = &out.at(x, y, 0);
                           if (interp == Interp::kBilinear) {
                             sample_bilinear(src, p.u, p.v, dst);
                           } else {
                             sample_nearest(src, p.u, p.v, dst);
                           }
                         });
  return out;
}

DepthMap rotate_equirect(const DepthMap& src, const Rotation& r, Interp interp) {
  const int w = src.width();
  const int h = src.height();
  DepthMap out(w, h);
  for_each_rotated_pixel(w, h, r, [&](int x, int y, const PixelCoord& p) {
    if (interp == Interp::kNearest) {
      const int sx = wrap_index(static_cast<long>(std::floor(p.u + 0.5)), w);
      const int sy = clamp_index(static_cast<long>(std::floor(p.v + 0.5)), h);
      if (src.valid(sx, sy)) out.set(x, y, src.distance(sx, sy));
      return;
    }
    const double fu = std::floor(p.u);
    const double fv = std::floor(p.v);
    const double a = p.u - fu;
    const double b = p.v - fv;
    const int x0 = wrap_index(static_cast<long>(fu), w);
    const int x1 = wrap_index(static_cast<long>(fu) + 1, w);
    const int y0 = clamp_index(static_cast<long>(fv), h);
    const int y1 = clamp_index(static_cast<long>(fv) + 1, h);
    if (!src.valid(x0, y0) || !src.valid(x1, y0) || !src.valid(x0, y1) ||
        !src.valid(x1, y1)) {
      return;
    }
    const double top = (1 - a) * src.distance(x0, y0) + a * src.distance(x1, y0);
    const double bot = (1 - a) * src.distance(x0, y1) + a * src.distance(x1, y1);
    out.set(x, y, (1 - b) * top + b * bot);
  });
  return out;
}

Vec3 pinhole_ray(double x, double y, double fov_deg, int width, int height) {
  const double f = (width / 2.0) / std::tan(fov_deg * pi / 360.0);
  const Vec3 ray((x + 0.5 - width / 2.0) / f, -(y + 0.5 - height / 2.0) / f, 1.0);
  return ray.normalized();
}

std::optional<PixelCoord> project_to_view(const Rotation& view_rot,
                                          double fov_deg, int width, int height,
                                          const Vec3& dir) {
  const Vec3 c = view_rot.matrix().transpose() * dir;
  if (!(c.z() > 0)) return std::nullopt;
  const double f = (width / 2.0) / std::tan(fov_deg * pi / 360.0);
  const double u = f * c.x() / c.z() + width / 2.0;
  const double v = -f * c.y() / c.z() + height / 2.0;
  if (u < 0 || u > width || v < 0 || v > height) return std::nullopt;
  return PixelCoord{u, v};
}

PinholeView equirect_to_pinhole(const EquirectImage& src,
                                const Rotation& view_rot, double fov_deg,
                                int out_w, int out_h) {
  if (!(fov_deg > 0 && fov_deg < 180)) {
    throw ContractError("pinhole fov must lie in (0, 180) degrees");
  }
  PinholeView view{Raster(out_w, out_h, src.channels()), fov_deg, view_rot};
  const Mat3& rm = view_rot.matrix();
  parallel_for(0, out_h, [&](int y) {
    for (int x = 0; x < out_w; ++x) {
      const Vec3 d = rm * pinhole_ray(x, y, fov_deg, out_w, out_h);
      const PixelCoord p = angles_to_pixel(dir_to_angles(d), src.width(), src.height());
      sample_bilinear(src, p.u, p.v, &view.image.at(x, y, 0));
    }
  });
  return view;
}

std::array<Rotation, 12> dodeca_views() {
  std::array<Vec3, 12> dirs;
  const double lat = std::atan(0.5);
  dirs[0] = Vec3(0, 1, 0);
  dirs[1] = Vec3(0, -1, 0);
  for (int i = 0; i < 5; ++i) {
    const double upper_lon = 2 * pi * i / 5;
    const double lower_lon = upper_lon + pi / 5;
    dirs[2 + i] = Vec3(std::cos(lat) * std::sin(upper_lon), std::sin(lat),
                       std::cos(lat) * std::cos(upper_lon));
    dirs[7 + i] = Vec3(std::cos(lat) * std::sin(lower_lon), -std::sin(lat),
                       std::cos(lat) * std::cos(lower_lon));
  }

  std::array<Rotation, 12> views;
  for (int i = 0; i < 12; ++i) {
    const Vec3 fwd = dirs[i].normalized();
    Vec3 ref(0, 1, 0);
    if (std::abs(fwd.dot(ref)) > 1 - 1e-9) ref = Vec3(0, 0, 1);
    const Vec3 up = (ref - ref.dot(fwd) * fwd).normalized();
    const Vec3 right = up.cross(fwd);
    Mat3 m;
    m.col(0) = right;
    m.col(1) = up;
    m.col(2) = fwd;
    views[i] = Rotation::project(m);
  }
  return views;
}

std::vector<PinholeView> dodeca_split(const EquirectImage& src, double fov_deg,
                                      int out_res) {
  std::vector<PinholeView> out;
  out.reserve(12);
  for (const Rotation& r : dodeca_views()) {
    out.push_back(equirect_to_pinhole(src, r, fov_deg, out_res, out_res));
  }
  return out;
}

}  // namespace panogeo
