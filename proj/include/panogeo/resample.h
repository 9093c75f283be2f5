#pragma once

#include <array>
#include <optional>
#include <vector>

#include "panogeo/rigid_motion.h"
#include "panogeo/sphere_geom.h"

namespace panogeo {

enum class Interp { kBilinear, kNearest };

// Inverse-mapped rotation of panorama content: the output pixel with ray d
// reads the source at R^T d, so content at source direction x appears at R x.
// Longitude wraps; rows clamp at the poles.
EquirectImage rotate_equirect(const EquirectImage& src, const Rotation& r,
                              Interp interp = Interp::kBilinear);

// Nearest transports validity with the winning sample. Bilinear requires all
// four taps to be valid.
DepthMap rotate_equirect(const DepthMap& src, const Rotation& r,
                         Interp interp = Interp::kNearest);

// Resampling to another resolution with unchanged orientation.
EquirectImage resize_equirect(const EquirectImage& src, int width, int height,
                              Interp interp = Interp::kBilinear);
DepthMap resize_depth_nearest(const DepthMap& src, int width, int height);

// Samples all channels at continuous pixel coordinates (pixel centers at
// integers) into `out`, wrapping columns and clamping rows.
void sample_bilinear(const Raster& src, double u, double v, float* out);
void sample_nearest(const Raster& src, double u, double v, float* out);

// Perspective crop of a panorama. The view camera uses the same axes as the
// panorama camera (x right, y up, z forward) and view_rot maps view-camera
// coordinates into panorama-camera coordinates.
struct PinholeView {
  Raster image;
  double fov_deg = 0.0;  // horizontal field of view
  Rotation view_rot;
};

// Unit ray through pixel-center (x + 0.5, y + 0.5) in view-camera coordinates.
Vec3 pinhole_ray(double x, double y, double fov_deg, int width, int height);

// Continuous image coordinates of a panorama-camera direction inside the
// view, or nullopt when it falls outside the frustum.
std::optional<PixelCoord> project_to_view(const Rotation& view_rot,
                                          double fov_deg, int width, int height,
                                          const Vec3& dir);

PinholeView equirect_to_pinhole(const EquirectImage& src,
                                const Rotation& view_rot, double fov_deg,
                                int out_w, int out_h);

inline constexpr double kDodecaDefaultFovDeg = 75.0;
inline constexpr int kDodecaDefaultResolution = 512;

// View rotations centered on the 12 face directions of a regular
// dodecahedron (icosahedron vertices), arranged with two polar views and two
// rings of five at latitude +-atan(1/2). Up vector is +y projected onto the
// image plane, +z for the polar views.
std::array<Rotation, 12> dodeca_views();

std::vector<PinholeView> dodeca_split(const EquirectImage& src,
                                      double fov_deg = kDodecaDefaultFovDeg,
                                      int out_res = kDodecaDefaultResolution);

}  // namespace panogeo
