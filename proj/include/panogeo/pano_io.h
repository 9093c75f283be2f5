#pragma once

// On-disk formats. See docs/formats.md for the byte-level layouts.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "panogeo/augment.h"
#include "panogeo/rigid_motion.h"
#include "panogeo/sphere_geom.h"

namespace panogeo {

namespace fs = std::filesystem;

// PNG panoramas. Reads 8- or 16-bit gray/RGB and enforces width == 2 *
// height. Samples are normalized to [0, 1]; 16-bit writes are lossless for
// values on the 1/65535 grid.
EquirectImage read_pano(const fs::path& path);
void write_pano(const EquirectImage& image, const fs::path& path, int bit_depth = 16);

// Generic raster writer (pinhole views and other non-panoramic crops).
void write_png(const Raster& image, const fs::path& path, int bit_depth = 16);

// 16-bit single-channel depth PNG: meters = raw / depth_scale, raw 0 marks an
// invalid pixel. Valid depths quantize to [1, 65535].
DepthMap read_depth(const fs::path& path, double depth_scale);
void write_depth(const DepthMap& depth, const fs::path& path, double depth_scale);
// Scale placing `max_depth` at 95% of the 16-bit range.
double depth_scale_for(double max_depth);

// JSON {"cam_to_world": [[r00, r01, r02, t0], ..., [0, 0, 0, 1]]}.
// Rotations off by more than 1e-6 (but at most 1e-1) are re-orthonormalized
// by polar projection and reported through `warnings`.
Pose read_pose(const fs::path& path, std::vector<std::string>* warnings = nullptr);
void write_pose(const Pose& pose, const fs::path& path);
nlohmann::json pose_to_json(const Pose& pose);
Pose pose_from_json(const nlohmann::json& j, std::vector<std::string>* warnings = nullptr);

// Binary little-endian PLY with float32 xyz and optional uint8 rgb. The frame
// tag travels in a "comment frame <name>" header line.
void write_ply(const PointCloud& cloud, const fs::path& path);
PointCloud read_ply(const fs::path& path);

inline constexpr int kManifestFormatVersion = 1;

struct FrameRecord {
  std::string rgb_path;    // optional for prediction manifests
  std::string depth_path;
  double depth_scale = 0.0;
  std::string pose_path;
  std::string local_points_path;   // optional
  std::string global_points_path;  // optional
};

// Paths inside a manifest are relative to the manifest's directory.
struct Manifest {
  int format_version = kManifestFormatVersion;
  nlohmann::json scene = nlohmann::json::object();
  std::vector<FrameRecord> frames;
  fs::path base_dir;

  fs::path resolve(const std::string& rel) const { return base_dir / rel; }
};

Manifest read_manifest(const fs::path& path);
void write_manifest(const Manifest& manifest, const fs::path& path);

FrameTriplet load_triplet(const Manifest& manifest, size_t index,
                          std::vector<std::string>* warnings = nullptr);
// Writes rgb/depth/pose files named <stem>_rgb.png etc. into the manifest's
// base directory and returns the record.
FrameRecord save_triplet(const FrameTriplet& t, const Manifest& manifest,
                         const std::string& stem, double depth_scale);

// Tensor file: 8-byte magic "PGTENSR1", uint64 LE header length, UTF-8 JSON
// header (must hold "shape" and "dtype": "f64"), then row-major float64 LE.
void write_tensor(const fs::path& path, nlohmann::json header,
                  const std::vector<double>& data);
std::vector<double> read_tensor(const fs::path& path, nlohmann::json* header);

}  // namespace panogeo
