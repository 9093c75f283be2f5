#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "panogeo/rigid_motion.h"
#include "panogeo/sphere_geom.h"

namespace panogeo {

// ---------------------------------------------------------------------------
// Pose

struct PosePairError {
  size_t i = 0;
  size_t j = 0;
  double rot_deg = 0.0;
  double trans_deg = 0.0;
  bool valid = true;  // false when the ground-truth baseline is below 1e-6 m
};

inline constexpr double kZeroTranslationThreshold = 1e-6;  // meters

// Errors for every unordered pair i < j. A predicted baseline too short to
// define a direction scores the maximal 180 degrees.
std::vector<PosePairError> pose_pair_errors(const std::vector<Pose>& pred,
                                            const std::vector<Pose>& gt);

// Normalized area under the accuracy curve of max(rot, trans) on [0,
// max_deg], integrated exactly. Empty when no pair is valid.
std::optional<double> pose_auc(const std::vector<PosePairError>& errors,
                               double max_deg = 30.0);

struct PoseMetrics {
  std::optional<double> auc30;
  double rot_mean = 0.0;
  double rot_med = 0.0;
  double trans_mean = 0.0;
  double trans_med = 0.0;
  size_t valid_pairs = 0;
  size_t filtered_pairs = 0;
};

PoseMetrics pose_metrics(const std::vector<Pose>& pred, const std::vector<Pose>& gt);

// ---------------------------------------------------------------------------
// Depth

// Robust (approximately L1) scale by iteratively reweighted least squares,
// started from the closed-form L2 scale.
double irls_scale(std::span<const double> pred, std::span<const double> gt,
                  std::span<const std::uint8_t> mask);

struct ScaleShift {
  double scale = 1.0;
  double shift = 0.0;
};

ScaleShift scale_shift_align(std::span<const double> pred,
                             std::span<const double> gt,
                             std::span<const std::uint8_t> mask);

enum class DepthAlignment { kIrlsScale, kScaleShift, kNone };

struct DepthMetrics {
  double abs_rel = 0.0;
  double rmse = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;

  double scale = 1.0;
  double shift = 0.0;
  size_t count = 0;
  size_t dropped_nonpositive_gt = 0;
};

DepthMetrics depth_metrics(std::span<const double> pred,
                           std::span<const double> gt,
                           std::span<const std::uint8_t> mask,
                           DepthAlignment alignment);

// Mask is the intersection of both validity masks.
DepthMetrics depth_metrics(const DepthMap& pred, const DepthMap& gt,
                           DepthAlignment alignment);

// ---------------------------------------------------------------------------
// Point clouds

struct Similarity {
  double scale = 1.0;
  Rotation rot;
  Vec3 trans = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return scale * (rot * p) + trans; }
};

// Least-squares similarity mapping src[i] onto dst[i].
Similarity umeyama_align(const std::vector<Vec3>& src, const std::vector<Vec3>& dst);

enum class PcAlign { kNone, kSimilarity };
enum class PcCorrespondence { kNearest, kIndex };

inline constexpr double kVoxelIndoorDefault = 0.05;
inline constexpr double kVoxelCityDefault = 0.25;

struct PcConfig {
  double voxel_size = 0.0;  // <= 0 disables downsampling
  PcAlign align = PcAlign::kNone;
  PcCorrespondence correspondence = PcCorrespondence::kNearest;
  int icp_iterations = 30;
};

// Similarity aligning pred onto gt: index pairing, or iterated
// nearest-neighbor matching started from centroid and RMS-radius matching.
Similarity align_clouds(const PointCloud& pred, const PointCloud& gt,
                        PcCorrespondence correspondence, int iterations = 30);

// Voxel-grid centroids, ordered by voxel key.
PointCloud voxel_downsample(const PointCloud& cloud, double voxel_size);

struct PcMetrics {
  double acc_mean = 0.0;
  double acc_med = 0.0;
  double comp_mean = 0.0;
  double comp_med = 0.0;
  double overall_mean = 0.0;
  double overall_med = 0.0;

  size_t pred_points = 0;
  size_t gt_points = 0;
  std::optional<Similarity> alignment;
};

PcMetrics pc_metrics(const PointCloud& pred, const PointCloud& gt,
                     const PcConfig& cfg = {});

// Exact nearest-neighbor distance from every query point to the reference.
std::vector<double> nearest_distances(const std::vector<Vec3>& queries,
                                      const std::vector<Vec3>& reference);

double mean_of(std::vector<double> values);
double median_of(std::vector<double> values);

}  // namespace panogeo
