#pragma once

#include <cstdint>
#include <vector>

#include "panogeo/rigid_motion.h"
#include "panogeo/sphere_geom.h"

namespace panogeo {

struct LossWeights {
  double lambda_t = 100.0;  // translation weight inside the pose term
  double lambda_g = 0.1;    // weight of the whole pose term
};

inline constexpr double kDepthEdgeTauDefault = 0.1;
inline constexpr double kSmoothL1BetaDefault = 1.0;  // radians

struct LossComponents {
  double lp = 0.0;
  double gp = 0.0;
  double nor = 0.0;
  double rot = 0.0;
  double trans = 0.0;
  double s_star = 1.0;
};

struct LossReport {
  double lp = 0.0;
  double gp = 0.0;
  double nor = 0.0;
  double rot = 0.0;
  double trans = 0.0;
  double total = 0.0;
  double s_star = 1.0;

  LossWeights weights;
  // Bookkeeping so silent shrinkage of the supervised set is visible.
  size_t local_points = 0;
  size_t global_points = 0;
  size_t normal_pixels = 0;
  size_t pose_pairs = 0;
  bool normal_set_empty = false;
};

// Closed-form least-squares scale aligning predictions to ground truth,
// clamped to max(|s|, 1e-6). Clouds are paired per frame and must have equal
// point counts.
double optimal_scale(const std::vector<PointCloud>& pred,
                     const std::vector<PointCloud>& gt);
// Organized form: only pixels valid in both clouds contribute.
double optimal_scale(const std::vector<OrganizedCloud>& pred,
                     const std::vector<OrganizedCloud>& gt);

// Sum over points of || s * pred - gt ||_1.
double point_loss(const PointCloud& pred, const PointCloud& gt, double s);

// 1 where a pixel is valid and none of its 4-neighbors (longitude wraps) is
// invalid or jumps by more than tau_rel relative to the smaller depth.
std::vector<std::uint8_t> depth_edge_mask(const DepthMap& depth,
                                          double tau_rel = kDepthEdgeTauDefault);

struct NormalMap {
  int width = 0;
  int height = 0;
  std::vector<Vec3> normals;
  std::vector<std::uint8_t> valid;

  bool is_valid(int x, int y) const {
    return valid[static_cast<size_t>(y) * width + x] != 0;
  }
  const Vec3& at(int x, int y) const {
    return normals[static_cast<size_t>(y) * width + x];
  }
};

// Central-difference normals from the 4-neighborhood, oriented toward the
// camera. Undefined where any neighbor is invalid or out of the image.
NormalMap estimate_normals(const OrganizedCloud& local_points);

double smooth_l1(double x, double beta = kSmoothL1BetaDefault);

struct NormalLoss {
  double value = 0.0;
  size_t count = 0;
  bool empty = false;
};

// Mean SmoothL1 of the angle between predicted and ground-truth normals over
// pixels in omega where both normals are defined.
NormalLoss normal_loss(const OrganizedCloud& pred, const OrganizedCloud& gt,
                       const std::vector<std::uint8_t>& omega,
                       double beta = kSmoothL1BetaDefault);

double rotation_loss(const Rotation& pred_rel, const Rotation& gt_rel);
double translation_loss(const Vec3& pred_t, const Vec3& gt_t, double s);

LossReport total_loss(const LossComponents& c, const LossWeights& w = {});

enum class PairSet { kAllOrdered, kAnchorSpokes };

struct GeometryFrame {
  Pose pose;              // camera-to-anchor
  OrganizedCloud local;   // camera frame
  OrganizedCloud global;  // anchor frame
};

struct LossConfig {
  LossWeights weights;
  double tau_rel = kDepthEdgeTauDefault;
  double beta = kSmoothL1BetaDefault;
  PairSet pairs = PairSet::kAllOrdered;
  size_t anchor = 0;  // spoke center for PairSet::kAnchorSpokes
};

// Full multi-task objective over a frame set with one shared scale.
LossReport compute_losses(const std::vector<GeometryFrame>& pred,
                          const std::vector<GeometryFrame>& gt,
                          const LossConfig& cfg = {});

}  // namespace panogeo
