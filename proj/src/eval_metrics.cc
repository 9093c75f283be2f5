#include "panogeo/eval_metrics.h"

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "panogeo/error.h"
#include "panogeo/kdtree.h"
#include "panogeo/parallel.h"

namespace panogeo {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

void check_spans(size_t a, size_t b, size_t m) {
  if (a != b || a != m) throw ContractError("depth arrays and mask differ in length");
}

}  // namespace

double mean_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  // Sorting first fixes the summation order, so the result does not depend
  // on input order.
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double median_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// ---------------------------------------------------------------------------
// Pose

std::vector<PosePairError> pose_pair_errors(const std::vector<Pose>& pred,
                                            const std::vector<Pose>& gt) {
  if (pred.size() != gt.size()) throw ContractError("pose lists differ in length");
  if (pred.size() < 2) throw ContractError("pose evaluation needs at least two frames");
  std::vector<PosePairError> out;
  for (size_t i = 0; i < pred.size(); ++i) {
    for (size_t j = i + 1; j < pred.size(); ++j) {
      const Pose pr = relative_pose(pred[i], pred[j]);
      const Pose gr = relative_pose(gt[i], gt[j]);
      PosePairError e;
      e.i = i;
      e.j = j;
      e.rot_deg = rot_angular_distance(pr.rot, gr.rot) * kRadToDeg;
      if (gr.trans.norm() < kZeroTranslationThreshold) {
        e.valid = false;
      } else if (pr.trans.norm() <= 1e-12) {
        e.trans_deg = 180.0;
      } else {
        e.trans_deg = vec_angular_distance(pr.trans, gr.trans) * kRadToDeg;
      }
      out.push_back(e);
    }
  }
  return out;
}

std::optional<double> pose_auc(const std::vector<PosePairError>& errors, double max_deg) {
  std::vector<double> e;
  for (const auto& p : errors) {
    if (p.valid) e.push_back(std::max(p.rot_deg, p.trans_deg));
  }
  if (e.empty()) return std::nullopt;
  // Each pair contributes the length of [e, max_deg] on which it counts as
  // accurate (strict threshold, so the endpoint has measure zero).
  std::sort(e.begin(), e.end());
  double area = 0.0;
  for (double v : e) area += std::max(0.0, max_deg - v);
  return area / (max_deg * static_cast<double>(e.size()));
}

PoseMetrics pose_metrics(const std::vector<Pose>& pred, const std::vector<Pose>& gt) {
  const auto errors = pose_pair_errors(pred, gt);
  PoseMetrics m;
  std::vector<double> rot, trans;
  for (const auto& e : errors) {
    if (!e.valid) {
      ++m.filtered_pairs;
      continue;
    }
    rot.push_back(e.rot_deg);
    trans.push_back(e.trans_deg);
  }
  m.valid_pairs = rot.size();
  m.auc30 = pose_auc(errors, 30.0);
  m.rot_mean = mean_of(rot);
  m.rot_med = median_of(rot);
  m.trans_mean = mean_of(trans);
  m.trans_med = median_of(trans);
  return m;
}

// ---------------------------------------------------------------------------
// Depth

double irls_scale(std::span<const double> pred, std::span<const double> gt,
                  std::span<const std::uint8_t> mask) {
  check_spans(pred.size(), gt.size(), mask.size());
  size_t n = 0;
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    if (!mask[i]) continue;
    num += pred[i] * gt[i];
    den += pred[i] * pred[i];
    ++n;
  }
  if (n < 10) throw ContractError("irls_scale needs at least 10 valid pixels");
  if (den < 1e-12) return 1e-6;
  double s = num / den;
  for (int iter = 0; iter < 50; ++iter) {
    double wnum = 0.0, wden = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) {
      if (!mask[i]) continue;
      const double w = 1.0 / std::max(std::abs(s * pred[i] - gt[i]), 1e-6);
      wnum += w * pred[i] * gt[i];
      wden += w * pred[i] * pred[i];
    }
    if (wden < 1e-300) break;
    const double next = wnum / wden;
    const double change = std::abs(next - s) / std::max(std::abs(s), 1e-300);
    s = next;
    if (change < 1e-8) break;
  }
  return std::max(std::abs(s), 1e-6);
}

ScaleShift scale_shift_align(std::span<const double> pred,
                             std::span<const double> gt,
                             std::span<const std::uint8_t> mask) {
  check_spans(pred.size(), gt.size(), mask.size());
  size_t n = 0;
  double mp = 0.0, mg = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    if (!mask[i]) continue;
    mp += pred[i];
    mg += gt[i];
    ++n;
  }
  if (n < 10) throw ContractError("scale_shift_align needs at least 10 valid pixels");
  mp /= static_cast<double>(n);
  mg /= static_cast<double>(n);
  double cov = 0.0, var = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    if (!mask[i]) continue;
    cov += (pred[i] - mp) * (gt[i] - mg);
    var += (pred[i] - mp) * (pred[i] - mp);
  }
  if (!(var > 1e-12 * std::max(1.0, mp * mp) * static_cast<double>(n))) {
    throw ContractError("scale_shift_align: prediction has zero variance");
  }
  ScaleShift r;
  r.scale = cov / var;
  r.shift = mg - r.scale * mp;
  return r;
}

DepthMetrics depth_metrics(std::span<const double> pred, std::span<const double> gt,
                           std::span<const std::uint8_t> mask,
                           DepthAlignment alignment) {
  check_spans(pred.size(), gt.size(), mask.size());
  std::vector<std::uint8_t> m(mask.begin(), mask.end());
  DepthMetrics out;
  for (size_t i = 0; i < m.size(); ++i) {
    if (m[i] && !(gt[i] > 0)) {
      m[i] = 0;
      ++out.dropped_nonpositive_gt;
    }
  }
  switch (alignment) {
    case DepthAlignment::kIrlsScale:
      out.scale = irls_scale(pred, gt, m);
      break;
    case DepthAlignment::kScaleShift: {
      const ScaleShift ss = scale_shift_align(pred, gt, m);
      out.scale = ss.scale;
      out.shift = ss.shift;
      break;
    }
    case DepthAlignment::kNone:
      break;
  }

  std::vector<double> rel, sq;
  size_t d1 = 0, d2 = 0;
  for (size_t i = 0; i < m.size(); ++i) {
    if (!m[i]) continue;
    const double p = out.scale * pred[i] + out.shift;
    const double g = gt[i];
    rel.push_back(std::abs(p - g) / g);
    sq.push_back((p - g) * (p - g));
    // Non-positive predictions never satisfy a ratio threshold.
    if (p > 0) {
      const double ratio = std::max(p / g, g / p);
      if (ratio < 1.25) ++d1;
      if (ratio < 1.25 * 1.25) ++d2;
    }
  }
  out.count = rel.size();
  if (out.count == 0) throw ContractError("depth_metrics: no valid pixels");
  out.abs_rel = mean_of(std::move(rel));
  out.rmse = std::sqrt(mean_of(std::move(sq)));
  out.delta1 = static_cast<double>(d1) / static_cast<double>(out.count);
  out.delta2 = static_cast<double>(d2) / static_cast<double>(out.count);
  return out;
}

DepthMetrics depth_metrics(const DepthMap& pred, const DepthMap& gt,
                           DepthAlignment alignment) {
  if (pred.width() != gt.width() || pred.height() != gt.height()) {
    throw ContractError("depth maps differ in resolution");
  }
  std::vector<std::uint8_t> mask(pred.valid_mask().size());
  for (size_t i = 0; i < mask.size(); ++i) {
    mask[i] = pred.valid_mask()[i] && gt.valid_mask()[i];
  }
  return depth_metrics(pred.distances(), gt.distances(), mask, alignment);
}

// ---------------------------------------------------------------------------
// Point clouds

Similarity umeyama_align(const std::vector<Vec3>& src, const std::vector<Vec3>& dst) {
  if (src.size() != dst.size()) throw ContractError("umeyama_align: size mismatch");
  if (src.size() < 3) throw ContractError("umeyama_align needs at least 3 correspondences");
  const Eigen::Index n = static_cast<Eigen::Index>(src.size());
  Eigen::Matrix3Xd a(3, n), b(3, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a.col(i) = src[i];
    b.col(i) = dst[i];
  }
  const Eigen::Matrix3Xd ac = a.colwise() - a.rowwise().mean();
  const Eigen::Matrix3Xd bc = b.colwise() - b.rowwise().mean();
  Eigen::JacobiSVD<Mat3> svd_a(ac * ac.transpose());
  Eigen::JacobiSVD<Mat3> svd_b(bc * bc.transpose());
  const auto sa = svd_a.singularValues();
  const auto sb = svd_b.singularValues();
  if (!(sa(0) > 0) || sa(1) <= 1e-12 * sa(0) || !(sb(0) > 0) || sb(1) <= 1e-12 * sb(0)) {
    throw ContractError("umeyama_align: degenerate (collinear or coincident) points");
  }
  const Eigen::Matrix4d t = Eigen::umeyama(a, b, true);
  Similarity s;
  const Mat3 sr = t.topLeftCorner<3, 3>();
  s.scale = std::cbrt(sr.determinant());
  s.rot = Rotation::project(sr / s.scale);
  s.trans = t.topRightCorner<3, 1>();
  return s;
}

Similarity align_clouds(const PointCloud& pred, const PointCloud& gt,
                        PcCorrespondence correspondence, int iterations) {
  if (correspondence == PcCorrespondence::kIndex) {
    return umeyama_align(pred.points(), gt.points());
  }
  auto centroid = [](const std::vector<Vec3>& p) {
    Vec3 c = Vec3::Zero();
    for (const Vec3& x : p) c += x;
    return Vec3(c / static_cast<double>(p.size()));
  };
  auto rms = [](const std::vector<Vec3>& p, const Vec3& c) {
    double s = 0.0;
    for (const Vec3& x : p) s += (x - c).squaredNorm();
    return std::sqrt(s / static_cast<double>(p.size()));
  };
  const Vec3 cp = centroid(pred.points());
  const Vec3 cg = centroid(gt.points());
  const double rp = rms(pred.points(), cp);
  const double rg = rms(gt.points(), cg);
  Similarity s;
  s.scale = rp > 0 ? rg / rp : 1.0;
  s.trans = cg - s.scale * cp;

  const KdTree tree(gt.points());
  std::vector<Vec3> src(pred.size()), dst(pred.size());
  double prev_err = std::numeric_limits<double>::infinity();
  for (int it = 0; it < iterations; ++it) {
    double err = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) {
      const Vec3 moved = s.apply(pred.points()[i]);
      const KdTree::Hit h = tree.nearest(moved);
      src[i] = pred.points()[i];
      dst[i] = gt.points()[h.index];
      err += h.sq_dist;
    }
    s = umeyama_align(src, dst);
    if (std::abs(prev_err - err) <= 1e-12 * std::max(1.0, err)) break;
    prev_err = err;
  }
  return s;
}

PointCloud voxel_downsample(const PointCloud& cloud, double voxel_size) {
  if (!(voxel_size > 0)) return cloud;
  struct Entry {
    std::array<long long, 3> key;
    Vec3 p;
  };
  std::vector<Entry> entries;
  entries.reserve(cloud.size());
  for (const Vec3& p : cloud.points()) {
    entries.push_back({{static_cast<long long>(std::floor(p.x() / voxel_size)),
                        static_cast<long long>(std::floor(p.y() / voxel_size)),
                        static_cast<long long>(std::floor(p.z() / voxel_size))},
                       p});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.key != b.key) return a.key < b.key;
    return std::lexicographical_compare(a.p.data(), a.p.data() + 3, b.p.data(), b.p.data() + 3);
  });
  std::vector<Vec3> out;
  size_t i = 0;
  while (i < entries.size()) {
    size_t j = i;
    Vec3 sum = Vec3::Zero();
    while (j < entries.size() && entries[j].key == entries[i].key) sum += entries[j++].p;
    out.push_back(sum / static_cast<double>(j - i));
    i = j;
  }
  return PointCloud(cloud.frame(), std::move(out));
}

std::vector<double> nearest_distances(const std::vector<Vec3>& queries,
                                      const std::vector<Vec3>& reference) {
  const KdTree tree(reference);
  std::vector<double> d(queries.size());
  parallel_for(0, static_cast<int>(queries.size()),
               [&](int i) { d[i] = std::sqrt(tree.nearest(queries[i]).sq_dist); });
  return d;
}

PcMetrics pc_metrics(const PointCloud& pred_in, const PointCloud& gt_in,
                     const PcConfig& cfg) {
  if (pred_in.empty() || gt_in.empty()) throw ContractError("pc_metrics: empty cloud");
  if (pred_in.frame() != gt_in.frame()) throw ContractError("pc_metrics: frame mismatch");

  PcMetrics m;
  PointCloud pred = pred_in;
  if (cfg.align == PcAlign::kSimilarity) {
    const Similarity s = align_clouds(pred_in, gt_in, cfg.correspondence, cfg.icp_iterations);
    for (Vec3& p : pred.points()) p = s.apply(p);
    m.alignment = s;
  }
  pred = voxel_downsample(pred, cfg.voxel_size);
  const PointCloud gt = voxel_downsample(gt_in, cfg.voxel_size);
  m.pred_points = pred.size();
  m.gt_points = gt.size();

  std::vector<double> acc = nearest_distances(pred.points(), gt.points());
  std::vector<double> comp = nearest_distances(gt.points(), pred.points());
  m.acc_mean = mean_of(acc);
  m.acc_med = median_of(std::move(acc));
  m.comp_mean = mean_of(comp);
  m.comp_med = median_of(std::move(comp));
  m.overall_mean = 0.5 * (m.acc_mean + m.comp_mean);
  m.overall_med = 0.5 * (m.acc_med + m.comp_med);
  return m;
}

}  // namespace panogeo
