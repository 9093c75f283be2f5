#include "panogeo/losses.h"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

#include "panogeo/error.h"

namespace panogeo {

namespace {

double finish_scale(double num, double den) {
  if (den < 1e-12) return 1e-6;
  return std::max(std::abs(num / den), 1e-6);
}

void check_same_shape(const OrganizedCloud& a, const OrganizedCloud& b) {
  if (a.width != b.width || a.height != b.height) {
    throw ContractError("organized clouds differ in shape");
  }
}

}  // namespace

double optimal_scale(const std::vector<PointCloud>& pred,
                     const std::vector<PointCloud>& gt) {
  if (pred.size() != gt.size()) throw ContractError("frame count mismatch");
  double num = 0.0;
  double den = 0.0;
  size_t n = 0;
  for (size_t f = 0; f < pred.size(); ++f) {
    if (pred[f].size() != gt[f].size()) {
      throw ContractError("point count mismatch in frame " + std::to_string(f));
    }
    for (size_t i = 0; i < pred[f].size(); ++i) {
      num += pred[f].points()[i].dot(gt[f].points()[i]);
      den += pred[f].points()[i].dot(pred[f].points()[i]);
    }
    n += pred[f].size();
  }
  if (n == 0) throw ContractError("optimal_scale: empty correspondence set");
  return finish_scale(num, den);
}

double optimal_scale(const std::vector<OrganizedCloud>& pred,
                     const std::vector<OrganizedCloud>& gt) {
  if (pred.size() != gt.size()) throw ContractError("frame count mismatch");
  double num = 0.0;
  double den = 0.0;
  size_t n = 0;
  for (size_t f = 0; f < pred.size(); ++f) {
    check_same_shape(pred[f], gt[f]);
    for (size_t i = 0; i < pred[f].points.size(); ++i) {
      if (!pred[f].valid[i] || !gt[f].valid[i]) continue;
      num += pred[f].points[i].dot(gt[f].points[i]);
      den += pred[f].points[i].dot(pred[f].points[i]);
      ++n;
    }
  }
  if (n == 0) throw ContractError("optimal_scale: empty correspondence set");
  return finish_scale(num, den);
}

double point_loss(const PointCloud& pred, const PointCloud& gt, double s) {
  if (pred.frame() != gt.frame()) {
    throw ContractError(std::string("point_loss frame mismatch: ") +
                        to_string(pred.frame()) + " vs " + to_string(gt.frame()));
  }
  if (pred.size() != gt.size()) throw ContractError("point_loss count mismatch");
  double sum = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    sum += (s * pred.points()[i] - gt.points()[i]).lpNorm<1>();
  }
  return sum;
}

std::vector<std::uint8_t> depth_edge_mask(const DepthMap& depth, double tau_rel) {
  const int w = depth.width();
  const int h = depth.height();
  std::vector<std::uint8_t> mask(static_cast<size_t>(w) * h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!depth.valid(x, y)) continue;
      const double d = depth.distance(x, y);
      bool keep = true;
      const int nbrs[4][2] = {{(x + w - 1) % w, y}, {(x + 1) % w, y}, {x, y - 1}, {x, y + 1}};
      for (const auto& nb : nbrs) {
        if (nb[1] < 0 || nb[1] >= h) continue;
        if (!depth.valid(nb[0], nb[1])) {
          keep = false;
          break;
        }
        const double dn = depth.distance(nb[0], nb[1]);
        if (std::abs(dn - d) / std::min(d, dn) > tau_rel) {
          keep = false;
          break;
        }
      }
      mask[static_cast<size_t>(y) * w + x] = keep ? 1 : 0;
    }
  }
  return mask;
}

NormalMap estimate_normals(const OrganizedCloud& pts) {
  const int w = pts.width;
  const int h = pts.height;
  NormalMap out;
  out.width = w;
  out.height = h;
  out.normals.assign(static_cast<size_t>(w) * h, Vec3::Zero());
  out.valid.assign(out.normals.size(), 0);
  for (int y = 1; y + 1 < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int xl = (x + w - 1) % w;
      const int xr = (x + 1) % w;
      if (!pts.is_valid(x, y) || !pts.is_valid(xl, y) || !pts.is_valid(xr, y) ||
          !pts.is_valid(x, y - 1) || !pts.is_valid(x, y + 1)) {
        continue;
      }
      Vec3 n = (pts.at(xr, y) - pts.at(xl, y)).cross(pts.at(x, y + 1) - pts.at(x, y - 1));
      const double len = n.norm();
      if (!(len > 1e-15)) continue;
      n /= len;
      if (n.dot(pts.at(x, y)) > 0) n = -n;
      const size_t i = static_cast<size_t>(y) * w + x;
      out.normals[i] = n;
      out.valid[i] = 1;
    }
  }
  return out;
}

double smooth_l1(double x, double beta) {
  const double ax = std::abs(x);
  return ax < beta ? 0.5 * ax * ax / beta : ax - 0.5 * beta;
}

NormalLoss normal_loss(const OrganizedCloud& pred, const OrganizedCloud& gt,
                       const std::vector<std::uint8_t>& omega, double beta) {
  check_same_shape(pred, gt);
  if (omega.size() != gt.points.size()) throw ContractError("omega mask has wrong size");
  const NormalMap np = estimate_normals(pred);
  const NormalMap ng = estimate_normals(gt);
  NormalLoss out;
  double sum = 0.0;
  for (size_t i = 0; i < omega.size(); ++i) {
    if (!omega[i] || !np.valid[i] || !ng.valid[i]) continue;
    sum += smooth_l1(vec_angular_distance(np.normals[i], ng.normals[i]), beta);
    ++out.count;
  }
  if (out.count == 0) {
    out.empty = true;
    return out;
  }
  out.value = sum / static_cast<double>(out.count);
  return out;
}

double rotation_loss(const Rotation& pred_rel, const Rotation& gt_rel) {
  return rot_angular_distance(pred_rel, gt_rel);
}

double translation_loss(const Vec3& pred_t, const Vec3& gt_t, double s) {
  return (s * pred_t - gt_t).lpNorm<1>();
}

LossReport total_loss(const LossComponents& c, const LossWeights& w) {
  LossReport r;
  r.lp = c.lp;
  r.gp = c.gp;
  r.nor = c.nor;
  r.rot = c.rot;
  r.trans = c.trans;
  r.s_star = c.s_star;
  r.weights = w;
  r.total = c.lp + c.gp + c.nor + w.lambda_g * (w.lambda_t * c.trans + c.rot);
  return r;
}

LossReport compute_losses(const std::vector<GeometryFrame>& pred,
                          const std::vector<GeometryFrame>& gt,
                          const LossConfig& cfg) {
  if (pred.size() != gt.size() || pred.empty()) {
    throw ContractError("prediction and ground-truth frame sets must be equal and nonempty");
  }
  const size_t n = pred.size();

  std::vector<OrganizedCloud> pred_local, gt_local;
  for (size_t f = 0; f < n; ++f) {
    check_same_shape(pred[f].local, gt[f].local);
    check_same_shape(pred[f].global, gt[f].global);
    pred_local.push_back(pred[f].local);
    gt_local.push_back(gt[f].local);
  }

  LossComponents c;
  c.s_star = optimal_scale(pred_local, gt_local);
  const double s = c.s_star;

  size_t local_count = 0, global_count = 0, normal_count = 0;
  double nor_sum = 0.0;
  for (size_t f = 0; f < n; ++f) {
    const auto& pl = pred[f].local;
    const auto& gl = gt[f].local;
    for (size_t i = 0; i < pl.points.size(); ++i) {
      if (!pl.valid[i] || !gl.valid[i]) continue;
      c.lp += (s * pl.points[i] - gl.points[i]).lpNorm<1>();
      ++local_count;
    }
    const auto& pg = pred[f].global;
    const auto& gg = gt[f].global;
    for (size_t i = 0; i < pg.points.size(); ++i) {
      if (!pg.valid[i] || !gg.valid[i]) continue;
      c.gp += (s * pg.points[i] - gg.points[i]).lpNorm<1>();
      ++global_count;
    }

    // Edge exclusion follows the ground-truth depth.
    DepthMap gt_depth(gl.width, gl.height);
    for (int y = 0; y < gl.height; ++y) {
      for (int x = 0; x < gl.width; ++x) {
        if (!gl.is_valid(x, y)) continue;
        const double d = gl.at(x, y).norm();
        if (d > 0) gt_depth.set(x, y, d);
      }
    }
    const NormalLoss nl = normal_loss(pl, gl, depth_edge_mask(gt_depth, cfg.tau_rel), cfg.beta);
    nor_sum += nl.value * static_cast<double>(nl.count);
    normal_count += nl.count;
  }
  c.nor = normal_count > 0 ? nor_sum / static_cast<double>(normal_count) : 0.0;

  size_t pair_count = 0;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (cfg.pairs == PairSet::kAnchorSpokes && i != cfg.anchor) continue;
      const Pose pr = relative_pose(pred[i].pose, pred[j].pose);
      const Pose gr = relative_pose(gt[i].pose, gt[j].pose);
      c.rot += rotation_loss(pr.rot, gr.rot);
      c.trans += translation_loss(pr.trans, gr.trans, s);
      ++pair_count;
    }
  }

  LossReport r = total_loss(c, cfg.weights);
  r.local_points = local_count;
  r.global_points = global_count;
  r.normal_pixels = normal_count;
  r.pose_pairs = pair_count;
  r.normal_set_empty = normal_count == 0;
  return r;
}

}  // namespace panogeo
