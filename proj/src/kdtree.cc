#include "panogeo/kdtree.h"

#include <algorithm>
#include <limits>
#include <numeric>

#include "panogeo/error.h"

namespace panogeo {

namespace {
constexpr int kLeafSize = 8;
}

KdTree::KdTree(const std::vector<Vec3>& points) : points_(points) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), size_t{0});
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 1);
    build(0, static_cast<int>(points_.size()));
  }
}

int KdTree::build(int begin, int end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{});
  nodes_[id].begin = begin;
  nodes_[id].end = end;
  if (end - begin <= kLeafSize) return id;

  // Split on the axis of largest extent.
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (int i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] == lo[axis]) return id;  // all points coincide

  const int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](size_t a, size_t b) { return points_[a][axis] < points_[b][axis]; });
  const double split = points_[order_[mid]][axis];
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void KdTree::search(int node_id, const Vec3& q, Hit& best) const {
  const Node& node = nodes_[node_id];
  if (node.axis < 0) {
    for (int i = node.begin; i < node.end; ++i) {
      const double d = (points_[order_[i]] - q).squaredNorm();
      if (d < best.sq_dist || (d == best.sq_dist && order_[i] < best.index)) {
        best.sq_dist = d;
        best.index = order_[i];
      }
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const int near = diff < 0 ? node.left : node.right;
  const int far = diff < 0 ? node.right : node.left;
  search(near, q, best);
  if (diff * diff <= best.sq_dist) search(far, q, best);
}

KdTree::Hit KdTree::nearest(const Vec3& q) const {
  if (points_.empty()) throw ContractError("nearest-neighbor query on empty tree");
  Hit best{0, std::numeric_limits<double>::infinity()};
  best.index = std::numeric_limits<size_t>::max();
  search(0, q, best);
  return best;
}

}  // namespace panogeo
