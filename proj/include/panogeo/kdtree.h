#pragma once

#include <cstddef>
#include <vector>

#include "panogeo/sphere_geom.h"

namespace panogeo {

// Static 3-d tree for exact nearest-neighbor queries. Immutable after
// construction, so concurrent queries are safe.
class KdTree {
 public:
  explicit KdTree(const std::vector<Vec3>& points);

  struct Hit {
    size_t index = 0;  // into the construction array
    double sq_dist = 0.0;
  };

  // Requires a nonempty tree.
  Hit nearest(const Vec3& q) const;
  size_t size() const { return points_.size(); }

 private:
  struct Node {
    int axis = -1;  // -1 for leaves
    double split = 0.0;
    int left = -1;
    int right = -1;
    int begin = 0;
    int end = 0;
  };

  int build(int begin, int end);
  void search(int node, const Vec3& q, Hit& best) const;

  std::vector<Vec3> points_;
  std::vector<size_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace panogeo
