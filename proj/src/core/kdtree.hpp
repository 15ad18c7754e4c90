#pragma once

#include <vector>

#include "core/common.hpp"

namespace gva {

struct Neighbor {
  int index = -1;
  double dist2 = 0.0;
};

// Exact k-nearest-neighbor search over 3D points. Median-split kd-tree with
// full subtree pruning; results are sorted by (distance, index) so ties are
// broken deterministically toward the lower index.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::vector<Vec3> points);

  size_t size() const { return points_.size(); }
  const std::vector<Vec3>& points() const { return points_; }

  // k nearest to `query`. k >= size() returns all points. Throws on k == 0
  // or an empty tree.
  std::vector<Neighbor> knn(const Vec3& query, int k) const;

  // Convenience: k nearest excluding one index (self-queries).
  std::vector<Neighbor> knn_excluding(const Vec3& query, int k, int exclude) const;

 private:
  struct Node {
    int axis = -1;       // -1 marks a leaf
    double split = 0.0;  // split coordinate
    int left = -1, right = -1;
    int begin = 0, end = 0;  // index range into order_ (leaves)
  };

  int build(int begin, int end, int depth);
  void search(int node, const Vec3& query, int k, int exclude,
              std::vector<Neighbor>& heap) const;

  std::vector<Vec3> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace gva
