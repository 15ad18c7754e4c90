#include "core/kdtree.hpp"

#include <algorithm>

namespace gva {

namespace {
constexpr int kLeafSize = 8;

// Total order on candidates: nearer first, lower index breaks ties.
inline bool better(const Neighbor& a, const Neighbor& b) {
  if (a.dist2 != b.dist2) return a.dist2 < b.dist2;
  return a.index < b.index;
}
}  // namespace

KdTree::KdTree(std::vector<Vec3> points) : points_(std::move(points)) {
  order_.resize(points_.size());
  for (size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<int>(i);
  if (!points_.empty()) root_ = build(0, static_cast<int>(points_.size()), 0);
}

int KdTree::build(int begin, int end, int depth) {
  Node node;
  if (end - begin <= kLeafSize) {
    node.begin = begin;
    node.end = end;
    nodes_.push_back(node);
    return static_cast<int>(nodes_.size()) - 1;
  }
  // Split on the widest axis; median by nth_element with index tie-break so
  // the tree itself is deterministic.
  Vec3 lo = points_[order_[begin]], hi = lo;
  for (int i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  Vec3 extent = hi - lo;
  int axis = 0;
  if (extent[1] > extent[axis]) axis = 1;
  if (extent[2] > extent[axis]) axis = 2;
  int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) {
                     double pa = points_[a][axis], pb = points_[b][axis];
                     if (pa != pb) return pa < pb;
                     return a < b;
                   });
  node.axis = axis;
  node.split = points_[order_[mid]][axis];
  int self = static_cast<int>(nodes_.size());
  nodes_.push_back(node);
  int left = build(begin, mid, depth + 1);
  int right = build(mid, end, depth + 1);
  nodes_[self].left = left;
  nodes_[self].right = right;
  return self;
}

void KdTree::search(int node_id, const Vec3& query, int k, int exclude,
                    std::vector<Neighbor>& heap) const {
  const Node& node = nodes_[node_id];
  auto worse = [](const Neighbor& a, const Neighbor& b) { return better(a, b); };
  if (node.axis < 0) {
    for (int i = node.begin; i < node.end; ++i) {
      int idx = order_[i];
      if (idx == exclude) continue;
      Neighbor cand{idx, (points_[idx] - query).squaredNorm()};
      if (static_cast<int>(heap.size()) < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end(), worse);
      } else if (better(cand, heap.front())) {
        std::pop_heap(heap.begin(), heap.end(), worse);
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end(), worse);
      }
    }
    return;
  }
  double diff = query[node.axis] - node.split;
  int near = diff <= 0.0 ? node.left : node.right;
  int far = diff <= 0.0 ? node.right : node.left;
  search(near, query, k, exclude, heap);
  if (static_cast<int>(heap.size()) < k || diff * diff <= heap.front().dist2) {
    search(far, query, k, exclude, heap);
  }
}

std::vector<Neighbor> KdTree::knn(const Vec3& query, int k) const {
  return knn_excluding(query, k, -1);
}

std::vector<Neighbor> KdTree::knn_excluding(const Vec3& query, int k, int exclude) const {
  if (points_.empty()) throw InvalidArgumentError("knn: empty point set");
  if (k <= 0) throw InvalidArgumentError("knn: k must be positive");
  std::vector<Neighbor> heap;
  heap.reserve(static_cast<size_t>(k));
  search(root_, query, k, exclude, heap);
  std::sort(heap.begin(), heap.end(), better);
  return heap;
}

}  // namespace gva
