#include "core/alpha_shape.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "core/kdtree.hpp"

namespace gva {

namespace {

// Facet f of a positively oriented cell, ordered so the facet normal points
// away from the remaining vertex.
constexpr int kFacet[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};

}  // namespace

AlphaShapeResult alpha_shape_boundary(const Delaunay3D& dt, double alpha) {
  if (!(alpha > 0.0)) {
    throw InvalidArgumentError("alpha-shape: alpha must be positive");
  }

  std::vector<char> kept(dt.cells.size(), 0);
  size_t kept_count = 0;
  for (size_t c = 0; c < dt.cells.size(); ++c) {
    const auto& v = dt.cells[c].v;
    Vec3 center;
    double radius = 0.0;
    // A failed solve means a nearly flat cell whose circumradius blows up;
    // those never pass the alpha test.
    if (!circumsphere(dt.points[v[0]], dt.points[v[1]], dt.points[v[2]], dt.points[v[3]], &center,
                      &radius)) {
      continue;
    }
    if (radius <= alpha) {
      kept[c] = 1;
      ++kept_count;
    }
  }
  if (kept_count == 0) {
    std::ostringstream msg;
    msg << "alpha-shape: no tetrahedron has circumradius <= " << alpha
        << "; increase alpha to keep any volume";
    throw GeometryError(msg.str());
  }

  // Count kept cells per undirected face; remember one outward-oriented copy.
  std::map<std::array<int, 3>, std::pair<int, std::array<int, 3>>> faces;
  for (size_t c = 0; c < dt.cells.size(); ++c) {
    if (!kept[c]) continue;
    const auto& v = dt.cells[c].v;
    for (int f = 0; f < 4; ++f) {
      std::array<int, 3> oriented = {v[kFacet[f][0]], v[kFacet[f][1]], v[kFacet[f][2]]};
      std::array<int, 3> key = oriented;
      std::sort(key.begin(), key.end());
      auto [it, fresh] = faces.try_emplace(key, 0, oriented);
      it->second.first += 1;
      if (fresh) it->second.second = oriented;
    }
  }

  AlphaShapeResult result;
  result.alpha = alpha;
  std::vector<int> compact(dt.points.size(), -1);
  auto remap = [&](int p) {
    if (compact[p] < 0) {
      compact[p] = static_cast<int>(result.surface.vertices.size());
      result.surface.vertices.push_back(dt.points[p]);
      result.vertex_source.push_back(p);
    }
    return compact[p];
  };
  for (const auto& [key, entry] : faces) {
    if (entry.first != 1) continue;
    const auto& o = entry.second;
    result.surface.faces.push_back({remap(o[0]), remap(o[1]), remap(o[2])});
  }
  if (result.surface.faces.empty()) {
    std::ostringstream msg;
    msg << "alpha-shape: kept cells have no boundary faces at alpha=" << alpha
        << "; increase alpha";
    throw GeometryError(msg.str());
  }

  std::map<std::array<int, 2>, int> edge_count;
  for (const auto& f : result.surface.faces) {
    for (int e = 0; e < 3; ++e) {
      int a = f[e], b = f[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      edge_count[{a, b}] += 1;
    }
  }
  for (const auto& [edge, count] : edge_count) {
    if (count != 2) result.nonmanifold_edges.push_back(edge);
  }

  result.surface.validate();
  return result;
}

double median_nn_spacing(const std::vector<Vec3>& points) {
  if (points.size() < 2) {
    throw InvalidArgumentError("median_nn_spacing: need at least two points");
  }
  KdTree tree(points);
  std::vector<double> dist;
  dist.reserve(points.size());
  for (size_t i = 0; i < points.size(); ++i) {
    auto nn = tree.knn_excluding(points[i], 1, static_cast<int>(i));
    dist.push_back(std::sqrt(nn[0].dist2));
  }
  size_t mid = dist.size() / 2;
  std::nth_element(dist.begin(), dist.begin() + mid, dist.end());
  return dist[mid];
}

}  // namespace gva
