#pragma once

#include <array>
#include <vector>

#include "core/common.hpp"
#include "core/delaunay.hpp"
#include "core/mesh.hpp"

namespace gva {

struct AlphaShapeResult {
  TriangleMesh surface;            // faces oriented away from the kept solid
  std::vector<int> vertex_source;  // surface vertex -> index into the point set
  double alpha = 0.0;
  // Edges bordering a number of faces other than 2 (vertex index pairs in
  // surface numbering). Reported, never repaired.
  std::vector<std::array<int, 2>> nonmanifold_edges;
};

// Keeps tetrahedra with circumradius <= alpha (degenerate/flat cells count as
// unbounded and are dropped); the surface is every face incident to exactly
// one kept cell. alpha -> infinity yields the convex hull boundary. Throws
// GeometryError naming alpha when nothing survives.
AlphaShapeResult alpha_shape_boundary(const Delaunay3D& dt, double alpha);

// Median over all points of the distance to their nearest neighbor; the
// default alpha is 3x this.
double median_nn_spacing(const std::vector<Vec3>& points);

}  // namespace gva
