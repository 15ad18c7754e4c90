#pragma once

#include <array>
#include <vector>

#include "core/common.hpp"

namespace gva {

// Finite Delaunay cell over the deduplicated point set, positively oriented
// (orient3d(v0,v1,v2,v3) > 0).
struct DelaunayCell {
  std::array<int, 4> v;
};

struct Delaunay3D {
  std::vector<Vec3> points;        // input minus exact duplicates, input order
  std::vector<int> source_index;   // deduped index -> first occurrence in input
  std::vector<DelaunayCell> cells;
};

// Incremental Bowyer-Watson with exact predicates. Cospherical point groups
// are resolved by a symbolic perturbation of the lifted coordinate, so the
// output is always a valid triangulation of the convex hull. Throws
// GeometryError when fewer than 4 distinct points remain after deduplication
// or when all points are coplanar.
Delaunay3D delaunay3d(const std::vector<Vec3>& input);

// Circumsphere of a tetrahedron. Returns false (center/radius untouched)
// when the four points are too flat for a stable double-precision solve;
// callers should treat that as an unbounded radius.
bool circumsphere(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, Vec3* center,
                  double* radius);

}  // namespace gva
