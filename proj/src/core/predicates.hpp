#pragma once

#include "core/common.hpp"

namespace gva {

// Geometric predicates with exact signs. Fast path is a statically filtered
// double evaluation; when the filter cannot certify the sign, the determinant
// is recomputed in rational arithmetic.

// Sign (+1/0/-1) of det [a-d; b-d; c-d]: positive volume of tetra (a,b,c,d)
// in this row convention.
int orient3d(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);

// Sign of the translated 4x4 insphere determinant with rows
// [p - e, |p - e|^2] for p in (a,b,c,d). For a positively oriented (a,b,c,d)
// the sign is positive exactly when e lies strictly inside the circumsphere.
int insphere(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, const Vec3& e);

// Exact test for three collinear (or coincident) points.
bool collinear(const Vec3& a, const Vec3& b, const Vec3& c);

// insphere with symbolic perturbation of the lifted coordinate: point i is
// lifted to |p_i|^2 - eps_i where a smaller global index gets a larger
// epsilon. Never returns 0 unless all five points are coplanar (geometry
// error). Indices must be distinct; synthetic helper points should use
// std::numeric_limits<int>::max().
int insphere_perturbed(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, const Vec3& e,
                       int ia, int ib, int ic, int id, int ie);

}  // namespace gva
