#include "core/predicates.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <boost/multiprecision/cpp_int.hpp>

namespace gva {

namespace {

using Rational = boost::multiprecision::cpp_rational;

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

template <typename T>
int sign_of_exact(const T& v) {
  if (v > 0) return 1;
  if (v < 0) return -1;
  return 0;
}

// Relative error bounds for the filtered evaluations. Both determinants are
// short polynomials in translated coordinates; the constants below dominate
// the worst-case rounding (a few dozen ulps) with two orders of magnitude to
// spare. A filter that is too loose only costs a rational re-evaluation.
constexpr double kOrientFilter = 1e-12;
constexpr double kInsphereFilter = 1e-11;

int orient3d_exact(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  Rational m[3][3];
  for (int i = 0; i < 3; ++i) {
    const Vec3& p = i == 0 ? a : (i == 1 ? b : c);
    for (int j = 0; j < 3; ++j) m[i][j] = Rational(p(j)) - Rational(d(j));
  }
  const Rational det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                       m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                       m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  return sign_of_exact(det);
}

Rational det3_exact(const Rational m[4][4], int skip_row) {
  Rational r[3][3];
  int out = 0;
  for (int i = 0; i < 4; ++i) {
    if (i == skip_row) continue;
    for (int j = 0; j < 3; ++j) r[out][j] = m[i][j];
    ++out;
  }
  return r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1]) -
         r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0]) +
         r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0]);
}

int insphere_exact(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, const Vec3& e) {
  Rational m[4][4];
  const Vec3* rows[4] = {&a, &b, &c, &d};
  for (int i = 0; i < 4; ++i) {
    Rational norm2 = 0;
    for (int j = 0; j < 3; ++j) {
      m[i][j] = Rational((*rows[i])(j)) - Rational(e(j));
      norm2 += m[i][j] * m[i][j];
    }
    m[i][3] = norm2;
  }
  // Expand along the last column.
  Rational det = 0;
  for (int i = 0; i < 4; ++i) {
    const Rational cof = det3_exact(m, i);
    det += ((i % 2 == 0) ? Rational(-1) : Rational(1)) * m[i][3] * cof;
  }
  return sign_of_exact(det);
}

}  // namespace

int orient3d(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  const double ax = a.x() - d.x(), ay = a.y() - d.y(), az = a.z() - d.z();
  const double bx = b.x() - d.x(), by = b.y() - d.y(), bz = b.z() - d.z();
  const double cx = c.x() - d.x(), cy = c.y() - d.y(), cz = c.z() - d.z();
  const double det = ax * (by * cz - bz * cy) - ay * (bx * cz - bz * cx) + az * (bx * cy - by * cx);
  const double perm = std::abs(ax) * (std::abs(by) * std::abs(cz) + std::abs(bz) * std::abs(cy)) +
                      std::abs(ay) * (std::abs(bx) * std::abs(cz) + std::abs(bz) * std::abs(cx)) +
                      std::abs(az) * (std::abs(bx) * std::abs(cy) + std::abs(by) * std::abs(cx));
  if (std::abs(det) > kOrientFilter * perm) return sign_of(det);
  if (perm == 0.0) return 0;  // all difference entries are exactly zero
  return orient3d_exact(a, b, c, d);
}

int insphere(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, const Vec3& e) {
  double m[4][4];
  double p[4][4];  // absolute entries for the permanent bound
  const Vec3* rows[4] = {&a, &b, &c, &d};
  for (int i = 0; i < 4; ++i) {
    double norm2 = 0.0;
    for (int j = 0; j < 3; ++j) {
      m[i][j] = (*rows[i])(j)-e(j);
      p[i][j] = std::abs(m[i][j]);
      norm2 += m[i][j] * m[i][j];
    }
    m[i][3] = norm2;
    p[i][3] = norm2;
  }
  auto det3 = [](const double r[4][4], int skip, bool permanent) {
    double v[3][3];
    int out = 0;
    for (int i = 0; i < 4; ++i) {
      if (i == skip) continue;
      for (int j = 0; j < 3; ++j) v[out][j] = r[i][j];
      ++out;
    }
    if (!permanent)
      return v[0][0] * (v[1][1] * v[2][2] - v[1][2] * v[2][1]) -
             v[0][1] * (v[1][0] * v[2][2] - v[1][2] * v[2][0]) +
             v[0][2] * (v[1][0] * v[2][1] - v[1][1] * v[2][0]);
    return v[0][0] * (v[1][1] * v[2][2] + v[1][2] * v[2][1]) +
           v[0][1] * (v[1][0] * v[2][2] + v[1][2] * v[2][0]) +
           v[0][2] * (v[1][0] * v[2][1] + v[1][1] * v[2][0]);
  };
  double det = 0.0, perm = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double s = (i % 2 == 0) ? -1.0 : 1.0;
    det += s * m[i][3] * det3(m, i, false);
    perm += p[i][3] * det3(p, i, true);
  }
  if (std::abs(det) > kInsphereFilter * perm) return sign_of(det);
  if (perm == 0.0) return 0;
  return insphere_exact(a, b, c, d, e);
}

bool collinear(const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 u = b - a, v = c - a;
  // Each cross component is a 2x2 determinant; filter it, fall back to
  // rationals only when inconclusive.
  for (int k = 0; k < 3; ++k) {
    const int i = (k + 1) % 3, j = (k + 2) % 3;
    const double det = u(i) * v(j) - u(j) * v(i);
    const double perm = std::abs(u(i)) * std::abs(v(j)) + std::abs(u(j)) * std::abs(v(i));
    if (std::abs(det) > kOrientFilter * perm) return false;
    if (perm == 0.0) continue;
    const Rational exact = (Rational(b(i)) - Rational(a(i))) * (Rational(c(j)) - Rational(a(j))) -
                           (Rational(b(j)) - Rational(a(j))) * (Rational(c(i)) - Rational(a(i)));
    if (exact != 0) return false;
  }
  return true;
}

int insphere_perturbed(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, const Vec3& e,
                       int ia, int ib, int ic, int id, int ie) {
  const int base = insphere(a, b, c, d, e);
  if (base != 0) return base;

  // Cospherical: perturb the lifted coordinates, w_i -> w_i - eps_i, with a
  // smaller index getting a larger eps. The determinant is affine in each w,
  // so the first nonzero coefficient (by descending eps) decides. The
  // coefficients are cofactors of the lifted column — orientation tests on
  // the remaining four points.
  struct Term {
    int index;
    int which;  // 0..4 = a..e
  };
  std::array<Term, 5> terms = {{{ia, 0}, {ib, 1}, {ic, 2}, {id, 3}, {ie, 4}}};
  std::sort(terms.begin(), terms.end(), [](const Term& x, const Term& y) { return x.index < y.index; });
  for (const Term& t : terms) {
    int coef = 0;
    switch (t.which) {
      case 0: coef = orient3d(b, c, d, e); break;
      case 1: coef = -orient3d(a, c, d, e); break;
      case 2: coef = orient3d(a, b, d, e); break;
      case 3: coef = -orient3d(a, b, c, e); break;
      case 4: coef = orient3d(a, b, c, d); break;
    }
    if (coef != 0) return coef;
  }
  throw GeometryError("insphere_perturbed: five coplanar points");
}

}  // namespace gva
