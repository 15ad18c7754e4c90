#pragma once

#include <cmath>

#include "core/common.hpp"

namespace gva {

// Quaternions are (w, x, y, z) throughout.

inline Vec4 quat_normalize(const Vec4& q) {
  double n = q.norm();
  if (n == 0.0) throw InvalidArgumentError("quaternion has zero norm");
  return q / n;
}

inline Mat3 quat_to_mat(const Vec4& q) {
  double w = q[0], x = q[1], y = q[2], z = q[3];
  Mat3 r;
  r << 1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y),
       2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x),
       2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y);
  return r;
}

// Shepperd's method, stable for all rotations. Returned w >= 0.
inline Vec4 mat_to_quat(const Mat3& m) {
  double t;
  Vec4 q;
  if (m(2, 2) < 0.0) {
    if (m(0, 0) > m(1, 1)) {
      t = 1.0 + m(0, 0) - m(1, 1) - m(2, 2);
      q = Vec4(m(2, 1) - m(1, 2), t, m(0, 1) + m(1, 0), m(2, 0) + m(0, 2));
    } else {
      t = 1.0 - m(0, 0) + m(1, 1) - m(2, 2);
      q = Vec4(m(0, 2) - m(2, 0), m(0, 1) + m(1, 0), t, m(1, 2) + m(2, 1));
    }
  } else {
    if (m(0, 0) < -m(1, 1)) {
      t = 1.0 - m(0, 0) - m(1, 1) + m(2, 2);
      q = Vec4(m(1, 0) - m(0, 1), m(2, 0) + m(0, 2), m(1, 2) + m(2, 1), t);
    } else {
      t = 1.0 + m(0, 0) + m(1, 1) + m(2, 2);
      q = Vec4(t, m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
    }
  }
  q *= 0.5 / std::sqrt(t);
  if (q[0] < 0.0) q = -q;
  return q;
}

inline Vec4 quat_mul(const Vec4& a, const Vec4& b) {
  return Vec4(a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
              a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
              a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
              a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0]);
}

// Matrix of left-multiplication: quat_mul(p, q) == quat_left_mat(p) * q.
inline Mat4 quat_left_mat(const Vec4& p) {
  Mat4 m;
  m << p[0], -p[1], -p[2], -p[3],
       p[1],  p[0], -p[3],  p[2],
       p[2],  p[3],  p[0], -p[1],
       p[3], -p[2],  p[1],  p[0];
  return m;
}

// d R(q_hat) / d q_hat_k for a *unit* quaternion, k in {w,x,y,z}.
inline void quat_to_mat_jacobian(const Vec4& q, Mat3 out[4]) {
  double w = q[0], x = q[1], y = q[2], z = q[3];
  out[0] << 0.0, -z, y, z, 0.0, -x, -y, x, 0.0;
  out[1] << 0.0, y, z, y, -2.0 * x, -w, z, w, -2.0 * x;
  out[2] << -2.0 * y, x, w, x, 0.0, z, -w, z, -2.0 * y;
  out[3] << -2.0 * z, -w, x, w, -2.0 * z, y, x, y, 0.0;
  for (int k = 0; k < 4; ++k) out[k] *= 2.0;
}

// Full backward through R(q / |q|): accumulates dL/dq given dL/dR.
inline Vec4 quat_rotation_backward(const Vec4& q, const Mat3& d_R) {
  double n = q.norm();
  Vec4 qh = q / n;
  Mat3 jac[4];
  quat_to_mat_jacobian(qh, jac);
  Vec4 d_qh;
  for (int k = 0; k < 4; ++k) d_qh[k] = (jac[k].array() * d_R.array()).sum();
  return (d_qh - qh * qh.dot(d_qh)) / n;
}

// Rodrigues. Exact identity for a zero vector so that zero poses compose to
// exact identity transforms downstream.
inline Mat3 axis_angle_to_mat(const Vec3& aa) {
  double angle = aa.norm();
  if (angle < 1e-12) return Mat3::Identity();
  Vec3 axis = aa / angle;
  double c = std::cos(angle), s = std::sin(angle);
  Mat3 k;
  k << 0.0, -axis.z(), axis.y(), axis.z(), 0.0, -axis.x(), -axis.y(), axis.x(), 0.0;
  return Mat3::Identity() * c + k * s + axis * axis.transpose() * (1.0 - c);
}

}  // namespace gva
