#include "core/sh.hpp"

namespace gva {

namespace {
constexpr double kC0 = 0.28209479177387814;
constexpr double kC1 = 0.4886025119029199;
constexpr double kC2[5] = {1.0925484305920792, -1.0925484305920792, 0.31539156525252005,
                           -1.0925484305920792, 0.5462742152960396};
constexpr double kC3[7] = {-0.5900435899266435, 2.890611442640554,  -0.4570457994644658,
                           0.3731763325901154,  -0.4570457994644658, 1.445305721320277,
                           -0.5900435899266435};
}  // namespace

void sh_basis(const Vec3& dir, int degree, double* out) {
  if (degree < 0 || degree > kMaxShDegree) throw InvalidArgumentError("sh_basis: degree out of range");
  double x = dir.x(), y = dir.y(), z = dir.z();
  out[0] = kC0;
  if (degree < 1) return;
  out[1] = -kC1 * y;
  out[2] = kC1 * z;
  out[3] = -kC1 * x;
  if (degree < 2) return;
  double xx = x * x, yy = y * y, zz = z * z;
  out[4] = kC2[0] * x * y;
  out[5] = kC2[1] * y * z;
  out[6] = kC2[2] * (2.0 * zz - xx - yy);
  out[7] = kC2[3] * x * z;
  out[8] = kC2[4] * (xx - yy);
  if (degree < 3) return;
  out[9] = kC3[0] * y * (3.0 * xx - yy);
  out[10] = kC3[1] * x * y * z;
  out[11] = kC3[2] * y * (4.0 * zz - xx - yy);
  out[12] = kC3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy);
  out[13] = kC3[4] * x * (4.0 * zz - xx - yy);
  out[14] = kC3[5] * z * (xx - yy);
  out[15] = kC3[6] * x * (xx - yy);
}

void sh_basis_grad(const Vec3& dir, int degree, Vec3* out) {
  if (degree < 0 || degree > kMaxShDegree) throw InvalidArgumentError("sh_basis_grad: degree out of range");
  double x = dir.x(), y = dir.y(), z = dir.z();
  out[0] = Vec3::Zero();
  if (degree < 1) return;
  out[1] = Vec3(0.0, -kC1, 0.0);
  out[2] = Vec3(0.0, 0.0, kC1);
  out[3] = Vec3(-kC1, 0.0, 0.0);
  if (degree < 2) return;
  double xx = x * x, yy = y * y, zz = z * z;
  out[4] = kC2[0] * Vec3(y, x, 0.0);
  out[5] = kC2[1] * Vec3(0.0, z, y);
  out[6] = kC2[2] * Vec3(-2.0 * x, -2.0 * y, 4.0 * z);
  out[7] = kC2[3] * Vec3(z, 0.0, x);
  out[8] = kC2[4] * Vec3(2.0 * x, -2.0 * y, 0.0);
  if (degree < 3) return;
  out[9] = kC3[0] * Vec3(6.0 * x * y, 3.0 * xx - 3.0 * yy, 0.0);
  out[10] = kC3[1] * Vec3(y * z, x * z, x * y);
  out[11] = kC3[2] * Vec3(-2.0 * x * y, 4.0 * zz - xx - 3.0 * yy, 8.0 * y * z);
  out[12] = kC3[3] * Vec3(-6.0 * x * z, -6.0 * y * z, 6.0 * zz - 3.0 * xx - 3.0 * yy);
  out[13] = kC3[4] * Vec3(4.0 * zz - 3.0 * xx - yy, -2.0 * x * y, 8.0 * x * z);
  out[14] = kC3[5] * Vec3(2.0 * x * z, -2.0 * y * z, xx - yy);
  out[15] = kC3[6] * Vec3(3.0 * xx - yy, -2.0 * x * y, 0.0);
}

Vec3 sh_color(const double* f, int degree, const Vec3& dir) {
  double basis[kMaxShCoeffs];
  sh_basis(dir, degree, basis);
  int n = sh_coeff_count(degree);
  Vec3 rgb(0.5, 0.5, 0.5);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) rgb[c] += f[i * 3 + c] * basis[i];
  }
  for (int c = 0; c < 3; ++c) rgb[c] = std::clamp(rgb[c], 0.0, 1.0);
  return rgb;
}

void sh_color_backward(const double* f, int degree, const Vec3& dir, const Vec3& d_rgb,
                       double* d_f, Vec3& d_dir) {
  double basis[kMaxShCoeffs];
  Vec3 grad[kMaxShCoeffs];
  sh_basis(dir, degree, basis);
  sh_basis_grad(dir, degree, grad);
  int n = sh_coeff_count(degree);
  // Recompute the pre-clamp value per channel; the clamp gates the gradient.
  Vec3 raw(0.5, 0.5, 0.5);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) raw[c] += f[i * 3 + c] * basis[i];
  }
  for (int c = 0; c < 3; ++c) {
    if (raw[c] < 0.0 || raw[c] > 1.0) continue;
    double g = d_rgb[c];
    for (int i = 0; i < n; ++i) {
      d_f[i * 3 + c] += basis[i] * g;
      d_dir += f[i * 3 + c] * g * grad[i];
    }
  }
}

}  // namespace gva
