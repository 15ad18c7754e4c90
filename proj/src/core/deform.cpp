#include "core/deform.hpp"

#include <cstring>

#include <Eigen/SVD>

#include "core/quat.hpp"

namespace gva {

Mat3 polar_rotation(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  const Mat3 v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) = -u.col(2);
  return u * v.transpose();
}

DeformResult deform_gaussians(const GaussianCloud& cloud, const std::vector<Mat4>& blended,
                              const ResidualNet& net, const Pose& pose) {
  const size_t n = cloud.points.size();
  if (blended.size() != n)
    throw InvalidArgumentError("deform_gaussians: transform count does not match cloud size");

  DeformResult out;
  out.posed.sh_degree = cloud.sh_degree;
  out.posed.points = cloud.points;
  out.a_rot.resize(n);
  out.q_omega.resize(n);
  out.q_hat.resize(n);
  out.q_norm.resize(n);
  out.rigid_identity.assign(n, 0);

  std::vector<Vec3> mus(n);
  for (size_t i = 0; i < n; ++i) mus[i] = cloud.points[i].mu;
  out.tape = residual_forward(net, mus, flatten_pose(pose));
  out.offsets = out.tape.offsets;

  static const Mat4 kIdentity4 = Mat4::Identity();
  for (size_t i = 0; i < n; ++i) {
    const Mat4& a = blended[i];
    GaussianPoint& p = out.posed.points[i];
    const Vec3 mu_res = cloud.points[i].mu + out.offsets[i];
    if (std::memcmp(a.data(), kIdentity4.data(), sizeof(double) * 16) == 0) {
      // Rigid shortcut: leave mu and q bitwise untouched (modulo the
      // residual, which is exactly zero for a fresh net).
      out.rigid_identity[i] = 1;
      out.a_rot[i] = Mat3::Identity();
      out.q_omega[i] = Vec4(1, 0, 0, 0);
      p.mu = mu_res;
      continue;
    }
    const Mat3 a_rot = a.topLeftCorner<3, 3>();
    const Mat3 omega = polar_rotation(a_rot);
    const double qn = cloud.points[i].q.norm();
    if (!(qn > 0.0)) throw InvalidArgumentError("deform_gaussians: zero quaternion");
    const Vec4 q_hat = cloud.points[i].q / qn;
    out.a_rot[i] = a_rot;
    out.q_omega[i] = mat_to_quat(omega);
    out.q_hat[i] = q_hat;
    out.q_norm[i] = qn;
    p.mu = a_rot * mu_res + a.topRightCorner<3, 1>();
    p.q = quat_mul(out.q_omega[i], q_hat);
  }
  return out;
}

DeformGrads deform_backward(const DeformResult& fwd, const ResidualNet& net,
                            const std::vector<Vec3>& d_mu_posed, const std::vector<Vec4>& d_q_posed,
                            const std::vector<Vec3>& d_offset_extra) {
  const size_t n = fwd.posed.points.size();
  if (d_mu_posed.size() != n || d_q_posed.size() != n)
    throw InvalidArgumentError("deform_backward: gradient count does not match cloud size");
  if (!d_offset_extra.empty() && d_offset_extra.size() != n)
    throw InvalidArgumentError("deform_backward: offset gradient count does not match cloud size");

  DeformGrads grads;
  grads.d_mu.assign(n, Vec3::Zero());
  grads.d_q.assign(n, Vec4::Zero());

  std::vector<Vec3> d_offsets(n);
  for (size_t i = 0; i < n; ++i) {
    // mu_posed = A_rot * (mu + offset) + A_t
    const Vec3 d_mu_res = fwd.rigid_identity[i] ? d_mu_posed[i]
                                                : Vec3(fwd.a_rot[i].transpose() * d_mu_posed[i]);
    d_offsets[i] = d_mu_res;
    if (!d_offset_extra.empty()) d_offsets[i] += d_offset_extra[i];
    grads.d_mu[i] = d_mu_res;

    // q_posed = q_omega ⊗ (q / |q|); q_omega is constant w.r.t. parameters.
    if (fwd.rigid_identity[i]) {
      grads.d_q[i] = d_q_posed[i];
    } else {
      const Vec4 d_q_hat = quat_left_mat(fwd.q_omega[i]).transpose() * d_q_posed[i];
      const Vec4& qh = fwd.q_hat[i];
      grads.d_q[i] = (d_q_hat - qh * qh.dot(d_q_hat)) / fwd.q_norm[i];
    }
  }

  grads.residual = residual_backward(net, fwd.tape, d_offsets);
  for (size_t i = 0; i < n; ++i) grads.d_mu[i] += grads.residual.d_mu[i];
  return grads;
}

}  // namespace gva
