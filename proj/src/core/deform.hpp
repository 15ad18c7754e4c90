#pragma once

#include <vector>

#include "core/common.hpp"
#include "core/gaussian_cloud.hpp"
#include "core/residual_net.hpp"
#include "core/skeleton.hpp"

namespace gva {

// Nearest rotation to m (polar factor), det +1.
Mat3 polar_rotation(const Mat3& m);

// Everything the backward pass needs from a deformation forward pass.
struct DeformResult {
  GaussianCloud posed;              // mu/q replaced; s, eta, f copied through
  std::vector<Vec3> offsets;        // residual-net outputs, canonical frame
  std::vector<Mat3> a_rot;          // blended linear block per point
  std::vector<Vec4> q_omega;        // polar factor of a_rot as a quaternion
  std::vector<Vec4> q_hat;          // normalized canonical quaternion
  std::vector<double> q_norm;       // canonical quaternion norm
  std::vector<uint8_t> rigid_identity;  // blended transform was bitwise identity
  ResidualTape tape;
};

// Poses a canonical cloud: mu_posed = A_rot * (mu + residual(pose, mu)) + A_t,
// rotation = polar(A_rot) * R(q). `blended` must align with cloud order.
// The canonical cloud is left untouched.
DeformResult deform_gaussians(const GaussianCloud& cloud, const std::vector<Mat4>& blended,
                              const ResidualNet& net, const Pose& pose);

struct DeformGrads {
  std::vector<Vec3> d_mu;   // w.r.t. canonical positions
  std::vector<Vec4> d_q;    // w.r.t. canonical (raw) quaternions
  ResidualGrads residual;   // w.r.t. net weights
};

// Pulls posed-space gradients back to canonical parameters and net weights.
// d_offset_extra (optional, may be empty) is added to the gradient on the
// residual output before backprop — the hook for offset regularizers.
DeformGrads deform_backward(const DeformResult& fwd, const ResidualNet& net,
                            const std::vector<Vec3>& d_mu_posed, const std::vector<Vec4>& d_q_posed,
                            const std::vector<Vec3>& d_offset_extra);

}  // namespace gva
