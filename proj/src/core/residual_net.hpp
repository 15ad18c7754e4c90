#pragma once

#include <Eigen/Dense>
#include <vector>

#include "core/common.hpp"
#include "core/rng.hpp"

namespace gva {

// Pose-conditioned corrective MLP: (pose_dim + 3) -> 64 -> 64 -> 3 with tanh
// hidden activations. The output layer is zero-initialized, so the net emits
// exactly (0,0,0) everywhere until training moves it.
struct ResidualNet {
  static constexpr int kHidden = 64;
  int pose_dim = 0;  // 3 * joint count

  Eigen::MatrixXd w1, w2, w3;
  Eigen::VectorXd b1, b2, b3;

  int input_dim() const { return pose_dim + 3; }
  size_t param_count() const {
    return static_cast<size_t>(w1.size() + b1.size() + w2.size() + b2.size() + w3.size() +
                               b3.size());
  }
};

ResidualNet make_residual_net(int joint_count, Rng& rng);

// Forward activations retained for the exact backward pass.
struct ResidualTape {
  Eigen::VectorXd pose_flat;
  std::vector<Vec3> mu;
  Eigen::MatrixXd h1, h2;      // 64 x N, post-tanh
  std::vector<Vec3> offsets;   // network output per point
};

ResidualTape residual_forward(const ResidualNet& net, const std::vector<Vec3>& mu,
                              const Eigen::VectorXd& pose_flat);

struct ResidualGrads {
  Eigen::MatrixXd d_w1, d_w2, d_w3;
  Eigen::VectorXd d_b1, d_b2, d_b3;
  std::vector<Vec3> d_mu;  // gradient w.r.t. each input position
};

ResidualGrads residual_backward(const ResidualNet& net, const ResidualTape& tape,
                                const std::vector<Vec3>& d_offsets);

}  // namespace gva
