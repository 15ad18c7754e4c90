#include "core/residual_net.hpp"

#include <cmath>

namespace gva {

ResidualNet make_residual_net(int joint_count, Rng& rng) {
  if (joint_count <= 0) throw InvalidArgumentError("residual net needs at least one joint");
  ResidualNet net;
  net.pose_dim = joint_count * 3;
  int d = net.input_dim();
  int h = ResidualNet::kHidden;
  net.w1.resize(h, d);
  net.w2.resize(h, h);
  net.w3.setZero(3, h);
  net.b1.setZero(h);
  net.b2.setZero(h);
  net.b3.setZero(3);
  double s1 = 1.0 / std::sqrt(static_cast<double>(d));
  double s2 = 1.0 / std::sqrt(static_cast<double>(h));
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < d; ++c) net.w1(r, c) = rng.normal() * s1;
  }
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < h; ++c) net.w2(r, c) = rng.normal() * s2;
  }
  return net;
}

ResidualTape residual_forward(const ResidualNet& net, const std::vector<Vec3>& mu,
                              const Eigen::VectorXd& pose_flat) {
  if (pose_flat.size() != net.pose_dim) {
    throw InvalidArgumentError("residual_forward: pose vector has wrong dimension");
  }
  int n = static_cast<int>(mu.size());
  ResidualTape tape;
  tape.pose_flat = pose_flat;
  tape.mu = mu;
  Eigen::MatrixXd x(net.input_dim(), n);
  for (int i = 0; i < n; ++i) {
    x.col(i).head(net.pose_dim) = pose_flat;
    x.col(i).tail(3) = mu[static_cast<size_t>(i)];
  }
  tape.h1 = ((net.w1 * x).colwise() + net.b1).array().tanh();
  tape.h2 = ((net.w2 * tape.h1).colwise() + net.b2).array().tanh();
  Eigen::MatrixXd out = (net.w3 * tape.h2).colwise() + net.b3;
  tape.offsets.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) tape.offsets[static_cast<size_t>(i)] = out.col(i);
  return tape;
}

ResidualGrads residual_backward(const ResidualNet& net, const ResidualTape& tape,
                                const std::vector<Vec3>& d_offsets) {
  int n = static_cast<int>(tape.mu.size());
  if (tape.h1.cols() != n || tape.h2.cols() != n ||
      tape.pose_flat.size() != net.pose_dim) {
    throw StateError("residual_backward: no matching forward pass recorded");
  }
  if (d_offsets.size() != tape.mu.size()) {
    throw InvalidArgumentError("residual_backward: gradient count mismatch");
  }
  Eigen::MatrixXd d_out(3, n);
  for (int i = 0; i < n; ++i) d_out.col(i) = d_offsets[static_cast<size_t>(i)];

  Eigen::MatrixXd d_h2 = net.w3.transpose() * d_out;
  Eigen::MatrixXd d_z2 = d_h2.array() * (1.0 - tape.h2.array().square());
  Eigen::MatrixXd d_h1 = net.w2.transpose() * d_z2;
  Eigen::MatrixXd d_z1 = d_h1.array() * (1.0 - tape.h1.array().square());

  Eigen::MatrixXd x(net.input_dim(), n);
  for (int i = 0; i < n; ++i) {
    x.col(i).head(net.pose_dim) = tape.pose_flat;
    x.col(i).tail(3) = tape.mu[static_cast<size_t>(i)];
  }

  ResidualGrads g;
  g.d_w3 = d_out * tape.h2.transpose();
  g.d_b3 = d_out.rowwise().sum();
  g.d_w2 = d_z2 * tape.h1.transpose();
  g.d_b2 = d_z2.rowwise().sum();
  g.d_w1 = d_z1 * x.transpose();
  g.d_b1 = d_z1.rowwise().sum();
  Eigen::MatrixXd d_x = net.w1.transpose() * d_z1;
  g.d_mu.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) g.d_mu[static_cast<size_t>(i)] = d_x.col(i).tail(3);
  return g;
}

}  // namespace gva
