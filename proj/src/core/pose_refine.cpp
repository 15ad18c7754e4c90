#include "core/pose_refine.hpp"

#include <cmath>
#include <sstream>

#include "core/adam.hpp"

namespace gva {

void PoseRefineConfig::validate() const {
  if (lambda1 < 0.0 || lambda2 < 0.0) {
    throw InvalidArgumentError("pose refine config: loss weights must be non-negative");
  }
  if (!(omega_decay > 0.0 && omega_decay <= 1.0)) {
    throw InvalidArgumentError("pose refine config: omega_decay must be in (0,1]");
  }
  if (!(fd_step > 0.0)) {
    throw InvalidArgumentError("pose refine config: fd_step must be positive");
  }
  if (!(adam_lr > 0.0)) {
    throw InvalidArgumentError("pose refine config: adam_lr must be positive");
  }
  if (max_iters < 0) {
    throw InvalidArgumentError("pose refine config: max_iters must be non-negative");
  }
  if (!(converge_tol >= 0.0)) {
    throw InvalidArgumentError("pose refine config: converge_tol must be non-negative");
  }
}

std::vector<double> joint_weights(const SkeletonAsset& asset, double decay) {
  if (!(decay > 0.0 && decay <= 1.0)) {
    throw InvalidArgumentError("joint_weights: decay must be in (0,1]");
  }
  std::vector<double> omega(asset.joint_count());
  for (int i = 0; i < asset.joint_count(); ++i) {
    omega[i] = std::pow(decay, static_cast<double>(asset.depth(i)));
  }
  return omega;
}

PoseLossTerms pose_loss(const SkeletonAsset& asset, const Pose& pose, const Pose& theta_stage1,
                        const Camera& cam, const NormalMap& target_normals,
                        const ImageGray& target_sil, const PoseRefineConfig& config) {
  config.validate();
  const int joints = asset.joint_count();
  if (static_cast<int>(pose.joint_rotations.size()) != joints ||
      static_cast<int>(theta_stage1.joint_rotations.size()) != joints) {
    throw InvalidArgumentError("pose_loss: pose joint count does not match the asset");
  }
  if (target_normals.width != cam.width || target_normals.height != cam.height ||
      target_sil.width != cam.width || target_sil.height != cam.height) {
    throw InvalidArgumentError("pose_loss: target maps do not match the camera dimensions");
  }

  TriangleMesh posed = deform_mesh(asset, pose);
  MeshRaster raster = rasterize_mesh(posed, cam);

  PoseLossTerms terms;
  terms.normal = compare_normal_maps(raster.normals, target_normals);

  double sil_sum = 0.0;
  for (size_t i = 0; i < raster.silhouette.data.size(); ++i) {
    sil_sum += std::abs(raster.silhouette.data[i] - target_sil.data[i]);
  }
  terms.silhouette =
      config.lambda1 * sil_sum / static_cast<double>(raster.silhouette.data.size());

  std::vector<double> omega = joint_weights(asset, config.omega_decay);
  double reg = 0.0;
  for (int i = 0; i < joints; ++i) {
    reg += omega[i] * (pose.joint_rotations[i] - theta_stage1.joint_rotations[i])
                          .cwiseAbs()
                          .sum();
  }
  terms.regular = config.lambda2 * reg;

  terms.total = terms.normal + terms.silhouette + terms.regular;
  return terms;
}

Pose refine_pose(const SkeletonAsset& asset, const Pose& theta_stage1, const Camera& cam,
                 const NormalMap& target_normals, const ImageGray& target_sil,
                 const PoseRefineConfig& config, std::vector<double>* loss_history) {
  config.validate();
  const int joints = asset.joint_count();
  const int dim = 3 * joints;

  auto to_pose = [&](const Eigen::VectorXd& theta) {
    Pose p = theta_stage1;
    for (int i = 0; i < joints; ++i) p.joint_rotations[i] = theta.segment<3>(3 * i);
    return p;
  };
  auto eval = [&](const Eigen::VectorXd& theta) {
    return pose_loss(asset, to_pose(theta), theta_stage1, cam, target_normals, target_sil,
                     config)
        .total;
  };

  Eigen::VectorXd theta = flatten_pose(theta_stage1).head(dim);
  double loss = eval(theta);
  if (!std::isfinite(loss)) {
    std::ostringstream msg;
    msg << "refine_pose: loss at the initial pose is not finite (" << loss << ")";
    throw InvalidArgumentError(msg.str());
  }
  if (loss_history) loss_history->assign(1, loss);

  Eigen::VectorXd best_theta = theta;
  double best_loss = loss;
  double prev_loss = loss;

  Adam adam;
  adam.track("pose", dim);
  Eigen::VectorXd grad(dim);
  for (int it = 0; it < config.max_iters; ++it) {
    for (int i = 0; i < dim; ++i) {
      Eigen::VectorXd probe = theta;
      probe[i] = theta[i] + config.fd_step;
      double hi = eval(probe);
      probe[i] = theta[i] - config.fd_step;
      double lo = eval(probe);
      grad[i] = (hi - lo) / (2.0 * config.fd_step);
    }
    adam.step("pose", theta, grad, config.adam_lr);
    loss = eval(theta);
    if (loss_history) loss_history->push_back(loss);
    if (loss < best_loss) {
      best_loss = loss;
      best_theta = theta;
    }
    double rel = std::abs(loss - prev_loss) / std::max(std::abs(prev_loss), 1e-12);
    prev_loss = loss;
    if (rel < config.converge_tol) break;
  }

  // Canonical angle range for the returned pose; a no-op away from pi.
  Pose refined = to_pose(best_theta);
  for (auto& aa : refined.joint_rotations) aa = wrap_axis_angle(aa);
  return refined;
}

}  // namespace gva
