#pragma once

#include <vector>

#include "core/camera.hpp"
#include "core/image.hpp"
#include "core/mesh_render.hpp"
#include "core/skeleton.hpp"

namespace gva {

struct PoseRefineConfig {
  double lambda1 = 5.0;      // silhouette weight
  double lambda2 = 0.5;      // pose regularizer weight
  double omega_decay = 0.9;  // per-depth joint weight decay
  double fd_step = 1e-3;     // central-difference step, radians
  double adam_lr = 0.01;
  int max_iters = 100;
  double converge_tol = 1e-5;  // relative loss change

  void validate() const;
};

// omega_i = decay^depth(i), root depth 0. decay in (0, 1].
std::vector<double> joint_weights(const SkeletonAsset& asset, double decay);

// Weighted contributions: total = normal + silhouette + regular, with
// silhouette already scaled by lambda1 and regular by lambda2.
struct PoseLossTerms {
  double total = 0.0;
  double normal = 0.0;
  double silhouette = 0.0;
  double regular = 0.0;
};

// Renders the posed mesh and scores it against the target normal map and
// silhouette, plus the per-joint L1 anchor to the stage-1 pose.
PoseLossTerms pose_loss(const SkeletonAsset& asset, const Pose& pose, const Pose& theta_stage1,
                        const Camera& cam, const NormalMap& target_normals,
                        const ImageGray& target_sil, const PoseRefineConfig& config);

// Adam over the joint rotations with central finite-difference gradients.
// Root translation and camera are held fixed. Returns the lowest-loss pose
// seen, so the result can never be worse than the input.
Pose refine_pose(const SkeletonAsset& asset, const Pose& theta_stage1, const Camera& cam,
                 const NormalMap& target_normals, const ImageGray& target_sil,
                 const PoseRefineConfig& config, std::vector<double>* loss_history = nullptr);

}  // namespace gva
