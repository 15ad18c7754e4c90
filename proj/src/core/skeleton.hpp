#pragma once

#include <string>
#include <utility>
#include <vector>

#include "core/common.hpp"
#include "core/mesh.hpp"

namespace gva {

struct Joint {
  std::string name;
  int parent = -1;                         // -1 for the root
  Vec4 rest_rotation = Vec4(1, 0, 0, 0);   // canonical-space rest orientation
  Vec3 rest_translation = Vec3::Zero();    // canonical-space rest position
};

// Sparse skinning row: (joint index, weight) pairs sorted by joint index.
using SkinRow = std::vector<std::pair<int, double>>;

struct SkeletonAsset {
  std::vector<Joint> joints;
  TriangleMesh mesh;
  std::vector<SkinRow> skin_weights;  // one row per canonical vertex

  int joint_count() const { return static_cast<int>(joints.size()); }
  // Depth of joint i below the root (root = 0).
  int depth(int i) const;
  void validate() const;
};

// Axis-angle rotations per joint plus a root translation. Construct through
// make_pose so magnitudes are wrapped into [0, pi].
struct Pose {
  std::vector<Vec3> joint_rotations;
  Vec3 root_translation = Vec3::Zero();
};

Vec3 wrap_axis_angle(const Vec3& aa);
Pose make_pose(std::vector<Vec3> joint_rotations, const Vec3& root_translation);
Pose zero_pose(int joint_count);
Eigen::VectorXd flatten_pose(const Pose& pose);

// Canonical-to-posed rigid transform per joint.
struct JointTransforms {
  std::vector<Mat4> canonical_to_posed;
};

// Composes each joint's local rotation about its rest position down the
// tree; the root additionally translates. A zero pose yields exact identity
// transforms.
JointTransforms forward_kinematics(const SkeletonAsset& asset, const Pose& pose);

// Skinning weights for arbitrary points: copy the nearest canonical vertex's
// row, keep the top `max_influences` weights, renormalize.
std::vector<SkinRow> bind_skinning(const SkeletonAsset& asset, const std::vector<Vec3>& positions,
                                   int max_influences);

// Weighted sum of joint transforms. If every referenced transform is bitwise
// identical the transform is returned as-is, so rigid regions stay exact.
Mat4 blend_transform(const SkinRow& weights, const JointTransforms& transforms);

// LBS on the asset's canonical mesh using its own skin weights.
TriangleMesh deform_mesh(const SkeletonAsset& asset, const Pose& pose);

// Structured-text asset format (see README). Loader errors carry 1-based
// line numbers.
SkeletonAsset load_skeleton_asset(const std::string& path);
void save_skeleton_asset(const SkeletonAsset& asset, const std::string& path);

}  // namespace gva
