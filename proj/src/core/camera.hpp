#pragma once

#include "core/common.hpp"

namespace gva {

// Pinhole camera. world_to_cam maps world points into the camera frame whose
// +z axis looks forward; a camera-space point t projects to pixel coordinates
// u = fx*t.x/t.z + cx, v = fy*t.y/t.z + cy. Pixel (i, j) covers
// [i, i+1) x [j, j+1) with its center at (i+0.5, j+0.5).
struct Camera {
  int width = 0;
  int height = 0;
  double fx = 0.0, fy = 0.0;
  double cx = 0.0, cy = 0.0;
  double near = 0.01;
  double far = 100.0;
  Mat4 world_to_cam = Mat4::Identity();

  Mat3 rotation() const { return world_to_cam.topLeftCorner<3, 3>(); }
  Vec3 translation() const { return world_to_cam.topRightCorner<3, 1>(); }
  // Camera origin expressed in world coordinates.
  Vec3 center() const { return -rotation().transpose() * translation(); }

  void validate() const {
    if (width <= 0 || height <= 0) throw InvalidArgumentError("camera: non-positive image size");
    if (fx <= 0.0 || fy <= 0.0) throw InvalidArgumentError("camera: non-positive focal length");
    if (!(near > 0.0) || !(far > near)) throw InvalidArgumentError("camera: need 0 < near < far");
    Mat3 r = rotation();
    if (((r * r.transpose()) - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-4) {
      throw InvalidArgumentError("camera: world_to_cam rotation block is not orthonormal");
    }
    if ((world_to_cam.row(3) - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > 1e-9) {
      throw InvalidArgumentError("camera: world_to_cam bottom row must be (0,0,0,1)");
    }
  }
};

}  // namespace gva
