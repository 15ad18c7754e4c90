#pragma once

#include <string>
#include <vector>

#include "core/camera.hpp"
#include "core/image.hpp"
#include "core/mesh_render.hpp"
#include "core/skeleton.hpp"

namespace gva {

struct FrameRecord {
  std::string id;
  std::string image_path;       // RGB target, binary PPM
  std::string silhouette_path;  // grayscale mask, PGM (or PPM, channel-mean)
  std::string normal_path;      // optional encoded normal map; empty if absent
  Pose pose;
  Camera camera;

  bool has_normals() const { return !normal_path.empty(); }
};

struct Dataset {
  std::string root;  // directory of the manifest; frame paths resolve against it
  std::vector<FrameRecord> frames;           // sorted by id
  std::vector<size_t> train_indices;
  std::vector<size_t> holdout_indices;
};

// Loads and fully validates a JSON manifest: every referenced file must
// exist, decode, and match the frame camera dimensions, and all frames must
// share one joint count. Any bad frame fails the whole load, with the frame
// id in the message. holdout_every (default 10, 0 disables) sends every n-th
// frame of the sorted order to the held-out split.
Dataset load_dataset(const std::string& manifest_path);

ImageRGB load_frame_image(const FrameRecord& frame);
ImageGray load_frame_silhouette(const FrameRecord& frame);
NormalMap load_frame_normals(const FrameRecord& frame);

// Pose document: {"joint_rotations": [[x,y,z],...], "root_translation": [x,y,z]}
Pose load_pose_file(const std::string& path);
void save_pose_file(const Pose& pose, const std::string& path);

// Standalone camera document with the same schema as the manifest's
// per-frame "camera" object.
Camera load_camera_file(const std::string& path);

}  // namespace gva
