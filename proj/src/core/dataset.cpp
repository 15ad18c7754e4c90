#include "core/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <set>

#include "core/json_util.hpp"

namespace gva {

namespace {

std::string resolve(const std::string& root, const std::string& rel) {
  std::filesystem::path p(rel);
  if (p.is_absolute()) return rel;
  return (std::filesystem::path(root) / p).string();
}

Camera camera_from_json(const Json& j, const std::string& context) {
  check_keys(j, context,
             {"width", "height", "fx", "fy", "cx", "cy", "near", "far", "world_to_cam"});
  Camera cam;
  cam.width = json_require<int>(j, context, "width");
  cam.height = json_require<int>(j, context, "height");
  cam.fx = json_require<double>(j, context, "fx");
  cam.fy = json_require<double>(j, context, "fy");
  cam.cx = json_require<double>(j, context, "cx");
  cam.cy = json_require<double>(j, context, "cy");
  cam.near = json_optional<double>(j, context, "near", cam.near);
  cam.far = json_optional<double>(j, context, "far", cam.far);
  if (!j.contains("world_to_cam")) {
    throw InvalidArgumentError(context + ": missing key 'world_to_cam'");
  }
  cam.world_to_cam = json_mat4(j.at("world_to_cam"), context + ": world_to_cam");
  cam.validate();
  return cam;
}

Pose pose_from_json(const Json& j, const std::string& context) {
  check_keys(j, context, {"joint_rotations", "root_translation"});
  if (!j.contains("joint_rotations") || !j.at("joint_rotations").is_array()) {
    throw InvalidArgumentError(context + ": missing 'joint_rotations' array");
  }
  std::vector<Vec3> rotations;
  for (const auto& entry : j.at("joint_rotations")) {
    rotations.push_back(json_vec3(entry, context + ": joint_rotations"));
  }
  Vec3 root = Vec3::Zero();
  if (j.contains("root_translation")) {
    root = json_vec3(j.at("root_translation"), context + ": root_translation");
  }
  return make_pose(std::move(rotations), root);
}

// Decode once so a broken file fails the load, not the training loop.
void validate_frame_files(const FrameRecord& frame) {
  ImageRGB image = read_ppm(frame.image_path);
  if (image.width != frame.camera.width || image.height != frame.camera.height) {
    throw IoError("image dimensions do not match the camera");
  }
  ImageGray sil = read_gray_any(frame.silhouette_path);
  if (sil.width != frame.camera.width || sil.height != frame.camera.height) {
    throw IoError("silhouette dimensions do not match the camera");
  }
  if (frame.has_normals()) {
    ImageRGB normals = read_ppm(frame.normal_path);
    if (normals.width != frame.camera.width || normals.height != frame.camera.height) {
      throw IoError("normal map dimensions do not match the camera");
    }
    decode_normal_map(normals);
  }
}

}  // namespace

Dataset load_dataset(const std::string& manifest_path) {
  Json manifest = load_json_file(manifest_path);
  const std::string context = manifest_path;
  check_keys(manifest, context, {"format", "frames", "holdout_every"});

  std::string format = json_require<std::string>(manifest, context, "format");
  if (format != "gva-dataset-v1") {
    throw InvalidArgumentError(context + ": unsupported format '" + format + "'");
  }
  int holdout_every = json_optional<int>(manifest, context, "holdout_every", 10);
  if (holdout_every < 0 || holdout_every == 1) {
    throw InvalidArgumentError(context + ": holdout_every must be 0 (disabled) or >= 2");
  }
  if (!manifest.contains("frames") || !manifest.at("frames").is_array() ||
      manifest.at("frames").empty()) {
    throw InvalidArgumentError(context + ": no frames");
  }

  Dataset ds;
  ds.root = std::filesystem::path(manifest_path).parent_path().string();
  if (ds.root.empty()) ds.root = ".";

  std::set<std::string> seen_ids;
  for (const auto& fj : manifest.at("frames")) {
    std::string id = json_require<std::string>(fj, context + ": frame", "id");
    const std::string fctx = context + ": frame '" + id + "'";
    check_keys(fj, fctx, {"id", "image", "silhouette", "normals", "pose", "camera"});
    if (!seen_ids.insert(id).second) {
      throw InvalidArgumentError(fctx + ": duplicate frame id");
    }

    FrameRecord frame;
    frame.id = id;
    frame.image_path = resolve(ds.root, json_require<std::string>(fj, fctx, "image"));
    frame.silhouette_path = resolve(ds.root, json_require<std::string>(fj, fctx, "silhouette"));
    if (fj.contains("normals")) {
      frame.normal_path = resolve(ds.root, json_require<std::string>(fj, fctx, "normals"));
    }
    if (!fj.contains("camera")) throw InvalidArgumentError(fctx + ": missing key 'camera'");
    frame.camera = camera_from_json(fj.at("camera"), fctx + ": camera");

    std::string pose_rel = json_require<std::string>(fj, fctx, "pose");
    try {
      frame.pose = load_pose_file(resolve(ds.root, pose_rel));
      validate_frame_files(frame);
    } catch (const std::runtime_error& e) {
      throw IoError(fctx + ": " + e.what());
    }
    ds.frames.push_back(std::move(frame));
  }

  std::sort(ds.frames.begin(), ds.frames.end(),
            [](const FrameRecord& a, const FrameRecord& b) { return a.id < b.id; });

  size_t joints = ds.frames.front().pose.joint_rotations.size();
  for (const auto& frame : ds.frames) {
    if (frame.pose.joint_rotations.size() != joints) {
      throw InvalidArgumentError(context + ": frame '" + frame.id +
                                 "': joint count differs from the first frame");
    }
  }

  for (size_t i = 0; i < ds.frames.size(); ++i) {
    if (holdout_every > 0 && (i + 1) % static_cast<size_t>(holdout_every) == 0) {
      ds.holdout_indices.push_back(i);
    } else {
      ds.train_indices.push_back(i);
    }
  }
  if (ds.train_indices.empty()) {
    throw InvalidArgumentError(context + ": holdout split leaves no training frames");
  }
  return ds;
}

ImageRGB load_frame_image(const FrameRecord& frame) { return read_ppm(frame.image_path); }

ImageGray load_frame_silhouette(const FrameRecord& frame) {
  return read_gray_any(frame.silhouette_path);
}

NormalMap load_frame_normals(const FrameRecord& frame) {
  if (!frame.has_normals()) {
    throw StateError("frame '" + frame.id + "' has no normal map");
  }
  return decode_normal_map(read_ppm(frame.normal_path));
}

Pose load_pose_file(const std::string& path) {
  Json j = load_json_file(path);
  try {
    return pose_from_json(j, path);
  } catch (const InvalidArgumentError& e) {
    throw IoError(e.what());
  }
}

Camera load_camera_file(const std::string& path) {
  Json j = load_json_file(path);
  try {
    return camera_from_json(j, path);
  } catch (const InvalidArgumentError& e) {
    throw IoError(e.what());
  }
}

void save_pose_file(const Pose& pose, const std::string& path) {
  Json j;
  j["joint_rotations"] = Json::array();
  for (const auto& aa : pose.joint_rotations) {
    j["joint_rotations"].push_back({aa.x(), aa.y(), aa.z()});
  }
  j["root_translation"] = {pose.root_translation.x(), pose.root_translation.y(),
                           pose.root_translation.z()};
  write_file_atomic(path, j.dump(2) + "\n");
}

}  // namespace gva
