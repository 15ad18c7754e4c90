#include "gva/gva.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <string>

#include "core/config.hpp"
#include "core/checkpoint.hpp"
#include "core/dataset.hpp"
#include "core/json_util.hpp"
#include "core/metrics.hpp"
#include "core/pose_refine.hpp"
#include "core/reinit.hpp"
#include "core/train.hpp"

struct gva_dataset {
  gva::Dataset ds;
};

struct gva_avatar {
  gva::SkeletonAsset asset;
  gva::GaussianCloud cloud;
  gva::ResidualNet net;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

// Runs fn, translating the library's exception taxonomy onto status codes.
template <class Fn>
gva_status wrap(Fn&& fn) {
  try {
    fn();
    return GVA_OK;
  } catch (const gva::InvalidArgumentError& e) {
    set_error(e.what());
    return GVA_ERROR_INVALID_ARGUMENT;
  } catch (const gva::IoError& e) {
    set_error(e.what());
    return GVA_ERROR_IO;
  } catch (const gva::GeometryError& e) {
    set_error(e.what());
    return GVA_ERROR_GEOMETRY;
  } catch (const gva::StateError& e) {
    set_error(e.what());
    return GVA_ERROR_STATE;
  } catch (const std::exception& e) {
    set_error(e.what());
    return GVA_ERROR_INTERNAL;
  } catch (...) {
    set_error("unknown error");
    return GVA_ERROR_INTERNAL;
  }
}

gva_status require(bool ok, const char* msg) {
  if (ok) return GVA_OK;
  set_error(msg);
  return GVA_ERROR_INVALID_ARGUMENT;
}

std::string resolve_near(const std::string& anchor_file, const std::string& rel) {
  std::filesystem::path p(rel);
  if (p.is_absolute()) return rel;
  return (std::filesystem::path(anchor_file).parent_path() / p).string();
}

void check_pose_joints(const gva::SkeletonAsset& asset, const gva::Pose& pose) {
  if (static_cast<int>(pose.joint_rotations.size()) != asset.joint_count()) {
    throw gva::InvalidArgumentError("pose joint count does not match the skeleton asset");
  }
}

gva::Json psnr_json(double v) {
  return std::isfinite(v) ? gva::Json(v) : gva::Json("inf");
}

}  // namespace

extern "C" {

const char* gva_version(void) { return "1.0.0"; }

const char* gva_last_error(void) { return g_last_error.c_str(); }

gva_status gva_config_resolve(const char* kind, const char* config_path, int64_t seed_override,
                              char** out_text) {
  if (gva_status s = require(kind && out_text, "gva_config_resolve: null argument")) return s;
  *out_text = nullptr;
  return wrap([&] {
    std::string kind_str(kind);
    std::string text;
    if (kind_str == "train") {
      gva::TrainConfig c;
      if (config_path) c = gva::load_train_config(config_path);
      if (seed_override >= 0) c.seed = static_cast<uint64_t>(seed_override);
      text = gva::dump_train_config(c);
    } else if (kind_str == "pose-refine") {
      gva::PoseRefineConfig c;
      if (config_path) c = gva::load_pose_refine_config(config_path);
      text = gva::dump_pose_refine_config(c);
    } else if (kind_str == "reinit") {
      gva::ReinitConfig c;
      if (config_path) c = gva::load_reinit_config(config_path);
      text = gva::dump_reinit_config(c);
    } else {
      throw gva::InvalidArgumentError("gva_config_resolve: unknown kind '" + kind_str + "'");
    }
    char* buf = static_cast<char*>(std::malloc(text.size() + 1));
    if (!buf) throw std::bad_alloc();
    std::memcpy(buf, text.c_str(), text.size() + 1);
    *out_text = buf;
  });
}

void gva_string_free(char* text) { std::free(text); }

gva_status gva_dataset_load(const char* manifest_path, gva_dataset** out) {
  if (gva_status s = require(manifest_path && out, "gva_dataset_load: null argument")) return s;
  *out = nullptr;
  return wrap([&] {
    auto handle = std::make_unique<gva_dataset>();
    handle->ds = gva::load_dataset(manifest_path);
    *out = handle.release();
  });
}

void gva_dataset_free(gva_dataset* dataset) { delete dataset; }

gva_status gva_dataset_counts(const gva_dataset* dataset, size_t* frames, size_t* train,
                              size_t* holdout) {
  if (gva_status s = require(dataset != nullptr, "gva_dataset_counts: null dataset")) return s;
  if (frames) *frames = dataset->ds.frames.size();
  if (train) *train = dataset->ds.train_indices.size();
  if (holdout) *holdout = dataset->ds.holdout_indices.size();
  return GVA_OK;
}

gva_status gva_avatar_create(const char* skeleton_path, const char* train_config_path,
                             int64_t seed_override, gva_avatar** out) {
  if (gva_status s = require(skeleton_path && out, "gva_avatar_create: null argument")) return s;
  *out = nullptr;
  return wrap([&] {
    gva::TrainConfig config;
    if (train_config_path) config = gva::load_train_config(train_config_path);
    if (seed_override >= 0) config.seed = static_cast<uint64_t>(seed_override);
    auto handle = std::make_unique<gva_avatar>();
    handle->asset = gva::load_skeleton_asset(skeleton_path);
    gva::Rng rng(config.seed);
    handle->cloud = gva::init_cloud_from_asset(handle->asset, config.init_count,
                                               config.init_sh_degree, config.init_opacity, rng);
    handle->net = gva::make_residual_net(handle->asset.joint_count(), rng);
    *out = handle.release();
  });
}

gva_status gva_avatar_load(const char* skeleton_path, const char* checkpoint_path,
                           gva_avatar** out) {
  if (gva_status s = require(skeleton_path && checkpoint_path && out,
                             "gva_avatar_load: null argument")) {
    return s;
  }
  *out = nullptr;
  return wrap([&] {
    auto handle = std::make_unique<gva_avatar>();
    handle->asset = gva::load_skeleton_asset(skeleton_path);
    handle->cloud = gva::load_checkpoint(checkpoint_path);
    handle->net = gva::load_residual_net(gva::residual_sidecar_path(checkpoint_path));
    if (handle->net.pose_dim != 3 * handle->asset.joint_count()) {
      throw gva::InvalidArgumentError(
          "residual net pose dimension does not match the skeleton asset");
    }
    *out = handle.release();
  });
}

gva_status gva_avatar_save(const gva_avatar* avatar, const char* checkpoint_path) {
  if (gva_status s = require(avatar && checkpoint_path, "gva_avatar_save: null argument")) {
    return s;
  }
  return wrap([&] {
    gva::save_checkpoint(avatar->cloud, checkpoint_path);
    gva::save_residual_net(avatar->net, gva::residual_sidecar_path(checkpoint_path));
  });
}

void gva_avatar_free(gva_avatar* avatar) { delete avatar; }

gva_status gva_avatar_point_count(const gva_avatar* avatar, size_t* out) {
  if (gva_status s = require(avatar && out, "gva_avatar_point_count: null argument")) return s;
  *out = avatar->cloud.size();
  return GVA_OK;
}

gva_status gva_refine_poses(const char* skeleton_path, const char* manifest_path,
                            const char* config_path, const char* out_dir,
                            size_t* refined_count) {
  if (gva_status s = require(skeleton_path && manifest_path && out_dir,
                             "gva_refine_poses: null argument")) {
    return s;
  }
  return wrap([&] {
    gva::SkeletonAsset asset = gva::load_skeleton_asset(skeleton_path);
    gva::Dataset ds = gva::load_dataset(manifest_path);
    gva::PoseRefineConfig config;
    if (config_path) config = gva::load_pose_refine_config(config_path);
    std::filesystem::create_directories(out_dir);

    size_t refined = 0;
    for (const gva::FrameRecord& frame : ds.frames) {
      check_pose_joints(asset, frame.pose);
      gva::Pose result = frame.pose;
      if (frame.has_normals()) {
        gva::NormalMap normals = gva::load_frame_normals(frame);
        gva::ImageGray sil = gva::decode_silhouette(gva::load_frame_silhouette(frame));
        result = gva::refine_pose(asset, frame.pose, frame.camera, normals, sil, config);
        ++refined;
      }
      gva::save_pose_file(result,
                          (std::filesystem::path(out_dir) / (frame.id + ".json")).string());
    }
    if (refined_count) *refined_count = refined;
  });
}

gva_status gva_avatar_train(gva_avatar* avatar, const gva_dataset* dataset,
                            const char* config_path, int64_t seed_override,
                            const char* metrics_path) {
  if (gva_status s = require(avatar && dataset, "gva_avatar_train: null argument")) return s;
  return wrap([&] {
    gva::TrainConfig config;
    if (config_path) config = gva::load_train_config(config_path);
    if (seed_override >= 0) config.seed = static_cast<uint64_t>(seed_override);
    gva::TrainResult result =
        gva::train_avatar(dataset->ds, avatar->asset, avatar->cloud, config, nullptr);
    avatar->cloud = std::move(result.cloud);
    avatar->net = std::move(result.net);
    if (metrics_path) {
      std::string blob;
      for (const std::string& line : result.metrics_lines) {
        blob += line;
        blob += '\n';
      }
      gva::write_file_atomic(metrics_path, blob);
    }
  });
}

gva_status gva_avatar_reinitialize(gva_avatar* avatar, const char* config_path, uint64_t seed,
                                   const char* report_path) {
  if (gva_status s = require(avatar != nullptr, "gva_avatar_reinitialize: null avatar")) return s;
  return wrap([&] {
    gva::ReinitConfig config;
    if (config_path) config = gva::load_reinit_config(config_path);
    gva::Rng rng(seed);
    gva::ReinitReport report;
    avatar->cloud = gva::reinitialize(avatar->cloud, config, rng, &report);
    if (report_path) {
      gva::Json j;
      j["old_count"] = report.old_count;
      j["new_count"] = report.new_count;
      j["alpha"] = report.alpha;
      j["alpha_doublings"] = report.alpha_doublings;
      j["surface_area"] = report.surface_area;
      j["cov_before"] = report.cov_before;
      j["cov_after"] = report.cov_after;
      j["opacity_mass_ratio"] = report.opacity_mass_ratio;
      j["resample_shortfall"] = report.resample_shortfall;
      j["nonmanifold_edges"] = report.nonmanifold_edges;
      gva::write_file_atomic(report_path, j.dump(2) + "\n");
    }
  });
}

gva_status gva_avatar_render(const gva_avatar* avatar, const char* pose_path,
                             const char* camera_path, const char* out_image_path) {
  if (gva_status s = require(avatar && camera_path && out_image_path,
                             "gva_avatar_render: null argument")) {
    return s;
  }
  return wrap([&] {
    gva::Pose pose =
        pose_path ? gva::load_pose_file(pose_path) : gva::zero_pose(avatar->asset.joint_count());
    check_pose_joints(avatar->asset, pose);
    gva::Camera cam = gva::load_camera_file(camera_path);
    gva::ImageRGB image =
        gva::render_avatar(avatar->cloud, avatar->net, avatar->asset, pose, cam);
    gva::write_ppm(image, out_image_path);
  });
}

gva_status gva_avatar_drive(const gva_avatar* avatar, const char* sequence_path,
                            const char* out_dir, size_t* frame_count) {
  if (gva_status s = require(avatar && sequence_path && out_dir,
                             "gva_avatar_drive: null argument")) {
    return s;
  }
  return wrap([&] {
    gva::Json seq = gva::load_json_file(sequence_path);
    const std::string ctx = sequence_path;
    gva::check_keys(seq, ctx, {"format", "camera", "poses"});
    std::string format = gva::json_require<std::string>(seq, ctx, "format");
    if (format != "gva-pose-sequence-v1") {
      throw gva::InvalidArgumentError(ctx + ": unsupported format '" + format + "'");
    }
    gva::Camera cam = gva::load_camera_file(
        resolve_near(sequence_path, gva::json_require<std::string>(seq, ctx, "camera")));
    auto pose_paths = gva::json_require<std::vector<std::string>>(seq, ctx, "poses");
    if (pose_paths.empty()) throw gva::InvalidArgumentError(ctx + ": empty pose list");

    std::filesystem::create_directories(out_dir);
    for (size_t i = 0; i < pose_paths.size(); ++i) {
      gva::Pose pose = gva::load_pose_file(resolve_near(sequence_path, pose_paths[i]));
      check_pose_joints(avatar->asset, pose);
      gva::ImageRGB image =
          gva::render_avatar(avatar->cloud, avatar->net, avatar->asset, pose, cam);
      char name[32];
      std::snprintf(name, sizeof(name), "frame_%04zu.ppm", i);
      gva::write_ppm(image, (std::filesystem::path(out_dir) / name).string());
    }
    if (frame_count) *frame_count = pose_paths.size();
  });
}

gva_status gva_avatar_evaluate(const gva_avatar* avatar, const gva_dataset* dataset, int split,
                               const char* table_path, double* mean_psnr, double* mean_ssim) {
  if (gva_status s = require(avatar && dataset, "gva_avatar_evaluate: null argument")) return s;
  return wrap([&] {
    const gva::Dataset& ds = dataset->ds;
    std::vector<size_t> indices;
    switch (split) {
      case 0: indices = ds.holdout_indices; break;
      case 1: indices = ds.train_indices; break;
      case 2:
        indices.resize(ds.frames.size());
        for (size_t i = 0; i < indices.size(); ++i) indices[i] = i;
        break;
      default:
        throw gva::InvalidArgumentError("gva_avatar_evaluate: split must be 0, 1 or 2");
    }
    if (indices.empty()) {
      throw gva::InvalidArgumentError("gva_avatar_evaluate: selected split has no frames");
    }

    gva::Json rows = gva::Json::array();
    double psnr_sum = 0.0, ssim_sum = 0.0;
    for (size_t fi : indices) {
      const gva::FrameRecord& frame = ds.frames[fi];
      check_pose_joints(avatar->asset, frame.pose);
      gva::ImageRGB rendered =
          gva::render_avatar(avatar->cloud, avatar->net, avatar->asset, frame.pose, frame.camera);
      gva::ImageRGB target = gva::load_frame_image(frame);
      double psnr = gva::compute_psnr(rendered, target);
      double ssim = gva::compute_ssim(rendered, target);
      psnr_sum += std::isfinite(psnr) ? psnr : 99.0;  // identical-image sentinel
      ssim_sum += ssim;
      gva::Json row;
      row["id"] = frame.id;
      row["psnr"] = psnr_json(psnr);
      row["ssim"] = ssim;
      rows.push_back(row);
    }
    double mp = psnr_sum / static_cast<double>(indices.size());
    double ms = ssim_sum / static_cast<double>(indices.size());
    if (mean_psnr) *mean_psnr = mp;
    if (mean_ssim) *mean_ssim = ms;
    if (table_path) {
      gva::Json table;
      table["rows"] = rows;
      table["mean_psnr"] = mp;
      table["mean_ssim"] = ms;
      gva::write_file_atomic(table_path, table.dump(2) + "\n");
    }
  });
}

}  // extern "C"
