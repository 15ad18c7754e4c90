#include "core/config.hpp"

#include "core/json_util.hpp"

namespace gva {

namespace {

ResampleConfig resample_from_json(const Json& j, const std::string& ctx) {
  check_keys(j, ctx,
             {"target_count", "curvature_boost", "min_spacing_factor", "smoothing_iterations",
              "smoothing_lambda"});
  ResampleConfig c;
  c.target_count = json_optional<int>(j, ctx, "target_count", c.target_count);
  c.curvature_boost = json_optional<double>(j, ctx, "curvature_boost", c.curvature_boost);
  c.min_spacing_factor =
      json_optional<double>(j, ctx, "min_spacing_factor", c.min_spacing_factor);
  c.smoothing_iterations =
      json_optional<int>(j, ctx, "smoothing_iterations", c.smoothing_iterations);
  c.smoothing_lambda = json_optional<double>(j, ctx, "smoothing_lambda", c.smoothing_lambda);
  return c;
}

Json resample_to_json(const ResampleConfig& c) {
  Json j;
  j["target_count"] = c.target_count;
  j["curvature_boost"] = c.curvature_boost;
  j["min_spacing_factor"] = c.min_spacing_factor;
  j["smoothing_iterations"] = c.smoothing_iterations;
  j["smoothing_lambda"] = c.smoothing_lambda;
  return j;
}

ReinitConfig reinit_from_json(const Json& j, const std::string& ctx) {
  check_keys(j, ctx,
             {"alpha_override", "max_alpha_doublings", "resample", "inherit_knn",
              "opacity_mass_min", "opacity_mass_max", "dump_debug_obj", "debug_obj_prefix"});
  ReinitConfig c;
  c.alpha_override = json_optional<double>(j, ctx, "alpha_override", c.alpha_override);
  c.max_alpha_doublings = json_optional<int>(j, ctx, "max_alpha_doublings", c.max_alpha_doublings);
  if (j.contains("resample")) c.resample = resample_from_json(j.at("resample"), ctx + ".resample");
  c.inherit_knn = json_optional<int>(j, ctx, "inherit_knn", c.inherit_knn);
  c.opacity_mass_min = json_optional<double>(j, ctx, "opacity_mass_min", c.opacity_mass_min);
  c.opacity_mass_max = json_optional<double>(j, ctx, "opacity_mass_max", c.opacity_mass_max);
  c.dump_debug_obj = json_optional<bool>(j, ctx, "dump_debug_obj", c.dump_debug_obj);
  c.debug_obj_prefix =
      json_optional<std::string>(j, ctx, "debug_obj_prefix", c.debug_obj_prefix);
  return c;
}

Json reinit_to_json(const ReinitConfig& c) {
  Json j;
  j["alpha_override"] = c.alpha_override;
  j["max_alpha_doublings"] = c.max_alpha_doublings;
  j["resample"] = resample_to_json(c.resample);
  j["inherit_knn"] = c.inherit_knn;
  j["opacity_mass_min"] = c.opacity_mass_min;
  j["opacity_mass_max"] = c.opacity_mass_max;
  j["dump_debug_obj"] = c.dump_debug_obj;
  j["debug_obj_prefix"] = c.debug_obj_prefix;
  return j;
}

TrainConfig train_from_json(const Json& j, const std::string& ctx) {
  check_keys(j, ctx,
             {"lambda3", "lambda4", "steps", "lr", "densify_interval", "densify_grad_threshold",
              "densify_size_threshold", "prune_opacity_threshold", "split_scale_divisor",
              "max_scale", "reinit_steps", "reinit", "eval_interval", "init_count",
              "init_opacity", "init_sh_degree", "seed"});
  TrainConfig c;
  c.lambda3 = json_optional<double>(j, ctx, "lambda3", c.lambda3);
  c.lambda4 = json_optional<double>(j, ctx, "lambda4", c.lambda4);
  c.steps = json_optional<int>(j, ctx, "steps", c.steps);
  if (j.contains("lr")) {
    const Json& lr = j.at("lr");
    const std::string lctx = ctx + ".lr";
    check_keys(lr, lctx, {"position", "rotation", "scale", "opacity", "sh", "residual"});
    c.lr.position = json_optional<double>(lr, lctx, "position", c.lr.position);
    c.lr.rotation = json_optional<double>(lr, lctx, "rotation", c.lr.rotation);
    c.lr.scale = json_optional<double>(lr, lctx, "scale", c.lr.scale);
    c.lr.opacity = json_optional<double>(lr, lctx, "opacity", c.lr.opacity);
    c.lr.sh = json_optional<double>(lr, lctx, "sh", c.lr.sh);
    c.lr.residual = json_optional<double>(lr, lctx, "residual", c.lr.residual);
  }
  c.densify_interval = json_optional<int>(j, ctx, "densify_interval", c.densify_interval);
  c.densify_grad_threshold =
      json_optional<double>(j, ctx, "densify_grad_threshold", c.densify_grad_threshold);
  c.densify_size_threshold =
      json_optional<double>(j, ctx, "densify_size_threshold", c.densify_size_threshold);
  c.prune_opacity_threshold =
      json_optional<double>(j, ctx, "prune_opacity_threshold", c.prune_opacity_threshold);
  c.split_scale_divisor =
      json_optional<double>(j, ctx, "split_scale_divisor", c.split_scale_divisor);
  c.max_scale = json_optional<double>(j, ctx, "max_scale", c.max_scale);
  c.reinit_steps = json_optional<std::vector<int>>(j, ctx, "reinit_steps", c.reinit_steps);
  if (j.contains("reinit")) c.reinit = reinit_from_json(j.at("reinit"), ctx + ".reinit");
  c.eval_interval = json_optional<int>(j, ctx, "eval_interval", c.eval_interval);
  c.init_count = json_optional<int>(j, ctx, "init_count", c.init_count);
  c.init_opacity = json_optional<double>(j, ctx, "init_opacity", c.init_opacity);
  c.init_sh_degree = json_optional<int>(j, ctx, "init_sh_degree", c.init_sh_degree);
  c.seed = json_optional<uint64_t>(j, ctx, "seed", c.seed);
  c.validate();
  return c;
}

PoseRefineConfig pose_refine_from_json(const Json& j, const std::string& ctx) {
  check_keys(j, ctx,
             {"lambda1", "lambda2", "omega_decay", "fd_step", "adam_lr", "max_iters",
              "converge_tol"});
  PoseRefineConfig c;
  c.lambda1 = json_optional<double>(j, ctx, "lambda1", c.lambda1);
  c.lambda2 = json_optional<double>(j, ctx, "lambda2", c.lambda2);
  c.omega_decay = json_optional<double>(j, ctx, "omega_decay", c.omega_decay);
  c.fd_step = json_optional<double>(j, ctx, "fd_step", c.fd_step);
  c.adam_lr = json_optional<double>(j, ctx, "adam_lr", c.adam_lr);
  c.max_iters = json_optional<int>(j, ctx, "max_iters", c.max_iters);
  c.converge_tol = json_optional<double>(j, ctx, "converge_tol", c.converge_tol);
  c.validate();
  return c;
}

}  // namespace

void TrainConfig::validate() const {
  if (steps < 1) throw InvalidArgumentError("train config: steps must be >= 1");
  if (lambda3 < 0.0 || lambda4 < 0.0) {
    throw InvalidArgumentError("train config: loss weights must be non-negative");
  }
  for (double v : {lr.position, lr.rotation, lr.scale, lr.opacity, lr.sh, lr.residual}) {
    if (!(v > 0.0)) throw InvalidArgumentError("train config: learning rates must be positive");
  }
  if (densify_interval < 0) {
    throw InvalidArgumentError("train config: densify_interval must be non-negative");
  }
  if (!(split_scale_divisor > 1.0)) {
    throw InvalidArgumentError("train config: split_scale_divisor must exceed 1");
  }
  if (!(max_scale > 0.0)) throw InvalidArgumentError("train config: max_scale must be positive");
  for (int s : reinit_steps) {
    if (s < 1 || s >= steps) {
      throw InvalidArgumentError("train config: reinit_steps must lie in [1, steps)");
    }
  }
  if (eval_interval < 0) {
    throw InvalidArgumentError("train config: eval_interval must be non-negative");
  }
  if (init_count < 4) throw InvalidArgumentError("train config: init_count must be >= 4");
  if (!(init_opacity > 0.0 && init_opacity < 1.0)) {
    throw InvalidArgumentError("train config: init_opacity must be in (0,1)");
  }
  if (init_sh_degree < 0 || init_sh_degree > 3) {
    throw InvalidArgumentError("train config: init_sh_degree must be in [0,3]");
  }
}

TrainConfig load_train_config(const std::string& path) {
  return train_from_json(load_json_file(path), path);
}

TrainConfig train_config_from_json_text(const std::string& text, const std::string& context) {
  try {
    return train_from_json(Json::parse(text), context);
  } catch (const Json::parse_error& e) {
    throw InvalidArgumentError(context + ": " + e.what());
  }
}

std::string dump_train_config(const TrainConfig& c) {
  Json j;
  j["lambda3"] = c.lambda3;
  j["lambda4"] = c.lambda4;
  j["steps"] = c.steps;
  j["lr"] = {{"position", c.lr.position}, {"rotation", c.lr.rotation}, {"scale", c.lr.scale},
             {"opacity", c.lr.opacity},   {"sh", c.lr.sh},             {"residual", c.lr.residual}};
  j["densify_interval"] = c.densify_interval;
  j["densify_grad_threshold"] = c.densify_grad_threshold;
  j["densify_size_threshold"] = c.densify_size_threshold;
  j["prune_opacity_threshold"] = c.prune_opacity_threshold;
  j["split_scale_divisor"] = c.split_scale_divisor;
  j["max_scale"] = c.max_scale;
  j["reinit_steps"] = c.reinit_steps;
  j["reinit"] = reinit_to_json(c.reinit);
  j["eval_interval"] = c.eval_interval;
  j["init_count"] = c.init_count;
  j["init_opacity"] = c.init_opacity;
  j["init_sh_degree"] = c.init_sh_degree;
  j["seed"] = c.seed;
  return j.dump(2) + "\n";
}

PoseRefineConfig load_pose_refine_config(const std::string& path) {
  return pose_refine_from_json(load_json_file(path), path);
}

PoseRefineConfig pose_refine_config_from_json_text(const std::string& text,
                                                   const std::string& context) {
  try {
    return pose_refine_from_json(Json::parse(text), context);
  } catch (const Json::parse_error& e) {
    throw InvalidArgumentError(context + ": " + e.what());
  }
}

std::string dump_pose_refine_config(const PoseRefineConfig& c) {
  Json j;
  j["lambda1"] = c.lambda1;
  j["lambda2"] = c.lambda2;
  j["omega_decay"] = c.omega_decay;
  j["fd_step"] = c.fd_step;
  j["adam_lr"] = c.adam_lr;
  j["max_iters"] = c.max_iters;
  j["converge_tol"] = c.converge_tol;
  return j.dump(2) + "\n";
}

ReinitConfig load_reinit_config(const std::string& path) {
  return reinit_from_json(load_json_file(path), path);
}

std::string dump_reinit_config(const ReinitConfig& c) {
  return reinit_to_json(c).dump(2) + "\n";
}

}  // namespace gva
