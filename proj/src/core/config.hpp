#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/pose_refine.hpp"
#include "core/reinit.hpp"

namespace gva {

struct LearningRates {
  double position = 1.6e-4;
  double rotation = 1e-3;
  double scale = 5e-3;
  double opacity = 5e-2;
  double sh = 2.5e-3;
  double residual = 1e-4;
};

struct TrainConfig {
  double lambda3 = 0.1;  // perceptual weight
  double lambda4 = 0.5;  // residual-offset regularizer
  int steps = 3000;
  LearningRates lr;

  int densify_interval = 300;
  double densify_grad_threshold = 2e-6;   // mean |dL/dmu| per visible step
  double densify_size_threshold = 0.05;   // exp(max s) above this splits, below clones
  double prune_opacity_threshold = 0.005;
  double split_scale_divisor = 1.6;
  double max_scale = 1.0;  // projection cap: s <= ln(max_scale)

  std::vector<int> reinit_steps = {1000, 2000};
  ReinitConfig reinit;

  int eval_interval = 500;  // held-out PSNR cadence, 0 disables
  int init_count = 2000;    // initial Gaussians sampled on the asset surface
  double init_opacity = 0.1;
  int init_sh_degree = 1;
  uint64_t seed = 0;

  void validate() const;
};

// JSON round-trips. Unknown keys are rejected; missing keys keep defaults.
TrainConfig load_train_config(const std::string& path);
TrainConfig train_config_from_json_text(const std::string& text, const std::string& context);
std::string dump_train_config(const TrainConfig& config);

PoseRefineConfig load_pose_refine_config(const std::string& path);
PoseRefineConfig pose_refine_config_from_json_text(const std::string& text,
                                                   const std::string& context);
std::string dump_pose_refine_config(const PoseRefineConfig& config);

ReinitConfig load_reinit_config(const std::string& path);
std::string dump_reinit_config(const ReinitConfig& config);

}  // namespace gva
