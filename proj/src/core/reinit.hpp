#pragma once

#include <string>
#include <vector>

#include "core/common.hpp"
#include "core/gaussian_cloud.hpp"
#include "core/mesh_ops.hpp"
#include "core/rng.hpp"

namespace gva {

// Rebuild Gaussians at new surface positions. Opacity (through sigmoid space)
// and SH coefficients are inverse-distance averages over the k nearest old
// points (exact copy on a zero distance); rotation is a seeded random unit
// quaternion; scale is isotropic ln(local sample spacing * U[0.5,1.5]).
GaussianCloud re_gaussian(const std::vector<Vec3>& samples, const GaussianCloud& old_cloud, int k,
                          Rng& rng);

struct ReinitConfig {
  double alpha_override = 0.0;   // <= 0: use 3x median nearest-neighbor spacing
  int max_alpha_doublings = 8;   // escalation budget when the derived alpha keeps nothing
  ResampleConfig resample;       // target_count <= 0 means "old cloud size"
  int inherit_knn = 3;
  // Recorded bounds for the opacity-mass sanity ratio in the report.
  double opacity_mass_min = 0.5;
  double opacity_mass_max = 2.0;
  bool dump_debug_obj = false;
  std::string debug_obj_prefix;  // writes <prefix>_alpha.obj and <prefix>_smooth.obj
};

struct ReinitReport {
  size_t old_count = 0;
  size_t new_count = 0;
  double alpha = 0.0;
  int alpha_doublings = 0;
  double surface_area = 0.0;
  double cov_before = 0.0;  // nearest-neighbor distance CoV of the old means
  double cov_after = 0.0;
  // Sum of new opacities over (mean old opacity * new count); the config
  // bounds say what counts as sane.
  double opacity_mass_ratio = 0.0;
  int resample_shortfall = 0;
  size_t nonmanifold_edges = 0;
};

// Meshing -> smoothing -> curvature-weighted resampling -> property
// inheritance. Stage failures are rethrown with the stage name prefixed.
GaussianCloud reinitialize(const GaussianCloud& cloud, const ReinitConfig& config, Rng& rng,
                           ReinitReport* report = nullptr);

}  // namespace gva
