#pragma once

#include <string>
#include <vector>

#include "core/common.hpp"
#include "core/mesh.hpp"
#include "core/rng.hpp"

namespace gva {

// Uniform-umbrella smoothing: per iteration every vertex moves by
// lambda * (neighbor average - vertex), all vertices updated simultaneously.
// Connectivity is untouched; isolated vertices stay put.
TriangleMesh laplacian_smooth(const TriangleMesh& mesh, double lambda, int iterations);

// Discrete mean-curvature magnitude: cotangent Laplacian norm over the Meyer
// mixed area (|sum (cot a + cot b)(v_i - v_j)| / (4 A_mixed)). Unit sphere
// gives ~1. Vertices on boundary edges get the maximum over their one-ring
// (their own partial ring underestimates badly).
std::vector<double> curvature_estimate(const TriangleMesh& mesh);

struct ResampleConfig {
  int target_count = 0;            // reinitialize() fills <=0 with the old cloud size
  double curvature_boost = 1.0;    // density multiplier strength, >= 0
  double min_spacing_factor = 0.5; // fraction of sqrt(area / target_count)
  int smoothing_iterations = 10;
  double smoothing_lambda = 0.5;
};

struct SurfaceSample {
  Vec3 position;
  int face = -1;
  Vec3 bary;  // position == b0*A + b1*B + b2*C of that face
};

struct ResampleResult {
  std::vector<SurfaceSample> samples;
  int shortfall = 0;  // target_count minus what spacing enforcement allowed
  double total_area = 0.0;
};

// Area-weighted candidate draw (4x target, per-triangle weight boosted by
// 1 + curvature_boost * normalized mean vertex curvature), thinned by greedy
// farthest-point selection until target_count points or the best remaining
// gap drops below min_spacing_factor * sqrt(area / target_count).
ResampleResult resample_surface(const TriangleMesh& mesh, const std::vector<double>& curvature,
                                const ResampleConfig& config, Rng& rng);

double mesh_area(const TriangleMesh& mesh);

// Coefficient of variation (stddev / mean) of nearest-neighbor distances.
double nn_distance_cov(const std::vector<Vec3>& points);

// Plain ASCII OBJ (v/f lines only) for eyeballing intermediate meshes.
void save_obj(const TriangleMesh& mesh, const std::string& path);

}  // namespace gva
