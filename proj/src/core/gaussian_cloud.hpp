#pragma once

#include <vector>

#include "core/common.hpp"
#include "core/kdtree.hpp"
#include "core/rng.hpp"

namespace gva {

// One anisotropic Gaussian primitive. Field order here is also the checkpoint
// field order: mu, q, s, eta, f.
struct GaussianPoint {
  Vec3 mu = Vec3::Zero();            // position
  Vec4 q = Vec4(1.0, 0.0, 0.0, 0.0); // rotation quaternion (w, x, y, z)
  Vec3 s = Vec3::Zero();             // log-scales
  double eta = 0.0;                  // opacity logit
  std::vector<double> f;             // SH coefficients, [coeff][rgb] triples

  double opacity() const { return sigmoid(eta); }
};

// Point set plus the densification bookkeeping. The accumulators hold, per
// point, the summed positional-gradient vector, its summed magnitude, and the
// number of steps the point was visible; clone() consumes the direction,
// densify thresholds consume magnitude/count.
struct GaussianCloud {
  int sh_degree = 0;
  std::vector<GaussianPoint> points;
  std::vector<Vec3> grad_dir_sum;
  std::vector<double> grad_mag_sum;
  std::vector<uint32_t> grad_count;

  size_t size() const { return points.size(); }
  void reset_grad_accum();
  void accumulate_grad(size_t index, const Vec3& d_mu);
  void check_consistent() const;
};

GaussianCloud make_cloud(int sh_degree, size_t count = 0);

// Sigma = R diag(exp(s))^2 R^T; symmetric positive definite by construction.
Mat3 build_covariance(const GaussianPoint& p);

// Unnormalized density exp(-0.5 d^T Sigma^-1 d). The inverse is formed from
// the rotation/scale factors directly, so it is exact for tiny scales.
double eval_gaussian(const GaussianPoint& p, const Vec3& x);

// View-dependent color: 0.5 offset plus coefficient-weighted SH basis,
// clamped to [0,1]. view_dir must be unit length.
Vec3 eval_point_color(const GaussianPoint& p, int sh_degree, const Vec3& view_dir);

// Appends a copy of points[index] displaced along that point's accumulated
// gradient direction by perturb_factor * exp(max(s)). Zero accumulated
// gradient clones in place.
void clone_point(GaussianCloud& cloud, size_t index, double perturb_factor);

// Replaces points[index] with two children drawn from its own distribution;
// the first child takes the parent's slot, the second is appended. Children
// keep q/eta/f and get s - ln(scale_divisor).
void split_point(GaussianCloud& cloud, size_t index, double scale_divisor, Rng& rng);

// Removes points with opacity < threshold (stable order). Returns the kept
// old indices so optimizer state can be remapped.
std::vector<size_t> prune(GaussianCloud& cloud, double opacity_threshold);

// Exact k-nearest points to `query` among the cloud means. Builds a kd-tree
// per call; batch users should build KdTree over the means once.
std::vector<Neighbor> knn_query(const GaussianCloud& cloud, const Vec3& query, int k);

}  // namespace gva
