#pragma once

#include <optional>
#include <vector>

#include "core/camera.hpp"
#include "core/common.hpp"
#include "core/gaussian_cloud.hpp"
#include "core/image.hpp"

namespace gva {

struct RenderOptions {
  double alpha_clamp = 0.99;           // per-splat opacity ceiling
  double transmittance_stop = 1e-4;    // stop compositing below this T
  double contribution_floor = 1.0 / 255.0;  // skip splats fainter than this
  double dilation = 0.3;               // px^2 added to the projected diagonal
  int tile_size = 16;
  bool retain_state = true;            // keep contributor lists for backward
  bool compute_color = false;          // set by rasterize_forward
};

// One Gaussian after projection; everything the per-pixel loop touches.
struct ProjectedGaussian {
  int point = -1;        // index into the source cloud
  Vec2 mean = Vec2::Zero();
  Mat2 cov = Mat2::Zero();       // screen covariance, dilation included
  Mat2 cov_inv = Mat2::Zero();
  double depth = 0.0;            // camera-space z
  double radius = 0.0;           // 3 sigma of the major axis, pixels
  Vec3 t_cam = Vec3::Zero();     // camera-space mean
  Vec3 view_dir = Vec3::Zero();  // unit, world frame
  double dir_norm = 0.0;
  Vec3 color = Vec3::Zero();     // SH-decoded, clamped
  double opacity = 0.0;          // sigmoid(eta)
};

// Returns nullopt when the Gaussian is culled: depth outside [near, far], or
// more than 3 sigma outside the frame. compute_color controls SH decoding.
std::optional<ProjectedGaussian> project_gaussian(const GaussianPoint& p, int sh_degree,
                                                  const Camera& cam, const RenderOptions& opts);

// Ascending camera depth, ties keep original order.
std::vector<int> depth_sort(const std::vector<ProjectedGaussian>& projected);

struct RenderTarget {
  int width = 0;
  int height = 0;
  ImageRGB color;
  ImageGray alpha;  // 1 - final transmittance, i.e. the rendered silhouette

  // Retained forward state; required by rasterize_backward.
  bool has_state = false;
  Camera camera;
  RenderOptions options;
  std::vector<ProjectedGaussian> projected;  // depth-sorted survivors
  struct Contribution {
    int32_t proj;  // index into `projected`
    double alpha;  // clamped opacity actually composited
  };
  std::vector<std::vector<Contribution>> contribs;  // per pixel, front-to-back
  std::vector<double> final_t;                      // per pixel
};

// Front-to-back alpha compositing over 16x16 tiles, f64 accumulation.
RenderTarget rasterize_forward(const GaussianCloud& cloud, const Camera& cam,
                               RenderOptions opts = RenderOptions());

struct SplatGradients {
  std::vector<Vec3> d_mu;
  std::vector<Vec4> d_q;
  std::vector<Vec3> d_s;
  std::vector<double> d_eta;
  Eigen::MatrixXd d_f;  // 3*(degree+1)^2 rows, one column per point
};

// Exact adjoint of rasterize_forward. Branches the forward pass clamped or
// skipped carry zero gradient. Needs target.has_state.
SplatGradients rasterize_backward(const GaussianCloud& cloud, const RenderTarget& target,
                                  const ImageRGB& d_color, const ImageGray& d_alpha);

// Alpha plane only; skips SH decoding, bitwise identical to the alpha plane
// of rasterize_forward.
ImageGray render_silhouette(const GaussianCloud& cloud, const Camera& cam,
                            RenderOptions opts = RenderOptions());

}  // namespace gva
