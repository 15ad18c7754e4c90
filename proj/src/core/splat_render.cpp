#include "core/splat_render.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/quat.hpp"
#include "core/sh.hpp"

namespace gva {

std::optional<ProjectedGaussian> project_gaussian(const GaussianPoint& p, int sh_degree,
                                                  const Camera& cam, const RenderOptions& opts) {
  const Mat3 w = cam.rotation();
  const Vec3 t = w * p.mu + cam.translation();
  if (!(t.z() >= cam.near) || !(t.z() <= cam.far)) return std::nullopt;

  const Mat3 sigma = build_covariance(p);
  const Mat3 sigma_cam = w * sigma * w.transpose();

  const double iz = 1.0 / t.z();
  const double iz2 = iz * iz;
  Eigen::Matrix<double, 2, 3> jac;
  jac << cam.fx * iz, 0.0, -cam.fx * t.x() * iz2,  //
      0.0, cam.fy * iz, -cam.fy * t.y() * iz2;
  Mat2 cov = jac * sigma_cam * jac.transpose();
  cov(0, 0) += opts.dilation;
  cov(1, 1) += opts.dilation;

  ProjectedGaussian out;
  out.mean = Vec2(cam.fx * t.x() * iz + cam.cx, cam.fy * t.y() * iz + cam.cy);
  const double mid = 0.5 * (cov(0, 0) + cov(1, 1));
  const double half = std::sqrt(std::max(0.0, mid * mid - cov.determinant()));
  out.radius = 3.0 * std::sqrt(std::max(1e-12, mid + half));
  if (out.mean.x() + out.radius < 0.0 || out.mean.x() - out.radius > cam.width ||
      out.mean.y() + out.radius < 0.0 || out.mean.y() - out.radius > cam.height)
    return std::nullopt;

  const double det = cov.determinant();
  if (!(det > 0.0) || !cov.allFinite()) return std::nullopt;
  out.cov = cov;
  out.cov_inv << cov(1, 1) / det, -cov(0, 1) / det, -cov(0, 1) / det, cov(0, 0) / det;
  out.depth = t.z();
  out.t_cam = t;
  out.opacity = p.opacity();
  if (opts.compute_color) {
    const Vec3 to_point = p.mu - cam.center();
    out.dir_norm = to_point.norm();
    out.view_dir = to_point / out.dir_norm;  // nonzero: depth >= near > 0
    out.color = eval_point_color(p, sh_degree, out.view_dir);
  }
  return out;
}

std::vector<int> depth_sort(const std::vector<ProjectedGaussian>& projected) {
  std::vector<int> order(projected.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return projected[a].depth < projected[b].depth; });
  return order;
}

namespace {

struct TileGrid {
  int tiles_x = 0, tiles_y = 0;
  std::vector<std::vector<int>> lists;  // proj indices, depth order
};

TileGrid build_tiles(const std::vector<ProjectedGaussian>& projected, int width, int height,
                     int tile) {
  TileGrid grid;
  grid.tiles_x = (width + tile - 1) / tile;
  grid.tiles_y = (height + tile - 1) / tile;
  grid.lists.resize(static_cast<size_t>(grid.tiles_x) * grid.tiles_y);
  for (size_t i = 0; i < projected.size(); ++i) {
    const ProjectedGaussian& g = projected[i];
    const int x0 = std::clamp(static_cast<int>(std::floor((g.mean.x() - g.radius) / tile)), 0,
                              grid.tiles_x - 1);
    const int x1 = std::clamp(static_cast<int>(std::floor((g.mean.x() + g.radius) / tile)), 0,
                              grid.tiles_x - 1);
    const int y0 = std::clamp(static_cast<int>(std::floor((g.mean.y() - g.radius) / tile)), 0,
                              grid.tiles_y - 1);
    const int y1 = std::clamp(static_cast<int>(std::floor((g.mean.y() + g.radius) / tile)), 0,
                              grid.tiles_y - 1);
    for (int ty = y0; ty <= y1; ++ty)
      for (int tx = x0; tx <= x1; ++tx)
        grid.lists[static_cast<size_t>(ty) * grid.tiles_x + tx].push_back(static_cast<int>(i));
  }
  return grid;
}

}  // namespace

namespace {

RenderTarget render_impl(const GaussianCloud& cloud, const Camera& cam, const RenderOptions& opts) {
  cam.validate();
  RenderTarget target;
  target.width = cam.width;
  target.height = cam.height;
  target.color = ImageRGB(cam.width, cam.height);
  target.alpha = ImageGray(cam.width, cam.height);
  target.camera = cam;
  target.options = opts;

  std::vector<ProjectedGaussian> projected;
  projected.reserve(cloud.points.size());
  for (size_t i = 0; i < cloud.points.size(); ++i) {
    auto proj = project_gaussian(cloud.points[i], cloud.sh_degree, cam, opts);
    if (!proj) continue;
    proj->point = static_cast<int>(i);
    projected.push_back(*proj);
  }
  const std::vector<int> order = depth_sort(projected);
  target.projected.reserve(projected.size());
  for (int idx : order) target.projected.push_back(projected[idx]);

  const size_t n_pixels = static_cast<size_t>(cam.width) * cam.height;
  target.final_t.assign(n_pixels, 1.0);
  if (opts.retain_state) {
    target.contribs.resize(n_pixels);
    target.has_state = true;
  }

  const TileGrid grid = build_tiles(target.projected, cam.width, cam.height, opts.tile_size);
  std::vector<RenderTarget::Contribution> scratch;
  for (int ty = 0; ty < grid.tiles_y; ++ty) {
    for (int tx = 0; tx < grid.tiles_x; ++tx) {
      const std::vector<int>& list = grid.lists[static_cast<size_t>(ty) * grid.tiles_x + tx];
      if (list.empty()) continue;
      const int x_end = std::min((tx + 1) * opts.tile_size, cam.width);
      const int y_end = std::min((ty + 1) * opts.tile_size, cam.height);
      for (int py = ty * opts.tile_size; py < y_end; ++py) {
        for (int px = tx * opts.tile_size; px < x_end; ++px) {
          const Vec2 pix(px + 0.5, py + 0.5);
          double t_cur = 1.0;
          double r = 0.0, g = 0.0, b = 0.0;
          scratch.clear();
          for (int pi : list) {
            const ProjectedGaussian& pg = target.projected[pi];
            const Vec2 d = pix - pg.mean;
            const double power = -0.5 * (pg.cov_inv(0, 0) * d.x() * d.x() +
                                         2.0 * pg.cov_inv(0, 1) * d.x() * d.y() +
                                         pg.cov_inv(1, 1) * d.y() * d.y());
            if (power > 0.0) continue;  // numerical guard; SPD makes this <= 0
            const double alpha = std::min(opts.alpha_clamp, pg.opacity * std::exp(power));
            if (alpha < opts.contribution_floor) continue;
            const double test_t = t_cur * (1.0 - alpha);
            if (test_t < opts.transmittance_stop) break;
            r += t_cur * alpha * pg.color.x();
            g += t_cur * alpha * pg.color.y();
            b += t_cur * alpha * pg.color.z();
            if (opts.retain_state) scratch.push_back({pi, alpha});
            t_cur = test_t;
          }
          target.color.at(px, py, 0) = r;
          target.color.at(px, py, 1) = g;
          target.color.at(px, py, 2) = b;
          target.alpha.at(px, py) = 1.0 - t_cur;
          const size_t flat = static_cast<size_t>(py) * cam.width + px;
          target.final_t[flat] = t_cur;
          if (opts.retain_state && !scratch.empty())
            target.contribs[flat].assign(scratch.begin(), scratch.end());
        }
      }
    }
  }
  return target;
}

}  // namespace

RenderTarget rasterize_forward(const GaussianCloud& cloud, const Camera& cam, RenderOptions opts) {
  opts.compute_color = true;
  return render_impl(cloud, cam, opts);
}

SplatGradients rasterize_backward(const GaussianCloud& cloud, const RenderTarget& target,
                                  const ImageRGB& d_color, const ImageGray& d_alpha) {
  if (!target.has_state)
    throw StateError("rasterize_backward: forward pass was not retained (retain_state off)");
  if (d_color.width != target.width || d_color.height != target.height ||
      d_alpha.width != target.width || d_alpha.height != target.height)
    throw InvalidArgumentError("rasterize_backward: upstream gradient size mismatch");

  const size_t n = cloud.points.size();
  const int n_coeffs = sh_coeff_count(cloud.sh_degree);
  SplatGradients grads;
  grads.d_mu.assign(n, Vec3::Zero());
  grads.d_q.assign(n, Vec4::Zero());
  grads.d_s.assign(n, Vec3::Zero());
  grads.d_eta.assign(n, 0.0);
  grads.d_f = Eigen::MatrixXd::Zero(3 * n_coeffs, n);

  // Per-projected accumulators filled by the pixel sweep.
  const size_t np = target.projected.size();
  std::vector<Vec3> acc_color(np, Vec3::Zero());
  std::vector<Vec2> acc_mean(np, Vec2::Zero());
  std::vector<Mat2> acc_cov(np, Mat2::Zero());
  std::vector<double> acc_opacity(np, 0.0);

  const RenderOptions& opts = target.options;
  for (int py = 0; py < target.height; ++py) {
    for (int px = 0; px < target.width; ++px) {
      const size_t flat = static_cast<size_t>(py) * target.width + px;
      const auto& contribs = target.contribs[flat];
      if (contribs.empty()) continue;
      const Vec3 g_color(d_color.at(px, py, 0), d_color.at(px, py, 1), d_color.at(px, py, 2));
      const double g_alpha = d_alpha.at(px, py);
      if (g_color.isZero(0.0) && g_alpha == 0.0) continue;
      const Vec2 pix(px + 0.5, py + 0.5);
      const double t_final = target.final_t[flat];

      // Walk back-to-front, rebuilding each contribution's entry
      // transmittance and the suffix color sum S.
      Vec3 suffix = Vec3::Zero();
      double t_next = t_final;
      for (size_t k = contribs.size(); k-- > 0;) {
        const auto& c = contribs[k];
        const ProjectedGaussian& pg = target.projected[c.proj];
        const double one_minus = 1.0 - c.alpha;
        const double t_entry = t_next / one_minus;
        const double d_alpha_i = g_color.dot(t_entry * pg.color - suffix / one_minus) +
                                 g_alpha * t_final / one_minus;
        acc_color[c.proj] += g_color * (t_entry * c.alpha);

        // alpha = min(clamp, opacity * G); the clamped branch is flat.
        const Vec2 d = pix - pg.mean;
        const double power =
            -0.5 * (pg.cov_inv(0, 0) * d.x() * d.x() + 2.0 * pg.cov_inv(0, 1) * d.x() * d.y() +
                    pg.cov_inv(1, 1) * d.y() * d.y());
        const double gauss = std::exp(power);
        if (pg.opacity * gauss <= opts.alpha_clamp) {
          acc_opacity[c.proj] += d_alpha_i * gauss;
          const double d_power = d_alpha_i * pg.opacity * gauss;
          const Vec2 u = pg.cov_inv * d;
          acc_mean[c.proj] += d_power * u;
          acc_cov[c.proj] += (0.5 * d_power) * (u * u.transpose());
        }
        suffix += t_entry * c.alpha * pg.color;
        t_next = t_entry;
      }
    }
  }

  // Per-Gaussian chain from screen-space accumulators down to parameters.
  const Camera& cam = target.camera;
  const Mat3 w = cam.rotation();
  for (size_t pi = 0; pi < np; ++pi) {
    const ProjectedGaussian& pg = target.projected[pi];
    const int point = pg.point;
    const GaussianPoint& p = cloud.points[point];

    Vec3 d_mu = Vec3::Zero();
    Vec3 d_t = Vec3::Zero();

    // Color: SH coefficients and the view direction.
    if (!acc_color[pi].isZero(0.0)) {
      Vec3 d_dir = Vec3::Zero();
      sh_color_backward(p.f.data(), cloud.sh_degree, pg.view_dir, acc_color[pi],
                        grads.d_f.col(point).data(), d_dir);
      // dir = (mu - origin)/|mu - origin|
      d_mu += (d_dir - pg.view_dir * pg.view_dir.dot(d_dir)) / pg.dir_norm;
    }

    // Opacity logit.
    grads.d_eta[point] += acc_opacity[pi] * pg.opacity * (1.0 - pg.opacity);

    // Screen mean: m = (fx tx/tz + cx, fy ty/tz + cy).
    const double iz = 1.0 / pg.depth;
    const double iz2 = iz * iz;
    const Vec3 t = pg.t_cam;
    const Vec2& dm = acc_mean[pi];
    d_t.x() += cam.fx * iz * dm.x();
    d_t.y() += cam.fy * iz * dm.y();
    d_t.z() += -(cam.fx * t.x() * iz2) * dm.x() - (cam.fy * t.y() * iz2) * dm.y();

    const Mat2& d_cov2 = acc_cov[pi];
    if (!d_cov2.isZero(0.0)) {
      const Mat3 sigma = build_covariance(p);
      const Mat3 sigma_cam = w * sigma * w.transpose();
      Eigen::Matrix<double, 2, 3> jac;
      jac << cam.fx * iz, 0.0, -cam.fx * t.x() * iz2,  //
          0.0, cam.fy * iz, -cam.fy * t.y() * iz2;

      // cov2 = J sigma_cam J^T + dilation.
      const Mat3 d_sigma_cam = jac.transpose() * d_cov2 * jac;
      const Eigen::Matrix<double, 2, 3> d_jac = 2.0 * d_cov2 * jac * sigma_cam;

      // Jacobian entries depend on the camera-space mean.
      d_t.x() += d_jac(0, 2) * (-cam.fx * iz2);
      d_t.y() += d_jac(1, 2) * (-cam.fy * iz2);
      d_t.z() += d_jac(0, 0) * (-cam.fx * iz2) + d_jac(1, 1) * (-cam.fy * iz2) +
                 d_jac(0, 2) * (2.0 * cam.fx * t.x() * iz2 * iz) +
                 d_jac(1, 2) * (2.0 * cam.fy * t.y() * iz2 * iz);

      // sigma_cam = W sigma W^T; sigma = R diag(e^{2s}) R^T.
      const Mat3 d_sigma = w.transpose() * d_sigma_cam * w;
      const Mat3 rot = quat_to_mat(quat_normalize(p.q));
      const Vec3 e2 = (2.0 * p.s).array().exp();
      const Mat3 d_rot = 2.0 * d_sigma * rot * e2.asDiagonal();
      const Mat3 rt_ds_r = rot.transpose() * d_sigma * rot;
      for (int k = 0; k < 3; ++k) grads.d_s[point](k) += 2.0 * e2(k) * rt_ds_r(k, k);
      grads.d_q[point] += quat_rotation_backward(p.q, d_rot);
    }

    // Camera-space mean: t = W mu + t_wc.
    d_mu += w.transpose() * d_t;
    grads.d_mu[point] += d_mu;
  }
  return grads;
}

ImageGray render_silhouette(const GaussianCloud& cloud, const Camera& cam, RenderOptions opts) {
  opts.retain_state = false;
  opts.compute_color = false;  // alpha arithmetic is untouched by colors
  RenderTarget target = render_impl(cloud, cam, opts);
  return std::move(target.alpha);
}

}  // namespace gva
