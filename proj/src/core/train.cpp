#include "core/train.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "core/adam.hpp"
#include "core/deform.hpp"
#include "core/json_util.hpp"
#include "core/kdtree.hpp"
#include "core/losses.hpp"
#include "core/metrics.hpp"
#include "core/quat.hpp"
#include "core/splat_render.hpp"

namespace gva {

namespace {

constexpr int kGaussianInfluences = 4;
constexpr double kClonePerturb = 0.01;

std::vector<Vec3> cloud_positions(const GaussianCloud& cloud) {
  std::vector<Vec3> mus(cloud.size());
  for (size_t i = 0; i < cloud.size(); ++i) mus[i] = cloud.points[i].mu;
  return mus;
}

std::vector<Mat4> blend_all(const std::vector<SkinRow>& bindings,
                            const JointTransforms& transforms) {
  std::vector<Mat4> out(bindings.size());
  for (size_t i = 0; i < bindings.size(); ++i) out[i] = blend_transform(bindings[i], transforms);
  return out;
}

// Flat parameter views in a fixed order so Adam buffers line up.
struct FlatParams {
  Eigen::VectorXd mu, q, s, eta, f;
};

FlatParams gather_params(const GaussianCloud& cloud) {
  const size_t n = cloud.size();
  const size_t fc = n == 0 ? 0 : cloud.points[0].f.size();
  FlatParams p;
  p.mu.resize(3 * n);
  p.q.resize(4 * n);
  p.s.resize(3 * n);
  p.eta.resize(n);
  p.f.resize(fc * n);
  for (size_t i = 0; i < n; ++i) {
    const GaussianPoint& g = cloud.points[i];
    p.mu.segment<3>(3 * i) = g.mu;
    p.q.segment<4>(4 * i) = g.q;
    p.s.segment<3>(3 * i) = g.s;
    p.eta[i] = g.eta;
    p.f.segment(fc * i, fc) = Eigen::Map<const Eigen::VectorXd>(g.f.data(), fc);
  }
  return p;
}

void scatter_params(const FlatParams& p, GaussianCloud& cloud, double max_scale) {
  const size_t n = cloud.size();
  const size_t fc = n == 0 ? 0 : cloud.points[0].f.size();
  const double log_cap = std::log(max_scale);
  for (size_t i = 0; i < n; ++i) {
    GaussianPoint& g = cloud.points[i];
    g.mu = p.mu.segment<3>(3 * i);
    g.q = quat_normalize(p.q.segment<4>(4 * i));
    g.s = p.s.segment<3>(3 * i).cwiseMin(log_cap);
    g.eta = p.eta[i];
    Eigen::Map<Eigen::VectorXd>(g.f.data(), fc) = p.f.segment(fc * i, fc);
  }
}

Eigen::VectorXd flatten_net(const ResidualNet& net) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(net.param_count()));
  Eigen::Index at = 0;
  for (const auto* m : {&net.w1, &net.w2, &net.w3}) {
    out.segment(at, m->size()) = Eigen::Map<const Eigen::VectorXd>(m->data(), m->size());
    at += m->size();
  }
  for (const auto* b : {&net.b1, &net.b2, &net.b3}) {
    out.segment(at, b->size()) = *b;
    at += b->size();
  }
  return out;
}

void unflatten_net(const Eigen::VectorXd& flat, ResidualNet& net) {
  Eigen::Index at = 0;
  for (auto* m : {&net.w1, &net.w2, &net.w3}) {
    Eigen::Map<Eigen::VectorXd>(m->data(), m->size()) = flat.segment(at, m->size());
    at += m->size();
  }
  for (auto* b : {&net.b1, &net.b2, &net.b3}) {
    *b = flat.segment(at, b->size());
    at += b->size();
  }
}

Eigen::VectorXd flatten_net_grads(const ResidualGrads& g) {
  Eigen::Index total = g.d_w1.size() + g.d_w2.size() + g.d_w3.size() + g.d_b1.size() +
                       g.d_b2.size() + g.d_b3.size();
  Eigen::VectorXd out(total);
  Eigen::Index at = 0;
  for (const auto* m : {&g.d_w1, &g.d_w2, &g.d_w3}) {
    out.segment(at, m->size()) = Eigen::Map<const Eigen::VectorXd>(m->data(), m->size());
    at += m->size();
  }
  for (const auto* b : {&g.d_b1, &g.d_b2, &g.d_b3}) {
    out.segment(at, b->size()) = *b;
    at += b->size();
  }
  return out;
}

void track_cloud_groups(Adam& adam, const GaussianCloud& cloud) {
  const Eigen::Index n = static_cast<Eigen::Index>(cloud.size());
  const Eigen::Index fc = cloud.size() == 0 ? 0 : static_cast<Eigen::Index>(cloud.points[0].f.size());
  adam.track("position", 3 * n);
  adam.track("rotation", 4 * n);
  adam.track("scale", 3 * n);
  adam.track("opacity", n);
  adam.track("sh", fc * n);
}

Json json_psnr(double v) { return std::isfinite(v) ? Json(v) : Json("inf"); }

}  // namespace

GaussianCloud init_cloud_from_asset(const SkeletonAsset& asset, int count, int sh_degree,
                                    double init_opacity, Rng& rng) {
  if (count < 4) throw InvalidArgumentError("init_cloud_from_asset: count must be >= 4");
  if (!(init_opacity > 0.0 && init_opacity < 1.0)) {
    throw InvalidArgumentError("init_cloud_from_asset: init_opacity must be in (0,1)");
  }
  const TriangleMesh& mesh = asset.mesh;
  if (mesh.faces.empty()) {
    throw InvalidArgumentError("init_cloud_from_asset: asset mesh has no faces");
  }

  std::vector<double> cdf(mesh.faces.size());
  double running = 0.0;
  for (size_t t = 0; t < mesh.faces.size(); ++t) {
    const auto& f = mesh.faces[t];
    const Vec3& a = mesh.vertices[f[0]];
    running += 0.5 * (mesh.vertices[f[1]] - a).cross(mesh.vertices[f[2]] - a).norm();
    cdf[t] = running;
  }
  if (!(running > 0.0)) {
    throw InvalidArgumentError("init_cloud_from_asset: asset mesh has zero area");
  }

  GaussianCloud cloud = make_cloud(sh_degree, static_cast<size_t>(count));
  std::vector<Vec3> positions(count);
  for (int i = 0; i < count; ++i) {
    double r = rng.uniform01() * running;
    size_t t =
        static_cast<size_t>(std::upper_bound(cdf.begin(), cdf.end(), r) - cdf.begin());
    if (t >= mesh.faces.size()) t = mesh.faces.size() - 1;
    double su = std::sqrt(rng.uniform01());
    double v = rng.uniform01();
    const auto& f = mesh.faces[t];
    positions[i] = (1.0 - su) * mesh.vertices[f[0]] + su * (1.0 - v) * mesh.vertices[f[1]] +
                   su * v * mesh.vertices[f[2]];
  }

  KdTree tree(positions);
  const double eta = logit(init_opacity);
  for (int i = 0; i < count; ++i) {
    GaussianPoint& p = cloud.points[i];
    p.mu = positions[i];
    p.q = rng.unit_quaternion();
    auto nn = tree.knn_excluding(positions[i], 3, i);
    double spacing = 0.0;
    for (const auto& n : nn) spacing += std::sqrt(n.dist2);
    spacing = std::max(spacing / static_cast<double>(nn.size()), 1e-12);
    p.s = Vec3::Constant(std::log(spacing));
    p.eta = eta;
  }
  cloud.check_consistent();
  return cloud;
}

ImageRGB render_avatar(const GaussianCloud& cloud, const ResidualNet& net,
                       const SkeletonAsset& asset, const Pose& pose, const Camera& cam) {
  cloud.check_consistent();
  std::vector<SkinRow> bindings =
      bind_skinning(asset, cloud_positions(cloud), kGaussianInfluences);
  JointTransforms transforms = forward_kinematics(asset, pose);
  DeformResult fwd = deform_gaussians(cloud, blend_all(bindings, transforms), net, pose);
  RenderOptions opts;
  opts.retain_state = false;
  return rasterize_forward(fwd.posed, cam, opts).color;
}

TrainResult train_avatar(const Dataset& dataset, const SkeletonAsset& asset,
                         const GaussianCloud& initial, const TrainConfig& config,
                         std::ostream* echo) {
  config.validate();
  initial.check_consistent();
  if (dataset.train_indices.empty()) {
    throw InvalidArgumentError("train: dataset has no training frames");
  }
  const int joints = asset.joint_count();
  for (size_t fi : dataset.train_indices) {
    if (static_cast<int>(dataset.frames[fi].pose.joint_rotations.size()) != joints) {
      throw InvalidArgumentError("train: frame '" + dataset.frames[fi].id +
                                 "' joint count does not match the asset");
    }
  }
  // Tiny clouds are legitimate (toy scenes); reinitialize enforces its own
  // >= 4 minimum if a scheduled re-init actually runs.
  if (initial.size() == 0) throw InvalidArgumentError("train: initial cloud is empty");

  Rng rng(config.seed);
  TrainResult result;
  result.cloud = initial;
  result.net = make_residual_net(joints, rng);
  GaussianCloud& cloud = result.cloud;
  ResidualNet& net = result.net;

  auto log_line = [&](const Json& j) {
    result.metrics_lines.push_back(j.dump());
    if (echo) *echo << result.metrics_lines.back() << '\n';
  };

  // Targets stay decoded for the whole run (desk-scale datasets).
  std::vector<ImageRGB> images(dataset.frames.size());
  for (size_t i = 0; i < dataset.frames.size(); ++i) {
    images[i] = load_frame_image(dataset.frames[i]);
  }

  std::vector<SkinRow> bindings =
      bind_skinning(asset, cloud_positions(cloud), kGaussianInfluences);
  Adam adam;
  track_cloud_groups(adam, cloud);
  adam.track("net", static_cast<Eigen::Index>(net.param_count()));

  auto eval_holdout = [&](int step) {
    if (dataset.holdout_indices.empty()) return;
    Json row;
    row["event"] = "eval";
    row["step"] = step;
    Json per = Json::array();
    double sum = 0.0;
    for (size_t hi : dataset.holdout_indices) {
      const FrameRecord& frame = dataset.frames[hi];
      JointTransforms transforms = forward_kinematics(asset, frame.pose);
      DeformResult fwd =
          deform_gaussians(cloud, blend_all(bindings, transforms), net, frame.pose);
      RenderOptions opts;
      opts.retain_state = false;
      ImageRGB color = rasterize_forward(fwd.posed, frame.camera, opts).color;
      double psnr = compute_psnr(color, images[hi]);
      per.push_back(json_psnr(psnr));
      sum += std::isfinite(psnr) ? psnr : 99.0;
    }
    row["psnr"] = per;
    row["psnr_mean"] = sum / static_cast<double>(dataset.holdout_indices.size());
    row["points"] = cloud.size();
    log_line(row);
  };

  {
    Json head;
    head["event"] = "start";
    head["steps"] = config.steps;
    head["points"] = cloud.size();
    head["train_frames"] = dataset.train_indices.size();
    head["holdout_frames"] = dataset.holdout_indices.size();
    head["seed"] = config.seed;
    log_line(head);
  }

  if (config.eval_interval > 0) eval_holdout(0);  // baseline before any update

  std::vector<size_t> order = dataset.train_indices;
  size_t cursor = order.size();  // shuffle on first use

  for (int step = 1; step <= config.steps; ++step) {
    if (cursor == order.size()) {
      rng.shuffle(order);
      cursor = 0;
    }
    const FrameRecord& frame = dataset.frames[order[cursor]];
    const ImageRGB& target_image = images[order[cursor]];
    ++cursor;

    JointTransforms transforms = forward_kinematics(asset, frame.pose);
    DeformResult fwd = deform_gaussians(cloud, blend_all(bindings, transforms), net, frame.pose);
    RenderTarget rt = rasterize_forward(fwd.posed, frame.camera);

    ImageRGB d_color;
    std::vector<Vec3> d_offsets;
    RenderLossTerms terms = render_loss(rt.color, target_image, fwd.offsets, config.lambda3,
                                        config.lambda4, &d_color, &d_offsets);
    if (!std::isfinite(terms.total)) {
      std::ostringstream msg;
      msg << "train: non-finite loss at step " << step;
      throw StateError(msg.str());
    }

    ImageGray d_alpha(rt.width, rt.height);
    SplatGradients sg = rasterize_backward(fwd.posed, rt, d_color, d_alpha);
    DeformGrads dg = deform_backward(fwd, net, sg.d_mu, sg.d_q, d_offsets);

    for (const ProjectedGaussian& pg : rt.projected) {
      cloud.accumulate_grad(static_cast<size_t>(pg.point), sg.d_mu[pg.point]);
    }

    // Flat gradient buffers in the same layout as gather_params.
    const size_t n = cloud.size();
    const size_t fc = cloud.points[0].f.size();
    FlatParams params = gather_params(cloud);
    Eigen::VectorXd g_mu(3 * n), g_q(4 * n), g_s(3 * n), g_eta(n), g_f(fc * n);
    for (size_t i = 0; i < n; ++i) {
      g_mu.segment<3>(3 * i) = dg.d_mu[i];
      g_q.segment<4>(4 * i) = dg.d_q[i];
      g_s.segment<3>(3 * i) = sg.d_s[i];
      g_eta[i] = sg.d_eta[i];
      g_f.segment(fc * i, fc) = sg.d_f.col(static_cast<Eigen::Index>(i));
    }
    adam.step("position", params.mu, g_mu, config.lr.position);
    adam.step("rotation", params.q, g_q, config.lr.rotation);
    adam.step("scale", params.s, g_s, config.lr.scale);
    adam.step("opacity", params.eta, g_eta, config.lr.opacity);
    adam.step("sh", params.f, g_f, config.lr.sh);
    scatter_params(params, cloud, config.max_scale);

    Eigen::VectorXd net_flat = flatten_net(net);
    adam.step("net", net_flat, flatten_net_grads(dg.residual), config.lr.residual);
    unflatten_net(net_flat, net);

    {
      Json row;
      row["step"] = step;
      row["frame"] = frame.id;
      row["total"] = terms.total;
      row["l1"] = terms.l1;
      row["perceptual"] = terms.perceptual;
      row["residual"] = terms.residual;
      row["points"] = cloud.size();
      log_line(row);
    }

    if (config.densify_interval > 0 && step % config.densify_interval == 0 &&
        step < config.steps) {
      const size_t before = cloud.size();
      std::vector<long> source(before);
      for (size_t i = 0; i < before; ++i) source[i] = static_cast<long>(i);
      size_t cloned = 0, split = 0;
      for (size_t i = 0; i < before; ++i) {
        if (cloud.grad_count[i] == 0) continue;
        double mean_grad = cloud.grad_mag_sum[i] / static_cast<double>(cloud.grad_count[i]);
        if (mean_grad < config.densify_grad_threshold) continue;
        double size = std::exp(cloud.points[i].s.maxCoeff());
        if (size <= config.densify_size_threshold) {
          clone_point(cloud, i, kClonePerturb);
          source.push_back(-1);
          ++cloned;
        } else {
          split_point(cloud, i, config.split_scale_divisor, rng);
          source[i] = -1;
          source.push_back(-1);
          ++split;
        }
      }
      std::vector<size_t> kept = prune(cloud, config.prune_opacity_threshold);
      if (cloud.size() == 0) {
        std::ostringstream msg;
        msg << "train: all points pruned at step " << step;
        throw StateError(msg.str());
      }
      std::vector<long> remapped(kept.size());
      for (size_t j = 0; j < kept.size(); ++j) remapped[j] = source[kept[j]];
      adam.remap("position", remapped, 3);
      adam.remap("rotation", remapped, 4);
      adam.remap("scale", remapped, 3);
      adam.remap("opacity", remapped, 1);
      adam.remap("sh", remapped, static_cast<int>(fc));
      bindings = bind_skinning(asset, cloud_positions(cloud), kGaussianInfluences);
      cloud.reset_grad_accum();

      Json row;
      row["event"] = "densify";
      row["step"] = step;
      row["cloned"] = cloned;
      row["split"] = split;
      row["pruned"] = before + cloned + split - kept.size();
      row["points"] = cloud.size();
      log_line(row);
    }

    if (std::find(config.reinit_steps.begin(), config.reinit_steps.end(), step) !=
        config.reinit_steps.end()) {
      ReinitReport report;
      cloud = reinitialize(cloud, config.reinit, rng, &report);
      track_cloud_groups(adam, cloud);  // fresh zeroed moments: identities changed
      bindings = bind_skinning(asset, cloud_positions(cloud), kGaussianInfluences);

      Json row;
      row["event"] = "reinit";
      row["step"] = step;
      row["old_points"] = report.old_count;
      row["points"] = report.new_count;
      row["alpha"] = report.alpha;
      row["alpha_doublings"] = report.alpha_doublings;
      row["surface_area"] = report.surface_area;
      row["cov_before"] = report.cov_before;
      row["cov_after"] = report.cov_after;
      row["opacity_mass_ratio"] = report.opacity_mass_ratio;
      row["shortfall"] = report.resample_shortfall;
      row["nonmanifold_edges"] = report.nonmanifold_edges;
      log_line(row);
    }

    if (config.eval_interval > 0 &&
        (step % config.eval_interval == 0 || step == config.steps)) {
      eval_holdout(step);
    }
  }

  return result;
}

}  // namespace gva
