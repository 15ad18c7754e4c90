#include "core/reinit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "core/alpha_shape.hpp"
#include "core/delaunay.hpp"
#include "core/kdtree.hpp"

namespace gva {

namespace {

// Rethrows stage failures with the stage name while keeping the error type.
template <class Fn>
auto run_stage(const char* stage, Fn&& fn) {
  auto tag = [&](const char* what) {
    std::ostringstream msg;
    msg << "reinitialize/" << stage << ": " << what;
    return msg.str();
  };
  try {
    return fn();
  } catch (const InvalidArgumentError& e) {
    throw InvalidArgumentError(tag(e.what()));
  } catch (const GeometryError& e) {
    throw GeometryError(tag(e.what()));
  } catch (const IoError& e) {
    throw IoError(tag(e.what()));
  } catch (const StateError& e) {
    throw StateError(tag(e.what()));
  }
}

}  // namespace

GaussianCloud re_gaussian(const std::vector<Vec3>& samples, const GaussianCloud& old_cloud, int k,
                          Rng& rng) {
  if (old_cloud.size() == 0) {
    throw InvalidArgumentError("re_gaussian: old cloud is empty");
  }
  if (k < 1) {
    throw InvalidArgumentError("re_gaussian: k must be at least 1");
  }
  old_cloud.check_consistent();

  std::vector<Vec3> old_mus(old_cloud.size());
  for (size_t i = 0; i < old_cloud.size(); ++i) old_mus[i] = old_cloud.points[i].mu;
  KdTree old_tree(old_mus);
  const int k_eff = std::min<int>(k, static_cast<int>(old_cloud.size()));

  GaussianCloud out = make_cloud(old_cloud.sh_degree, samples.size());
  KdTree sample_tree;
  if (samples.size() >= 2) sample_tree = KdTree(samples);

  const size_t coeffs = old_cloud.points.empty() ? 0 : old_cloud.points[0].f.size();
  for (size_t i = 0; i < samples.size(); ++i) {
    GaussianPoint& p = out.points[i];
    p.mu = samples[i];

    auto nn = old_tree.knn(samples[i], k_eff);
    if (nn[0].dist2 == 0.0) {
      const GaussianPoint& src = old_cloud.points[nn[0].index];
      p.eta = src.eta;
      p.f = src.f;
    } else {
      double w_sum = 0.0;
      double op = 0.0;
      p.f.assign(coeffs, 0.0);
      for (const auto& n : nn) {
        double w = 1.0 / std::sqrt(n.dist2);
        w_sum += w;
        const GaussianPoint& src = old_cloud.points[n.index];
        op += w * src.opacity();
        for (size_t c = 0; c < coeffs; ++c) p.f[c] += w * src.f[c];
      }
      op /= w_sum;
      for (size_t c = 0; c < coeffs; ++c) p.f[c] /= w_sum;
      p.eta = logit(op);
    }

    // One quaternion then one spacing factor per sample, in sample order.
    p.q = rng.unit_quaternion();
    double u = rng.uniform(0.5, 1.5);
    double spacing;
    if (sample_tree.size() > 0) {
      auto near_new = sample_tree.knn_excluding(samples[i], 3, static_cast<int>(i));
      double sum = 0.0;
      for (const auto& n : near_new) sum += std::sqrt(n.dist2);
      spacing = sum / static_cast<double>(near_new.size());
    } else {
      spacing = std::sqrt(nn[0].dist2);  // lone sample: only the old cloud gives a scale
    }
    spacing = std::max(spacing, 1e-12);
    p.s = Vec3::Constant(std::log(spacing * u));
  }

  out.check_consistent();
  return out;
}

GaussianCloud reinitialize(const GaussianCloud& cloud, const ReinitConfig& config, Rng& rng,
                           ReinitReport* report) {
  if (cloud.size() < 4) {
    throw InvalidArgumentError("reinitialize: need at least 4 points");
  }
  if (config.inherit_knn < 1) {
    throw InvalidArgumentError("reinitialize: inherit_knn must be at least 1");
  }
  cloud.check_consistent();

  std::vector<Vec3> mus(cloud.size());
  for (size_t i = 0; i < cloud.size(); ++i) mus[i] = cloud.points[i].mu;

  ReinitReport local;
  ReinitReport& rep = report ? *report : local;
  rep = ReinitReport{};
  rep.old_count = cloud.size();
  rep.cov_before = nn_distance_cov(mus);

  Delaunay3D dt = run_stage("delaunay", [&] { return delaunay3d(mus); });

  // An explicit alpha is taken at face value; the derived default may be
  // doubled a few times when it keeps no tetrahedron at all.
  const bool derived_alpha = !(config.alpha_override > 0.0);
  double alpha =
      derived_alpha ? 3.0 * median_nn_spacing(dt.points) : config.alpha_override;
  const int attempts = derived_alpha ? config.max_alpha_doublings + 1 : 1;
  AlphaShapeResult shape;
  for (int attempt = 0;; ++attempt) {
    try {
      shape = alpha_shape_boundary(dt, alpha);
      break;
    } catch (const GeometryError& e) {
      if (attempt + 1 >= attempts) {
        throw GeometryError(std::string("reinitialize/alpha_shape: ") + e.what());
      }
      alpha *= 2.0;
      rep.alpha_doublings += 1;
    }
  }
  rep.alpha = alpha;
  rep.nonmanifold_edges = shape.nonmanifold_edges.size();

  TriangleMesh smoothed = run_stage("smooth", [&] {
    return laplacian_smooth(shape.surface, config.resample.smoothing_lambda,
                            config.resample.smoothing_iterations);
  });
  std::vector<double> curvature =
      run_stage("curvature", [&] { return curvature_estimate(smoothed); });

  ResampleConfig rs = config.resample;
  if (rs.target_count <= 0) rs.target_count = static_cast<int>(cloud.size());
  ResampleResult sampled =
      run_stage("resample", [&] { return resample_surface(smoothed, curvature, rs, rng); });
  rep.surface_area = sampled.total_area;
  rep.resample_shortfall = sampled.shortfall;

  if (config.dump_debug_obj) {
    run_stage("debug_dump", [&] {
      save_obj(shape.surface, config.debug_obj_prefix + "_alpha.obj");
      save_obj(smoothed, config.debug_obj_prefix + "_smooth.obj");
      return 0;
    });
  }

  std::vector<Vec3> positions(sampled.samples.size());
  for (size_t i = 0; i < sampled.samples.size(); ++i) positions[i] = sampled.samples[i].position;
  GaussianCloud fresh = run_stage(
      "re_gaussian", [&] { return re_gaussian(positions, cloud, config.inherit_knn, rng); });

  rep.new_count = fresh.size();
  rep.cov_after = nn_distance_cov(positions);
  double old_mean_op = 0.0;
  for (const auto& p : cloud.points) old_mean_op += p.opacity();
  old_mean_op /= static_cast<double>(cloud.size());
  double new_mass = 0.0;
  for (const auto& p : fresh.points) new_mass += p.opacity();
  double expected = old_mean_op * static_cast<double>(fresh.size());
  rep.opacity_mass_ratio = expected > 0.0 ? new_mass / expected : 0.0;

  return fresh;
}

}  // namespace gva
