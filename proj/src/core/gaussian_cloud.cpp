#include "core/gaussian_cloud.hpp"

#include <cmath>

#include "core/quat.hpp"
#include "core/sh.hpp"

namespace gva {

void GaussianCloud::reset_grad_accum() {
  grad_dir_sum.assign(points.size(), Vec3::Zero());
  grad_mag_sum.assign(points.size(), 0.0);
  grad_count.assign(points.size(), 0);
}

void GaussianCloud::accumulate_grad(size_t index, const Vec3& d_mu) {
  grad_dir_sum[index] += d_mu;
  grad_mag_sum[index] += d_mu.norm();
  grad_count[index] += 1;
}

void GaussianCloud::check_consistent() const {
  size_t n = points.size();
  if (grad_dir_sum.size() != n || grad_mag_sum.size() != n || grad_count.size() != n) {
    throw StateError("gaussian cloud gradient accumulators out of sync with point count");
  }
  size_t want = static_cast<size_t>(sh_coeff_count(sh_degree)) * 3;
  for (const auto& p : points) {
    if (p.f.size() != want) throw StateError("gaussian point has wrong SH coefficient count");
  }
}

GaussianCloud make_cloud(int sh_degree, size_t count) {
  if (sh_degree < 0 || sh_degree > kMaxShDegree) {
    throw InvalidArgumentError("sh_degree must be in [0, 3]");
  }
  GaussianCloud cloud;
  cloud.sh_degree = sh_degree;
  cloud.points.resize(count);
  for (auto& p : cloud.points) p.f.assign(static_cast<size_t>(sh_coeff_count(sh_degree)) * 3, 0.0);
  cloud.reset_grad_accum();
  return cloud;
}

Mat3 build_covariance(const GaussianPoint& p) {
  Mat3 r = quat_to_mat(quat_normalize(p.q));
  Vec3 scale2 = (2.0 * p.s).array().exp();
  return r * scale2.asDiagonal() * r.transpose();
}

double eval_gaussian(const GaussianPoint& p, const Vec3& x) {
  Mat3 r = quat_to_mat(quat_normalize(p.q));
  Vec3 local = r.transpose() * (x - p.mu);
  Vec3 inv_scale2 = (-2.0 * p.s).array().exp();
  double m = local.cwiseProduct(local).dot(inv_scale2);
  return std::exp(-0.5 * m);
}

Vec3 eval_point_color(const GaussianPoint& p, int sh_degree, const Vec3& view_dir) {
  if (p.f.size() < static_cast<size_t>(sh_coeff_count(sh_degree)) * 3) {
    throw InvalidArgumentError("eval_point_color: coefficient block too small for degree");
  }
  return sh_color(p.f.data(), sh_degree, view_dir);
}

void clone_point(GaussianCloud& cloud, size_t index, double perturb_factor) {
  if (index >= cloud.points.size()) throw InvalidArgumentError("clone_point: index out of range");
  GaussianPoint child = cloud.points[index];
  Vec3 dir = cloud.grad_dir_sum[index];
  double n = dir.norm();
  if (n > 0.0) {
    child.mu += dir / n * (perturb_factor * std::exp(child.s.maxCoeff()));
  }
  cloud.points.push_back(std::move(child));
  cloud.grad_dir_sum.push_back(Vec3::Zero());
  cloud.grad_mag_sum.push_back(0.0);
  cloud.grad_count.push_back(0);
}

void split_point(GaussianCloud& cloud, size_t index, double scale_divisor, Rng& rng) {
  if (index >= cloud.points.size()) throw InvalidArgumentError("split_point: index out of range");
  if (scale_divisor <= 0.0) throw InvalidArgumentError("split_point: divisor must be positive");
  GaussianPoint parent = cloud.points[index];
  Mat3 r = quat_to_mat(quat_normalize(parent.q));
  Vec3 scale = parent.s.array().exp();
  GaussianPoint child = parent;
  child.s = parent.s.array() - std::log(scale_divisor);
  GaussianPoint first = child, second = child;
  first.mu = parent.mu + r * scale.cwiseProduct(rng.normal3());
  second.mu = parent.mu + r * scale.cwiseProduct(rng.normal3());
  cloud.points[index] = std::move(first);
  cloud.grad_dir_sum[index] = Vec3::Zero();
  cloud.grad_mag_sum[index] = 0.0;
  cloud.grad_count[index] = 0;
  cloud.points.push_back(std::move(second));
  cloud.grad_dir_sum.push_back(Vec3::Zero());
  cloud.grad_mag_sum.push_back(0.0);
  cloud.grad_count.push_back(0);
}

std::vector<size_t> prune(GaussianCloud& cloud, double opacity_threshold) {
  std::vector<size_t> kept;
  kept.reserve(cloud.points.size());
  size_t out = 0;
  for (size_t i = 0; i < cloud.points.size(); ++i) {
    if (cloud.points[i].opacity() < opacity_threshold) continue;
    if (out != i) {
      cloud.points[out] = std::move(cloud.points[i]);
      cloud.grad_dir_sum[out] = cloud.grad_dir_sum[i];
      cloud.grad_mag_sum[out] = cloud.grad_mag_sum[i];
      cloud.grad_count[out] = cloud.grad_count[i];
    }
    kept.push_back(i);
    ++out;
  }
  cloud.points.resize(out);
  cloud.grad_dir_sum.resize(out);
  cloud.grad_mag_sum.resize(out);
  cloud.grad_count.resize(out);
  return kept;
}

std::vector<Neighbor> knn_query(const GaussianCloud& cloud, const Vec3& query, int k) {
  if (cloud.points.empty()) throw InvalidArgumentError("knn_query: empty cloud");
  std::vector<Vec3> means;
  means.reserve(cloud.points.size());
  for (const auto& p : cloud.points) means.push_back(p.mu);
  return KdTree(std::move(means)).knn(query, k);
}

}  // namespace gva
