#include "core/mesh_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "core/image.hpp"
#include "core/kdtree.hpp"

namespace gva {

namespace {

std::vector<std::vector<int>> vertex_neighbors(const TriangleMesh& mesh) {
  std::vector<std::set<int>> sets(mesh.vertices.size());
  for (const auto& f : mesh.faces) {
    for (int e = 0; e < 3; ++e) {
      int a = f[e], b = f[(e + 1) % 3];
      sets[a].insert(b);
      sets[b].insert(a);
    }
  }
  std::vector<std::vector<int>> out(sets.size());
  for (size_t i = 0; i < sets.size(); ++i) out[i].assign(sets[i].begin(), sets[i].end());
  return out;
}

double face_area(const TriangleMesh& mesh, const std::array<int, 3>& f) {
  const Vec3& a = mesh.vertices[f[0]];
  return 0.5 * (mesh.vertices[f[1]] - a).cross(mesh.vertices[f[2]] - a).norm();
}

}  // namespace

TriangleMesh laplacian_smooth(const TriangleMesh& mesh, double lambda, int iterations) {
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw InvalidArgumentError("laplacian_smooth: lambda must be in (0,1)");
  }
  if (iterations < 0) {
    throw InvalidArgumentError("laplacian_smooth: iterations must be non-negative");
  }
  mesh.validate();
  TriangleMesh out = mesh;
  if (iterations == 0) return out;

  auto neighbors = vertex_neighbors(mesh);
  std::vector<Vec3> next(out.vertices.size());
  for (int it = 0; it < iterations; ++it) {
    for (size_t i = 0; i < out.vertices.size(); ++i) {
      if (neighbors[i].empty()) {
        next[i] = out.vertices[i];
        continue;
      }
      Vec3 avg = Vec3::Zero();
      for (int j : neighbors[i]) avg += out.vertices[j];
      avg /= static_cast<double>(neighbors[i].size());
      next[i] = out.vertices[i] + lambda * (avg - out.vertices[i]);
    }
    out.vertices.swap(next);
  }
  return out;
}

std::vector<double> curvature_estimate(const TriangleMesh& mesh) {
  mesh.validate();
  const size_t n = mesh.vertices.size();
  std::vector<Vec3> laplace(n, Vec3::Zero());
  std::vector<double> mixed_area(n, 0.0);

  for (const auto& f : mesh.faces) {
    const Vec3& a = mesh.vertices[f[0]];
    const Vec3& b = mesh.vertices[f[1]];
    const Vec3& c = mesh.vertices[f[2]];
    double area = 0.5 * (b - a).cross(c - a).norm();
    if (area < 1e-15) continue;  // sliver: no reliable angle information

    // cot of the angle at each corner; dot/|cross| with the cross norm shared.
    double cot[3];
    Vec3 v[3] = {a, b, c};
    bool obtuse[3];
    for (int i = 0; i < 3; ++i) {
      Vec3 e1 = v[(i + 1) % 3] - v[i];
      Vec3 e2 = v[(i + 2) % 3] - v[i];
      double d = e1.dot(e2);
      cot[i] = d / (2.0 * area);
      obtuse[i] = d < 0.0;
    }

    // Cotangent weight of the edge opposite each corner.
    for (int i = 0; i < 3; ++i) {
      int p = f[(i + 1) % 3], q = f[(i + 2) % 3];
      Vec3 diff = mesh.vertices[p] - mesh.vertices[q];
      laplace[p] += cot[i] * diff;
      laplace[q] -= cot[i] * diff;
    }

    // Meyer mixed area: Voronoi area for non-obtuse triangles, otherwise
    // half the area at the obtuse corner and a quarter elsewhere.
    bool any_obtuse = obtuse[0] || obtuse[1] || obtuse[2];
    for (int i = 0; i < 3; ++i) {
      if (any_obtuse) {
        mixed_area[f[i]] += obtuse[i] ? area * 0.5 : area * 0.25;
      } else {
        double lj = (v[(i + 1) % 3] - v[i]).squaredNorm();
        double lk = (v[(i + 2) % 3] - v[i]).squaredNorm();
        mixed_area[f[i]] += (lj * cot[(i + 2) % 3] + lk * cot[(i + 1) % 3]) / 8.0;
      }
    }
  }

  std::vector<double> curvature(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    curvature[i] = laplace[i].norm() / (4.0 * std::max(mixed_area[i], 1e-30));
  }

  // Vertices on boundary edges (an edge with a single incident face) have a
  // partial ring; take the one-ring maximum there instead.
  std::map<std::array<int, 2>, int> edge_faces;
  for (const auto& f : mesh.faces) {
    for (int e = 0; e < 3; ++e) {
      int a = f[e], b = f[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      edge_faces[{a, b}] += 1;
    }
  }
  std::vector<char> boundary(n, 0);
  for (const auto& [edge, count] : edge_faces) {
    if (count == 1) boundary[edge[0]] = boundary[edge[1]] = 1;
  }
  auto neighbors = vertex_neighbors(mesh);
  std::vector<double> out = curvature;
  for (size_t i = 0; i < n; ++i) {
    if (!boundary[i]) continue;
    double best = curvature[i];
    for (int j : neighbors[i]) best = std::max(best, curvature[j]);
    out[i] = best;
  }
  return out;
}

ResampleResult resample_surface(const TriangleMesh& mesh, const std::vector<double>& curvature,
                                const ResampleConfig& config, Rng& rng) {
  mesh.validate();
  if (curvature.size() != mesh.vertices.size()) {
    throw InvalidArgumentError("resample_surface: curvature size does not match vertex count");
  }
  if (config.target_count < 4) {
    throw InvalidArgumentError("resample_surface: target_count must be at least 4");
  }
  if (config.curvature_boost < 0.0) {
    throw InvalidArgumentError("resample_surface: curvature_boost must be non-negative");
  }
  if (config.min_spacing_factor < 0.0) {
    throw InvalidArgumentError("resample_surface: min_spacing_factor must be non-negative");
  }

  ResampleResult result;
  const size_t face_count = mesh.faces.size();
  std::vector<double> weight_cdf(face_count, 0.0);
  double face_mean_max = 0.0;
  std::vector<double> face_mean(face_count, 0.0);
  for (size_t t = 0; t < face_count; ++t) {
    const auto& f = mesh.faces[t];
    face_mean[t] = (curvature[f[0]] + curvature[f[1]] + curvature[f[2]]) / 3.0;
    face_mean_max = std::max(face_mean_max, face_mean[t]);
  }
  double running = 0.0;
  for (size_t t = 0; t < face_count; ++t) {
    double area = face_area(mesh, mesh.faces[t]);
    result.total_area += area;
    double boost = face_mean_max > 0.0 ? face_mean[t] / face_mean_max : 0.0;
    running += area * (1.0 + config.curvature_boost * boost);
    weight_cdf[t] = running;
  }
  if (face_count == 0) {
    throw InvalidArgumentError("resample_surface: mesh has no faces");
  }
  if (!(running > 0.0)) {
    // Fully collapsed mesh: no area to weight by. Fall back to uniform face
    // choice; the duplicate candidates then thin down to a single sample.
    for (size_t t = 0; t < face_count; ++t) weight_cdf[t] = static_cast<double>(t + 1);
    running = static_cast<double>(face_count);
  }

  const int candidate_count = 4 * config.target_count;
  std::vector<SurfaceSample> candidates(candidate_count);
  for (int i = 0; i < candidate_count; ++i) {
    double r = rng.uniform01() * running;
    size_t t = static_cast<size_t>(
        std::upper_bound(weight_cdf.begin(), weight_cdf.end(), r) - weight_cdf.begin());
    if (t >= face_count) t = face_count - 1;
    double su = std::sqrt(rng.uniform01());
    double v = rng.uniform01();
    Vec3 bary(1.0 - su, su * (1.0 - v), su * v);
    const auto& f = mesh.faces[t];
    candidates[i].face = static_cast<int>(t);
    candidates[i].bary = bary;
    candidates[i].position = bary[0] * mesh.vertices[f[0]] + bary[1] * mesh.vertices[f[1]] +
                             bary[2] * mesh.vertices[f[2]];
  }

  // Farthest-point thinning: repeatedly promote the candidate farthest from
  // the chosen set; stop at target_count or when the best gap violates the
  // spacing floor.
  const double spacing =
      config.min_spacing_factor * std::sqrt(result.total_area / config.target_count);
  std::vector<double> dist2(candidate_count, std::numeric_limits<double>::infinity());
  int next_pick = 0;
  while (static_cast<int>(result.samples.size()) < config.target_count) {
    const Vec3& chosen = candidates[next_pick].position;
    result.samples.push_back(candidates[next_pick]);
    double best = -1.0;
    int best_at = -1;
    for (int i = 0; i < candidate_count; ++i) {
      dist2[i] = std::min(dist2[i], (candidates[i].position - chosen).squaredNorm());
      if (dist2[i] > best) {
        best = dist2[i];
        best_at = i;
      }
    }
    // Exact duplicates can never extend the set, even with a zero floor.
    if (best <= 0.0 || best < spacing * spacing) break;
    next_pick = best_at;
  }
  result.shortfall = config.target_count - static_cast<int>(result.samples.size());
  return result;
}

double mesh_area(const TriangleMesh& mesh) {
  double total = 0.0;
  for (const auto& f : mesh.faces) total += face_area(mesh, f);
  return total;
}

double nn_distance_cov(const std::vector<Vec3>& points) {
  if (points.size() < 2) return 0.0;
  KdTree tree(points);
  double sum = 0.0, sum2 = 0.0;
  for (size_t i = 0; i < points.size(); ++i) {
    double d = std::sqrt(tree.knn_excluding(points[i], 1, static_cast<int>(i))[0].dist2);
    sum += d;
    sum2 += d * d;
  }
  double n = static_cast<double>(points.size());
  double mean = sum / n;
  if (mean <= 0.0) return 0.0;
  double var = std::max(0.0, sum2 / n - mean * mean);
  return std::sqrt(var) / mean;
}

void save_obj(const TriangleMesh& mesh, const std::string& path) {
  std::ostringstream out;
  out.precision(17);
  for (const auto& v : mesh.vertices) {
    out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  }
  for (const auto& f : mesh.faces) {
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  }
  write_file_atomic(path, out.str());
}

}  // namespace gva
