#include "core/mesh_render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gva {

std::vector<Vec3> vertex_normals(const TriangleMesh& mesh) {
  std::vector<Vec3> normals(mesh.vertices.size(), Vec3::Zero());
  for (const auto& f : mesh.faces) {
    const Vec3& a = mesh.vertices[f[0]];
    const Vec3& b = mesh.vertices[f[1]];
    const Vec3& c = mesh.vertices[f[2]];
    // Cross product length is twice the face area, so summing it weights
    // each face by area.
    const Vec3 n = (b - a).cross(c - a);
    normals[f[0]] += n;
    normals[f[1]] += n;
    normals[f[2]] += n;
  }
  for (Vec3& n : normals) {
    const double len = n.norm();
    n = len > 1e-12 ? Vec3(n / len) : Vec3::Zero();
  }
  return normals;
}

MeshRaster rasterize_mesh(const TriangleMesh& mesh, const Camera& cam) {
  cam.validate();
  mesh.validate();
  MeshRaster out;
  out.normals = NormalMap(cam.width, cam.height);
  out.silhouette = ImageGray(cam.width, cam.height);
  if (mesh.faces.empty()) return out;

  const std::vector<Vec3> smooth = vertex_normals(mesh);
  const Mat3 w = cam.rotation();
  const Vec3 t_wc = cam.translation();

  const size_t nv = mesh.vertices.size();
  std::vector<Vec3> cam_pos(nv);
  std::vector<Vec2> screen(nv);
  for (size_t i = 0; i < nv; ++i) {
    const Vec3 p = w * mesh.vertices[i] + t_wc;
    cam_pos[i] = p;
    if (p.z() > 0.0)
      screen[i] = Vec2(cam.fx * p.x() / p.z() + cam.cx, cam.fy * p.y() / p.z() + cam.cy);
  }

  std::vector<double> zbuf(static_cast<size_t>(cam.width) * cam.height,
                           std::numeric_limits<double>::infinity());

  for (size_t fi = 0; fi < mesh.faces.size(); ++fi) {
    const auto& f = mesh.faces[fi];
    const Vec3& p0 = cam_pos[f[0]];
    const Vec3& p1 = cam_pos[f[1]];
    const Vec3& p2 = cam_pos[f[2]];
    if (p0.z() < cam.near || p1.z() < cam.near || p2.z() < cam.near) continue;
    if (p0.z() > cam.far || p1.z() > cam.far || p2.z() > cam.far) continue;
    const Vec2& s0 = screen[f[0]];
    const Vec2& s1 = screen[f[1]];
    const Vec2& s2 = screen[f[2]];
    // Signed double area in screen space; degenerate slivers are dropped.
    const double area = (s1.x() - s0.x()) * (s2.y() - s0.y()) -
                        (s2.x() - s0.x()) * (s1.y() - s0.y());
    if (std::abs(area) < 1e-12) continue;

    const int x0 = std::max(0, static_cast<int>(std::floor(std::min({s0.x(), s1.x(), s2.x()}) - 0.5)));
    const int x1 = std::min(cam.width - 1,
                            static_cast<int>(std::ceil(std::max({s0.x(), s1.x(), s2.x()}) - 0.5)));
    const int y0 = std::max(0, static_cast<int>(std::floor(std::min({s0.y(), s1.y(), s2.y()}) - 0.5)));
    const int y1 = std::min(cam.height - 1,
                            static_cast<int>(std::ceil(std::max({s0.y(), s1.y(), s2.y()}) - 0.5)));
    if (x0 > x1 || y0 > y1) continue;

    const double inv_area = 1.0 / area;
    const double iz0 = 1.0 / p0.z(), iz1 = 1.0 / p1.z(), iz2 = 1.0 / p2.z();
    const Vec3 n0 = smooth[f[0]] * iz0;
    const Vec3 n1 = smooth[f[1]] * iz1;
    const Vec3 n2 = smooth[f[2]] * iz2;

    for (int py = y0; py <= y1; ++py) {
      for (int px = x0; px <= x1; ++px) {
        const double qx = px + 0.5, qy = py + 0.5;
        // Barycentric weights from sub-triangle areas; double-sided, so the
        // test is only that all three share the winding's sign.
        double b0 = ((s1.x() - qx) * (s2.y() - qy) - (s2.x() - qx) * (s1.y() - qy)) * inv_area;
        double b1 = ((s2.x() - qx) * (s0.y() - qy) - (s0.x() - qx) * (s2.y() - qy)) * inv_area;
        double b2 = ((s0.x() - qx) * (s1.y() - qy) - (s1.x() - qx) * (s0.y() - qy)) * inv_area;
        if (b0 < 0.0 || b1 < 0.0 || b2 < 0.0) continue;
        const double inv_z = b0 * iz0 + b1 * iz1 + b2 * iz2;
        const double z = 1.0 / inv_z;
        const size_t flat = static_cast<size_t>(py) * cam.width + px;
        if (!(z < zbuf[flat])) continue;  // ties keep the earlier face
        zbuf[flat] = z;
        Vec3 n = (b0 * n0 + b1 * n1 + b2 * n2) * z;  // perspective-correct
        n = w * n;                                   // into camera space
        const double len = n.norm();
        if (len > 1e-12) {
          out.normals.normals[flat] = n / len;
        } else {
          // Interpolation cancelled out; fall back to the face plane.
          Vec3 fn = w * (mesh.vertices[f[1]] - mesh.vertices[f[0]])
                        .cross(mesh.vertices[f[2]] - mesh.vertices[f[0]]);
          const double fl = fn.norm();
          out.normals.normals[flat] = fl > 1e-12 ? Vec3(fn / fl) : Vec3::Zero();
        }
        out.normals.coverage[flat] = 1;
        out.silhouette.data[flat] = 1.0;
      }
    }
  }
  return out;
}

double compare_normal_maps(const NormalMap& a, const NormalMap& b) {
  if (a.width != b.width || a.height != b.height)
    throw InvalidArgumentError("compare_normal_maps: dimension mismatch");
  double sum = 0.0;
  size_t union_count = 0;
  const size_t n = a.normals.size();
  for (size_t i = 0; i < n; ++i) {
    if (!a.coverage[i] && !b.coverage[i]) continue;
    ++union_count;
    sum += (a.normals[i] - b.normals[i]).cwiseAbs().sum();
  }
  if (union_count == 0) return 0.0;
  return sum / (3.0 * static_cast<double>(union_count));
}

ImageRGB encode_normal_map(const NormalMap& map) {
  ImageRGB out(map.width, map.height);
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      const Vec3 v = map.covered(x, y) ? Vec3(0.5 * (map.at(x, y).array() + 1.0)) : Vec3(0.5, 0.5, 0.5);
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = v(c);
    }
  }
  return out;
}

NormalMap decode_normal_map(const ImageRGB& image) {
  NormalMap map(image.width, image.height);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const Vec3 n(2.0 * image.at(x, y, 0) - 1.0, 2.0 * image.at(x, y, 1) - 1.0,
                   2.0 * image.at(x, y, 2) - 1.0);
      const double len = n.norm();
      if (len >= 0.1) {
        map.at(x, y) = n / len;
        map.coverage[map.flat(x, y)] = 1;
      }
    }
  }
  return map;
}

ImageGray decode_silhouette(const ImageGray& image) {
  ImageGray out(image.width, image.height);
  for (size_t i = 0; i < image.data.size(); ++i)
    out.data[i] = image.data[i] >= 128.0 / 255.0 ? 1.0 : 0.0;
  return out;
}

}  // namespace gva
