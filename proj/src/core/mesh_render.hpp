#pragma once

#include <vector>

#include "core/camera.hpp"
#include "core/common.hpp"
#include "core/image.hpp"
#include "core/mesh.hpp"

namespace gva {

// Camera-space normals where covered, (0,0,0) elsewhere.
struct NormalMap {
  int width = 0;
  int height = 0;
  std::vector<Vec3> normals;
  std::vector<uint8_t> coverage;

  NormalMap() = default;
  NormalMap(int w, int h)
      : width(w),
        height(h),
        normals(static_cast<size_t>(w) * h, Vec3::Zero()),
        coverage(static_cast<size_t>(w) * h, 0) {}

  size_t flat(int x, int y) const { return static_cast<size_t>(y) * width + x; }
  Vec3& at(int x, int y) { return normals[flat(x, y)]; }
  const Vec3& at(int x, int y) const { return normals[flat(x, y)]; }
  bool covered(int x, int y) const { return coverage[flat(x, y)] != 0; }
};

struct MeshRaster {
  NormalMap normals;
  ImageGray silhouette;  // 1 where covered, 0 elsewhere
};

// Area-weighted smooth vertex normals; zero for isolated vertices.
std::vector<Vec3> vertex_normals(const TriangleMesh& mesh);

// Z-buffers the mesh (double-sided, perspective-correct interpolation) into
// a camera-space normal map plus binary coverage silhouette. Depth ties keep
// the lower face index. Faces touching the near/far planes are dropped whole
// rather than clipped.
MeshRaster rasterize_mesh(const TriangleMesh& mesh, const Camera& cam);

// Mean absolute per-channel difference over the union of the two coverage
// masks; pixels covered by only one map compare against (0,0,0). Empty
// union -> 0.
double compare_normal_maps(const NormalMap& a, const NormalMap& b);

// 8-bit interchange: rgb = (n+1)/2 where covered, mid-gray elsewhere. The
// decoder treats |n| < 0.1 as uncovered and renormalizes the rest.
ImageRGB encode_normal_map(const NormalMap& map);
NormalMap decode_normal_map(const ImageRGB& image);

// Binary mask from an 8-bit grayscale: covered iff byte >= 128.
ImageGray decode_silhouette(const ImageGray& image);

}  // namespace gva
