#pragma once

#include <array>
#include <vector>

#include "core/common.hpp"

namespace gva {

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;

  void validate() const {
    int n = static_cast<int>(vertices.size());
    for (size_t i = 0; i < faces.size(); ++i) {
      for (int k = 0; k < 3; ++k) {
        if (faces[i][k] < 0 || faces[i][k] >= n) {
          throw InvalidArgumentError("mesh face " + std::to_string(i) + " references vertex " +
                                     std::to_string(faces[i][k]) + " out of range");
        }
      }
    }
  }
};

}  // namespace gva
