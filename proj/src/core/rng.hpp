#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "core/common.hpp"

namespace gva {

// Deterministic random source. std::mt19937_64 is bit-exact across platforms,
// but the standard *distributions* are not, so every draw we need is spelled
// out here explicitly. All sampling in the library goes through this class;
// that is what makes fixed-seed runs bitwise reproducible.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Integer in [0, n). Rejection-free modulo bias is irrelevant at our n,
  // but rejection keeps it exact anyway.
  uint64_t uniform_index(uint64_t n);

  // Standard normal via Box-Muller (both values used, cached).
  double normal();

  Vec3 normal3() { return Vec3(normal(), normal(), normal()); }

  // Uniform rotation as (w, x, y, z), Shoemake's subgroup algorithm.
  Vec4 unit_quaternion();

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform_index(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace gva
