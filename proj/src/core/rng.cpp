#include "core/rng.hpp"

#include <cmath>

namespace gva {

uint64_t Rng::uniform_index(uint64_t n) {
  if (n == 0) throw InvalidArgumentError("uniform_index: n must be positive");
  uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1, u2;
  do {
    u1 = uniform01();
  } while (u1 <= 0.0);
  u2 = uniform01();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * M_PI * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

Vec4 Rng::unit_quaternion() {
  double u1 = uniform01();
  double u2 = uniform01();
  double u3 = uniform01();
  double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
  double t2 = 2.0 * M_PI * u2, t3 = 2.0 * M_PI * u3;
  // (w, x, y, z)
  return Vec4(b * std::cos(t3), a * std::sin(t2), a * std::cos(t2), b * std::sin(t3));
}

}  // namespace gva
