#pragma once

#include <string>

#include "core/gaussian_cloud.hpp"
#include "core/residual_net.hpp"

namespace gva {

// Cloud checkpoint, binary little-endian:
//   magic "GSAV" | version u32 (=1) | point count u64 | sh_degree u8
// then per point, f32 fields in declaration order:
//   mu[3] | q[4] (w,x,y,z) | s[3] | eta | f[(degree+1)^2 * 3] ([coeff][rgb])
// Round-trip through save/load is bit-exact.
void save_checkpoint(const GaussianCloud& cloud, const std::string& path);
GaussianCloud load_checkpoint(const std::string& path);

// Residual-net sidecar (written next to the cloud as <checkpoint>.mlp):
//   magic "GMLP" | version u32 (=1) | pose_dim u32 | hidden u32
// then f64 blobs: w1 row-major | b1 | w2 | b2 | w3 | b3.
void save_residual_net(const ResidualNet& net, const std::string& path);
ResidualNet load_residual_net(const std::string& path);

inline std::string residual_sidecar_path(const std::string& checkpoint_path) {
  return checkpoint_path + ".mlp";
}

}  // namespace gva
