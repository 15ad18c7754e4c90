#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "core/config.hpp"
#include "core/dataset.hpp"
#include "core/gaussian_cloud.hpp"
#include "core/residual_net.hpp"
#include "core/skeleton.hpp"

namespace gva {

// Area-weighted random surface samples on the asset mesh, gray color, shared
// opacity, scales from the local 3-nearest sample spacing.
GaussianCloud init_cloud_from_asset(const SkeletonAsset& asset, int count, int sh_degree,
                                    double init_opacity, Rng& rng);

// Full inference path: skin-bind the canonical means, FK the pose, deform,
// rasterize. Binding is recomputed per call.
ImageRGB render_avatar(const GaussianCloud& cloud, const ResidualNet& net,
                       const SkeletonAsset& asset, const Pose& pose, const Camera& cam);

struct TrainResult {
  GaussianCloud cloud;
  ResidualNet net;
  std::vector<std::string> metrics_lines;  // JSONL: steps, events, eval rows
};

// steps of Adam over (mu, q, s, eta, f, residual net) with periodic
// densification and scheduled surface re-initialization. Deterministic for a
// fixed config; echo (optional) receives each metrics line as it is logged.
TrainResult train_avatar(const Dataset& dataset, const SkeletonAsset& asset,
                         const GaussianCloud& initial, const TrainConfig& config,
                         std::ostream* echo = nullptr);

}  // namespace gva
