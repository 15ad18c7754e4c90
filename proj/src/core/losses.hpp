#pragma once

#include <vector>

#include "core/common.hpp"
#include "core/image.hpp"

namespace gva {

// Multi-scale image-gradient L1 distance: sum over 3 dyadic scales of the
// mean |forward-difference gradient difference| (both axes, all channels).
// This is a lightweight stand-in for a learned feature distance — it shares
// the DC-invariance and edge sensitivity, not the weights.
double perceptual_proxy(const ImageRGB& a, const ImageRGB& b);

struct RenderLossTerms {
  double total = 0.0;
  double l1 = 0.0;          // mean |C - I|
  double perceptual = 0.0;  // lambda3 * proxy, i.e. the weighted contribution
  double residual = 0.0;    // lambda4 * mean ||offset||_1
};

// Photometric training loss. d_rendered / d_offsets, when non-null, receive
// analytic dL/dC and dL/d(offset) (overwritten, not accumulated).
RenderLossTerms render_loss(const ImageRGB& rendered, const ImageRGB& target,
                            const std::vector<Vec3>& offsets, double lambda3, double lambda4,
                            ImageRGB* d_rendered, std::vector<Vec3>* d_offsets);

}  // namespace gva
