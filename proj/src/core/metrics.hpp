#pragma once

#include "core/image.hpp"

namespace gva {

// 10*log10(1/MSE) over all pixels and channels; identical images give +inf.
// Inputs are expected in [0,1].
double compute_psnr(const ImageRGB& a, const ImageRGB& b);

// SSIM with an 11x11 Gaussian window (sigma 1.5), K1=0.01, K2=0.03, dynamic
// range 1. Windows fully inside the image only; mean over the three channels.
double compute_ssim(const ImageRGB& a, const ImageRGB& b);

}  // namespace gva
