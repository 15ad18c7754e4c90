#include "core/metrics.hpp"

#include <cmath>
#include <limits>

#include "core/common.hpp"

namespace gva {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;  // (K1 * L)^2 with L = 1
constexpr double kC2 = 0.03 * 0.03;

void check_dims(const ImageRGB& a, const ImageRGB& b, const char* who) {
  if (a.width != b.width || a.height != b.height || a.width <= 0 || a.height <= 0) {
    throw InvalidArgumentError(std::string(who) + ": image dimensions differ or are empty");
  }
}

}  // namespace

double compute_psnr(const ImageRGB& a, const ImageRGB& b) {
  check_dims(a, b, "compute_psnr");
  double mse = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    double d = a.data[i] - b.data[i];
    mse += d * d;
  }
  mse /= static_cast<double>(a.data.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return -10.0 * std::log10(mse);
}

double compute_ssim(const ImageRGB& a, const ImageRGB& b) {
  check_dims(a, b, "compute_ssim");
  if (a.width < kWindow || a.height < kWindow) {
    throw InvalidArgumentError("compute_ssim: images smaller than the 11x11 window");
  }

  double kernel[kWindow];
  double ksum = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    double x = i - (kWindow - 1) / 2.0;
    kernel[i] = std::exp(-x * x / (2.0 * kSigma * kSigma));
    ksum += kernel[i];
  }
  for (double& k : kernel) k /= ksum;

  double channel_sum = 0.0;
  for (int c = 0; c < 3; ++c) {
    double ssim_sum = 0.0;
    size_t windows = 0;
    for (int y = 0; y + kWindow <= a.height; ++y) {
      for (int x = 0; x + kWindow <= a.width; ++x) {
        double mu_a = 0, mu_b = 0, aa = 0, bb = 0, ab = 0;
        for (int j = 0; j < kWindow; ++j) {
          for (int i = 0; i < kWindow; ++i) {
            double w = kernel[j] * kernel[i];
            double va = a.at(x + i, y + j, c);
            double vb = b.at(x + i, y + j, c);
            mu_a += w * va;
            mu_b += w * vb;
            aa += w * va * va;
            bb += w * vb * vb;
            ab += w * va * vb;
          }
        }
        double var_a = aa - mu_a * mu_a;
        double var_b = bb - mu_b * mu_b;
        double cov = ab - mu_a * mu_b;
        double num = (2.0 * mu_a * mu_b + kC1) * (2.0 * cov + kC2);
        double den = (mu_a * mu_a + mu_b * mu_b + kC1) * (var_a + var_b + kC2);
        ssim_sum += num / den;
        ++windows;
      }
    }
    channel_sum += ssim_sum / static_cast<double>(windows);
  }
  return channel_sum / 3.0;
}

}  // namespace gva
