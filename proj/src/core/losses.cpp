#include "core/losses.hpp"

#include <cmath>

namespace gva {

namespace {

constexpr int kScales = 3;

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

ImageRGB downsample2(const ImageRGB& img) {
  ImageRGB out(img.width / 2, img.height / 2);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        out.at(x, y, c) = 0.25 * (img.at(2 * x, 2 * y, c) + img.at(2 * x + 1, 2 * y, c) +
                                  img.at(2 * x, 2 * y + 1, c) + img.at(2 * x + 1, 2 * y + 1, c));
      }
    }
  }
  return out;
}

// Spread a coarse-level gradient back through the 2x2 box average.
void upsample_grad2(const ImageRGB& coarse, ImageRGB& fine) {
  for (int y = 0; y < coarse.height; ++y) {
    for (int x = 0; x < coarse.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        double g = 0.25 * coarse.at(x, y, c);
        fine.at(2 * x, 2 * y, c) += g;
        fine.at(2 * x + 1, 2 * y, c) += g;
        fine.at(2 * x, 2 * y + 1, c) += g;
        fine.at(2 * x + 1, 2 * y + 1, c) += g;
      }
    }
  }
}

// One scale of the gradient-L1 term; fills d_a (same dims as a) when asked.
double scale_term(const ImageRGB& a, const ImageRGB& b, ImageRGB* d_a) {
  size_t count = 0;
  if (a.width > 1) count += static_cast<size_t>(a.width - 1) * a.height * 3;
  if (a.height > 1) count += static_cast<size_t>(a.width) * (a.height - 1) * 3;
  if (count == 0) return 0.0;
  const double inv = 1.0 / static_cast<double>(count);

  double sum = 0.0;
  for (int y = 0; y < a.height; ++y) {
    for (int x = 0; x + 1 < a.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        double d = (a.at(x + 1, y, c) - a.at(x, y, c)) - (b.at(x + 1, y, c) - b.at(x, y, c));
        sum += std::abs(d);
        if (d_a) {
          double g = sign_of(d) * inv;
          d_a->at(x + 1, y, c) += g;
          d_a->at(x, y, c) -= g;
        }
      }
    }
  }
  for (int y = 0; y + 1 < a.height; ++y) {
    for (int x = 0; x < a.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        double d = (a.at(x, y + 1, c) - a.at(x, y, c)) - (b.at(x, y + 1, c) - b.at(x, y, c));
        sum += std::abs(d);
        if (d_a) {
          double g = sign_of(d) * inv;
          d_a->at(x, y + 1, c) += g;
          d_a->at(x, y, c) -= g;
        }
      }
    }
  }
  return sum * inv;
}

void check_dims(const ImageRGB& a, const ImageRGB& b, const char* who) {
  if (a.width != b.width || a.height != b.height || a.width <= 0 || a.height <= 0) {
    throw InvalidArgumentError(std::string(who) + ": image dimensions differ or are empty");
  }
}

// Shared by the public forward-only proxy and the fused loss backward.
double proxy_impl(const ImageRGB& a, const ImageRGB& b, ImageRGB* d_a) {
  std::vector<ImageRGB> pyr_a{a}, pyr_b{b};
  for (int s = 1; s < kScales; ++s) {
    if (pyr_a.back().width < 2 || pyr_a.back().height < 2) break;
    pyr_a.push_back(downsample2(pyr_a.back()));
    pyr_b.push_back(downsample2(pyr_b.back()));
  }

  double total = 0.0;
  std::vector<ImageRGB> grads;
  if (d_a) grads.resize(pyr_a.size());
  for (size_t s = 0; s < pyr_a.size(); ++s) {
    ImageRGB* g = nullptr;
    if (d_a) {
      grads[s] = ImageRGB(pyr_a[s].width, pyr_a[s].height);
      g = &grads[s];
    }
    total += scale_term(pyr_a[s], pyr_b[s], g);
  }
  if (d_a) {
    for (size_t s = pyr_a.size(); s-- > 1;) upsample_grad2(grads[s], grads[s - 1]);
    *d_a = std::move(grads[0]);
  }
  return total;
}

}  // namespace

double perceptual_proxy(const ImageRGB& a, const ImageRGB& b) {
  check_dims(a, b, "perceptual_proxy");
  return proxy_impl(a, b, nullptr);
}

RenderLossTerms render_loss(const ImageRGB& rendered, const ImageRGB& target,
                            const std::vector<Vec3>& offsets, double lambda3, double lambda4,
                            ImageRGB* d_rendered, std::vector<Vec3>* d_offsets) {
  check_dims(rendered, target, "render_loss");

  RenderLossTerms terms;
  const double inv_n = 1.0 / static_cast<double>(rendered.data.size());
  if (d_rendered) *d_rendered = ImageRGB(rendered.width, rendered.height);
  for (size_t i = 0; i < rendered.data.size(); ++i) {
    double d = rendered.data[i] - target.data[i];
    terms.l1 += std::abs(d);
    if (d_rendered) d_rendered->data[i] = sign_of(d) * inv_n;
  }
  terms.l1 *= inv_n;

  if (lambda3 != 0.0) {
    ImageRGB d_proxy;
    terms.perceptual = lambda3 * proxy_impl(rendered, target, d_rendered ? &d_proxy : nullptr);
    if (d_rendered) {
      for (size_t i = 0; i < d_rendered->data.size(); ++i) {
        d_rendered->data[i] += lambda3 * d_proxy.data[i];
      }
    }
  }

  if (d_offsets) d_offsets->assign(offsets.size(), Vec3::Zero());
  if (lambda4 != 0.0 && !offsets.empty()) {
    const double w = lambda4 / static_cast<double>(offsets.size());
    double sum = 0.0;
    for (size_t i = 0; i < offsets.size(); ++i) {
      sum += offsets[i].cwiseAbs().sum();
      if (d_offsets) {
        (*d_offsets)[i] =
            w * Vec3(sign_of(offsets[i].x()), sign_of(offsets[i].y()), sign_of(offsets[i].z()));
      }
    }
    terms.residual = w * sum;
  }

  terms.total = terms.l1 + terms.perceptual + terms.residual;
  return terms;
}

}  // namespace gva
