#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/common.hpp"

namespace gva {

// Images are double-precision in [0, 1] everywhere inside the library; 8-bit
// quantization happens only at the file boundary (binary PPM/PGM, maxval 255,
// byte = round(clamp(v,0,1) * 255), decode = byte / 255).
struct ImageRGB {
  int width = 0;
  int height = 0;
  std::vector<double> data;  // interleaved rgb, row-major

  ImageRGB() = default;
  ImageRGB(int w, int h) : width(w), height(h), data(static_cast<size_t>(w) * h * 3, 0.0) {}

  double& at(int x, int y, int c) { return data[(static_cast<size_t>(y) * width + x) * 3 + c]; }
  double at(int x, int y, int c) const { return data[(static_cast<size_t>(y) * width + x) * 3 + c]; }
  size_t pixel_count() const { return static_cast<size_t>(width) * height; }
};

struct ImageGray {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  ImageGray() = default;
  ImageGray(int w, int h) : width(w), height(h), data(static_cast<size_t>(w) * h, 0.0) {}

  double& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
  double at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
};

uint8_t quantize_u8(double v);

// Binary PPM (P6) and PGM (P5). write_ppm/write_pgm write atomically
// (temp file + rename). Round-trip through u8 is bit-exact on the bytes.
void write_ppm(const ImageRGB& img, const std::string& path);
ImageRGB read_ppm(const std::string& path);
void write_pgm(const ImageGray& img, const std::string& path);
ImageGray read_pgm(const std::string& path);

// Reads either P5 or P6; P6 is converted by channel mean (used for
// silhouette files that some tools emit as RGB).
ImageGray read_gray_any(const std::string& path);

// Atomic byte-blob write shared by all file writers.
void write_file_atomic(const std::string& path, const std::string& bytes);

}  // namespace gva
