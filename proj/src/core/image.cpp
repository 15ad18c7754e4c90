#include "core/image.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace gva {

uint8_t quantize_u8(double v) {
  if (!(v > 0.0)) v = 0.0;  // also catches NaN
  if (v > 1.0) v = 1.0;
  return static_cast<uint8_t>(std::floor(v * 255.0 + 0.5));
}

void write_file_atomic(const std::string& path, const std::string& bytes) {
  std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for write: " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) throw IoError("rename failed for " + path + ": " + ec.message());
}

namespace {

// Reads one whitespace-delimited token, skipping '#' comments per the netpbm
// header grammar.
std::string next_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) continue;
    tok.push_back(static_cast<char>(c));
    while ((c = in.get()) != EOF && !std::isspace(c) && c != '#') tok.push_back(static_cast<char>(c));
    if (c == '#') in.unget();
    break;
  }
  return tok;
}

struct PnmHeader {
  std::string magic;
  int width = 0, height = 0, maxval = 0;
};

PnmHeader read_header(std::istream& in, const std::string& path) {
  PnmHeader h;
  h.magic = next_token(in);
  std::string w = next_token(in), ht = next_token(in), mv = next_token(in);
  try {
    h.width = std::stoi(w);
    h.height = std::stoi(ht);
    h.maxval = std::stoi(mv);
  } catch (const std::exception&) {
    throw IoError(path + ": malformed netpbm header");
  }
  if (h.width <= 0 || h.height <= 0) throw IoError(path + ": bad image dimensions");
  if (h.maxval != 255) throw IoError(path + ": only maxval 255 supported");
  return h;
}

std::vector<uint8_t> read_payload(std::istream& in, size_t n, const std::string& path) {
  std::vector<uint8_t> buf(n);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
  if (static_cast<size_t>(in.gcount()) != n) throw IoError(path + ": truncated pixel data");
  return buf;
}

}  // namespace

void write_ppm(const ImageRGB& img, const std::string& path) {
  if (img.width <= 0 || img.height <= 0) throw InvalidArgumentError("write_ppm: empty image");
  std::string bytes;
  char header[64];
  std::snprintf(header, sizeof(header), "P6\n%d %d\n255\n", img.width, img.height);
  bytes = header;
  bytes.reserve(bytes.size() + img.data.size());
  for (double v : img.data) bytes.push_back(static_cast<char>(quantize_u8(v)));
  write_file_atomic(path, bytes);
}

ImageRGB read_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  PnmHeader h = read_header(in, path);
  if (h.magic != "P6") throw IoError(path + ": expected P6, got '" + h.magic + "'");
  auto buf = read_payload(in, static_cast<size_t>(h.width) * h.height * 3, path);
  ImageRGB img(h.width, h.height);
  for (size_t i = 0; i < buf.size(); ++i) img.data[i] = buf[i] / 255.0;
  return img;
}

void write_pgm(const ImageGray& img, const std::string& path) {
  if (img.width <= 0 || img.height <= 0) throw InvalidArgumentError("write_pgm: empty image");
  std::string bytes;
  char header[64];
  std::snprintf(header, sizeof(header), "P5\n%d %d\n255\n", img.width, img.height);
  bytes = header;
  for (double v : img.data) bytes.push_back(static_cast<char>(quantize_u8(v)));
  write_file_atomic(path, bytes);
}

ImageGray read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  PnmHeader h = read_header(in, path);
  if (h.magic != "P5") throw IoError(path + ": expected P5, got '" + h.magic + "'");
  auto buf = read_payload(in, static_cast<size_t>(h.width) * h.height, path);
  ImageGray img(h.width, h.height);
  for (size_t i = 0; i < buf.size(); ++i) img.data[i] = buf[i] / 255.0;
  return img;
}

ImageGray read_gray_any(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  PnmHeader h = read_header(in, path);
  if (h.magic == "P5") {
    auto buf = read_payload(in, static_cast<size_t>(h.width) * h.height, path);
    ImageGray img(h.width, h.height);
    for (size_t i = 0; i < buf.size(); ++i) img.data[i] = buf[i] / 255.0;
    return img;
  }
  if (h.magic == "P6") {
    auto buf = read_payload(in, static_cast<size_t>(h.width) * h.height * 3, path);
    ImageGray img(h.width, h.height);
    for (size_t i = 0; i < img.data.size(); ++i) {
      img.data[i] = (buf[i * 3] + buf[i * 3 + 1] + buf[i * 3 + 2]) / (3.0 * 255.0);
    }
    return img;
  }
  throw IoError(path + ": expected P5 or P6, got '" + h.magic + "'");
}

}  // namespace gva
