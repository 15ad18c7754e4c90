#include "core/checkpoint.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "core/image.hpp"
#include "core/sh.hpp"

namespace gva {

namespace {

template <typename T>
void put(std::string& buf, T v) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  buf.append(bytes, sizeof(T));
}

struct Reader {
  const std::string& buf;
  const std::string& path;
  size_t pos = 0;

  template <typename T>
  T get(const char* what) {
    if (pos + sizeof(T) > buf.size()) {
      throw IoError(path + ": truncated while reading " + what);
    }
    T v;
    std::memcpy(&v, buf.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
  }

  double get_f32_checked(const char* what, size_t point) {
    float v = get<float>(what);
    if (!std::isfinite(v)) {
      throw IoError(path + ": non-finite " + what + " at point " + std::to_string(point));
    }
    return static_cast<double>(v);
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return buf;
}

void put_f32(std::string& buf, double v) { put(buf, static_cast<float>(v)); }

}  // namespace

void save_checkpoint(const GaussianCloud& cloud, const std::string& path) {
  cloud.check_consistent();
  std::string buf;
  buf.append("GSAV", 4);
  put<uint32_t>(buf, 1);
  put<uint64_t>(buf, cloud.points.size());
  put<uint8_t>(buf, static_cast<uint8_t>(cloud.sh_degree));
  for (const auto& p : cloud.points) {
    for (int i = 0; i < 3; ++i) put_f32(buf, p.mu[i]);
    for (int i = 0; i < 4; ++i) put_f32(buf, p.q[i]);
    for (int i = 0; i < 3; ++i) put_f32(buf, p.s[i]);
    put_f32(buf, p.eta);
    for (double c : p.f) put_f32(buf, c);
  }
  write_file_atomic(path, buf);
}

GaussianCloud load_checkpoint(const std::string& path) {
  std::string buf = slurp(path);
  Reader r{buf, path};
  if (buf.size() < 4 || buf.compare(0, 4, "GSAV") != 0) {
    throw IoError(path + ": bad magic, not a cloud checkpoint");
  }
  r.pos = 4;
  uint32_t version = r.get<uint32_t>("version");
  if (version != 1) throw IoError(path + ": unsupported checkpoint version " + std::to_string(version));
  uint64_t count = r.get<uint64_t>("point count");
  uint8_t degree = r.get<uint8_t>("sh degree");
  if (degree > kMaxShDegree) throw IoError(path + ": sh degree out of range");
  size_t n_coeff = static_cast<size_t>(sh_coeff_count(degree));
  size_t point_bytes = (3 + 4 + 3 + 1 + n_coeff * 3) * sizeof(float);
  size_t expect = r.pos + count * point_bytes;
  if (buf.size() != expect) {
    throw IoError(path + ": size mismatch, expected " + std::to_string(expect) + " bytes, got " +
                  std::to_string(buf.size()));
  }
  GaussianCloud cloud = make_cloud(degree, count);
  for (size_t i = 0; i < count; ++i) {
    auto& p = cloud.points[i];
    for (int k = 0; k < 3; ++k) p.mu[k] = r.get_f32_checked("mu", i);
    for (int k = 0; k < 4; ++k) p.q[k] = r.get_f32_checked("q", i);
    for (int k = 0; k < 3; ++k) p.s[k] = r.get_f32_checked("s", i);
    p.eta = r.get_f32_checked("eta", i);
    for (size_t k = 0; k < n_coeff * 3; ++k) p.f[k] = r.get_f32_checked("f", i);
  }
  return cloud;
}

namespace {

void put_matrix(std::string& buf, const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) put(buf, m(r, c));
  }
}

void get_matrix(Reader& r, Eigen::MatrixXd& m, const char* what) {
  for (Eigen::Index row = 0; row < m.rows(); ++row) {
    for (Eigen::Index col = 0; col < m.cols(); ++col) {
      double v = r.get<double>(what);
      if (!std::isfinite(v)) throw IoError(r.path + ": non-finite value in " + what);
      m(row, col) = v;
    }
  }
}

}  // namespace

void save_residual_net(const ResidualNet& net, const std::string& path) {
  std::string buf;
  buf.append("GMLP", 4);
  put<uint32_t>(buf, 1);
  put<uint32_t>(buf, static_cast<uint32_t>(net.pose_dim));
  put<uint32_t>(buf, static_cast<uint32_t>(ResidualNet::kHidden));
  put_matrix(buf, net.w1);
  put_matrix(buf, net.b1);
  put_matrix(buf, net.w2);
  put_matrix(buf, net.b2);
  put_matrix(buf, net.w3);
  put_matrix(buf, net.b3);
  write_file_atomic(path, buf);
}

ResidualNet load_residual_net(const std::string& path) {
  std::string buf = slurp(path);
  Reader r{buf, path};
  if (buf.size() < 4 || buf.compare(0, 4, "GMLP") != 0) {
    throw IoError(path + ": bad magic, not a residual-net file");
  }
  r.pos = 4;
  uint32_t version = r.get<uint32_t>("version");
  if (version != 1) throw IoError(path + ": unsupported residual-net version");
  uint32_t pose_dim = r.get<uint32_t>("pose dim");
  uint32_t hidden = r.get<uint32_t>("hidden width");
  if (hidden != ResidualNet::kHidden) throw IoError(path + ": unexpected hidden width");
  ResidualNet net;
  net.pose_dim = static_cast<int>(pose_dim);
  int d = net.input_dim(), h = ResidualNet::kHidden;
  net.w1.resize(h, d);
  net.b1.resize(h);
  net.w2.resize(h, h);
  net.b2.resize(h);
  net.w3.resize(3, h);
  net.b3.resize(3);
  get_matrix(r, net.w1, "w1");
  Eigen::MatrixXd tmp;
  tmp = net.b1;
  get_matrix(r, tmp, "b1");
  net.b1 = tmp;
  get_matrix(r, net.w2, "w2");
  tmp = net.b2;
  get_matrix(r, tmp, "b2");
  net.b2 = tmp;
  get_matrix(r, net.w3, "w3");
  tmp = net.b3;
  get_matrix(r, tmp, "b3");
  net.b3 = tmp;
  if (r.pos != buf.size()) throw IoError(path + ": trailing bytes");
  return net;
}

}  // namespace gva
