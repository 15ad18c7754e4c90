#include "core/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "core/image.hpp"
#include "core/kdtree.hpp"
#include "core/quat.hpp"

namespace gva {

namespace {

constexpr double kPi = 3.14159265358979323846;

Mat4 rigid_transform(const Mat3& rot, const Vec3& trans) {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rot;
  m.topRightCorner<3, 1>() = trans;
  return m;
}

bool bitwise_equal(const Mat4& a, const Mat4& b) {
  return std::memcmp(a.data(), b.data(), sizeof(double) * 16) == 0;
}

}  // namespace

int SkeletonAsset::depth(int i) const {
  int d = 0;
  while (joints[i].parent >= 0) {
    i = joints[i].parent;
    ++d;
  }
  return d;
}

void SkeletonAsset::validate() const {
  if (joints.empty()) throw InvalidArgumentError("skeleton has no joints");
  if (joints[0].parent != -1) throw InvalidArgumentError("joint 0 must be the root (parent -1)");
  for (size_t i = 1; i < joints.size(); ++i) {
    const int p = joints[i].parent;
    if (p < 0)
      throw InvalidArgumentError("joint " + std::to_string(i) + " is a second root; exactly one root allowed");
    // Parents precede children, which rules out cycles.
    if (p >= static_cast<int>(i))
      throw InvalidArgumentError("joint " + std::to_string(i) + " has parent " + std::to_string(p) +
                                 "; parents must precede children");
  }
  for (size_t i = 0; i < joints.size(); ++i) {
    const double n = joints[i].rest_rotation.norm();
    if (!(std::abs(n - 1.0) < 1e-6))
      throw InvalidArgumentError("joint " + std::to_string(i) + " rest rotation is not a unit quaternion");
  }
  mesh.validate();
  if (skin_weights.size() != mesh.vertices.size())
    throw InvalidArgumentError("skin weight rows (" + std::to_string(skin_weights.size()) +
                               ") do not match vertex count (" + std::to_string(mesh.vertices.size()) + ")");
  for (size_t v = 0; v < skin_weights.size(); ++v) {
    const SkinRow& row = skin_weights[v];
    if (row.empty()) throw InvalidArgumentError("vertex " + std::to_string(v) + " has no skin weights");
    if (row.size() > 8)
      throw InvalidArgumentError("vertex " + std::to_string(v) + " has more than 8 skin weights");
    double sum = 0.0;
    int prev = -1;
    for (const auto& [j, w] : row) {
      if (j < 0 || j >= joint_count())
        throw InvalidArgumentError("vertex " + std::to_string(v) + " references invalid joint " +
                                   std::to_string(j));
      if (j <= prev)
        throw InvalidArgumentError("vertex " + std::to_string(v) + " skin weights not in ascending joint order");
      if (!(w >= 0.0) || !std::isfinite(w))
        throw InvalidArgumentError("vertex " + std::to_string(v) + " has a negative or non-finite skin weight");
      prev = j;
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-6)
      throw InvalidArgumentError("vertex " + std::to_string(v) + " skin weights sum to " +
                                 std::to_string(sum) + ", expected 1");
  }
}

Vec3 wrap_axis_angle(const Vec3& aa) {
  const double theta = aa.norm();
  if (theta <= kPi) return aa;
  // Reduce the magnitude mod 2*pi into (-pi, pi]; a negative result flips
  // the axis.
  double t = std::fmod(theta, 2.0 * kPi);
  if (t > kPi) t -= 2.0 * kPi;
  return aa * (t / theta);
}

Pose make_pose(std::vector<Vec3> joint_rotations, const Vec3& root_translation) {
  Pose pose;
  pose.joint_rotations = std::move(joint_rotations);
  for (Vec3& aa : pose.joint_rotations) {
    if (!aa.allFinite()) throw InvalidArgumentError("pose rotation is not finite");
    aa = wrap_axis_angle(aa);
  }
  if (!root_translation.allFinite()) throw InvalidArgumentError("pose translation is not finite");
  pose.root_translation = root_translation;
  return pose;
}

Pose zero_pose(int joint_count) {
  if (joint_count <= 0) throw InvalidArgumentError("joint count must be positive");
  Pose pose;
  pose.joint_rotations.assign(joint_count, Vec3::Zero());
  return pose;
}

Eigen::VectorXd flatten_pose(const Pose& pose) {
  Eigen::VectorXd flat(3 * static_cast<int>(pose.joint_rotations.size()));
  for (size_t i = 0; i < pose.joint_rotations.size(); ++i) flat.segment<3>(3 * i) = pose.joint_rotations[i];
  return flat;
}

JointTransforms forward_kinematics(const SkeletonAsset& asset, const Pose& pose) {
  const int k = asset.joint_count();
  if (static_cast<int>(pose.joint_rotations.size()) != k)
    throw InvalidArgumentError("pose has " + std::to_string(pose.joint_rotations.size()) +
                               " joint rotations, skeleton has " + std::to_string(k));
  JointTransforms out;
  out.canonical_to_posed.resize(k);
  static const Mat3 kIdentity3 = Mat3::Identity();
  for (int j = 0; j < k; ++j) {
    const Joint& joint = asset.joints[j];
    // Local motion: rotate about the joint's rest position, in its rest
    // frame. C = G * Rot(theta) * G^{-1} with G the canonical rest transform.
    Mat4 local;
    const Mat3 rot = axis_angle_to_mat(pose.joint_rotations[j]);
    if (std::memcmp(rot.data(), kIdentity3.data(), sizeof(double) * 9) == 0) {
      // Keep the zero pose exact instead of round-tripping through G.
      local = Mat4::Identity();
    } else {
      const Mat3 rg = quat_to_mat(quat_normalize(joint.rest_rotation));
      const Mat3 c_rot = rg * rot * rg.transpose();
      local = rigid_transform(c_rot, joint.rest_translation - c_rot * joint.rest_translation);
    }
    if (joint.parent < 0) {
      Mat4 root = local;
      root.topRightCorner<3, 1>() += pose.root_translation;
      out.canonical_to_posed[j] = root;
    } else {
      const Mat4& parent = out.canonical_to_posed[joint.parent];
      if (bitwise_equal(local, Mat4::Identity()))
        out.canonical_to_posed[j] = parent;
      else
        out.canonical_to_posed[j] = parent * local;
    }
  }
  return out;
}

std::vector<SkinRow> bind_skinning(const SkeletonAsset& asset, const std::vector<Vec3>& positions,
                                   int max_influences) {
  if (positions.empty()) throw InvalidArgumentError("bind_skinning: no positions");
  if (max_influences < 1) throw InvalidArgumentError("bind_skinning: need at least one influence");
  KdTree tree(asset.mesh.vertices);
  std::vector<SkinRow> out;
  out.reserve(positions.size());
  std::vector<std::pair<int, double>> by_weight;
  for (const Vec3& p : positions) {
    const int nearest = tree.knn(p, 1)[0].index;
    const SkinRow& src = asset.skin_weights[nearest];
    by_weight.assign(src.begin(), src.end());
    // Heavier weights first; ties keep the lower joint index.
    std::stable_sort(by_weight.begin(), by_weight.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    if (static_cast<int>(by_weight.size()) > max_influences) by_weight.resize(max_influences);
    double sum = 0.0;
    for (const auto& [j, w] : by_weight) sum += w;
    if (sum <= 0.0) throw InvalidArgumentError("bind_skinning: selected weights sum to zero");
    SkinRow row(by_weight.begin(), by_weight.end());
    std::sort(row.begin(), row.end());
    for (auto& [j, w] : row) w /= sum;
    out.push_back(std::move(row));
  }
  return out;
}

Mat4 blend_transform(const SkinRow& weights, const JointTransforms& transforms) {
  if (weights.empty()) throw InvalidArgumentError("blend_transform: empty weight row");
  const int k = static_cast<int>(transforms.canonical_to_posed.size());
  for (const auto& [j, w] : weights)
    if (j < 0 || j >= k) throw InvalidArgumentError("blend_transform: joint index out of range");
  const Mat4& first = transforms.canonical_to_posed[weights[0].first];
  bool all_same = true;
  for (size_t i = 1; i < weights.size(); ++i) {
    if (!bitwise_equal(first, transforms.canonical_to_posed[weights[i].first])) {
      all_same = false;
      break;
    }
  }
  // Weights sum to 1 only up to rounding; returning the shared transform
  // directly keeps rigid regions (and the zero pose) exact.
  if (all_same) return first;
  Mat4 blended = Mat4::Zero();
  for (const auto& [j, w] : weights) blended += w * transforms.canonical_to_posed[j];
  return blended;
}

TriangleMesh deform_mesh(const SkeletonAsset& asset, const Pose& pose) {
  const JointTransforms transforms = forward_kinematics(asset, pose);
  TriangleMesh out;
  out.faces = asset.mesh.faces;
  out.vertices.reserve(asset.mesh.vertices.size());
  for (size_t v = 0; v < asset.mesh.vertices.size(); ++v) {
    const Mat4 a = blend_transform(asset.skin_weights[v], transforms);
    const Vec3& p = asset.mesh.vertices[v];
    out.vertices.push_back(a.topLeftCorner<3, 3>() * p + a.topRightCorner<3, 1>());
  }
  return out;
}

namespace {

// ---- asset file I/O ----
// Line-oriented text format:
//   skeleton-asset v1
//   joints <K>
//   <name> <parent> <qw> <qx> <qy> <qz> <tx> <ty> <tz>      (K lines)
//   vertices <V>
//   <x> <y> <z>                                             (V lines)
//   faces <F>
//   <a> <b> <c>                                             (F lines)
//   skin_weights <M>
//   <vertex> <joint> <weight>                               (M lines)
// Blank lines and lines starting with '#' are ignored.

struct LineReader {
  std::istream& in;
  const std::string& path;
  int line_no = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw IoError(path + ":" + std::to_string(line_no) + ": " + msg);
  }

  // Next non-blank, non-comment line; false at EOF.
  bool next(std::string& line) {
    while (std::getline(in, line)) {
      ++line_no;
      const size_t start = line.find_first_not_of(" \t\r");
      if (start == std::string::npos || line[start] == '#') continue;
      return true;
    }
    return false;
  }

  std::istringstream require(const std::string& what) {
    std::string line;
    if (!next(line)) {
      ++line_no;
      fail("unexpected end of file, expected " + what);
    }
    return std::istringstream(line);
  }

  int read_count(const std::string& keyword) {
    std::istringstream ls = require("'" + keyword + " <count>'");
    std::string word;
    long long n = -1;
    if (!(ls >> word >> n) || word != keyword || n < 0)
      fail("expected '" + keyword + " <count>'");
    return static_cast<int>(n);
  }
};

}  // namespace

SkeletonAsset load_skeleton_asset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open skeleton asset: " + path);
  LineReader reader{in, path};

  {
    std::istringstream ls = reader.require("header");
    std::string magic, version;
    ls >> magic >> version;
    if (magic != "skeleton-asset" || version != "v1")
      reader.fail("not a skeleton-asset v1 file");
  }

  SkeletonAsset asset;
  const int k = reader.read_count("joints");
  if (k < 1) reader.fail("skeleton needs at least one joint");
  asset.joints.resize(k);
  for (int j = 0; j < k; ++j) {
    std::istringstream ls = reader.require("joint line");
    Joint& joint = asset.joints[j];
    if (!(ls >> joint.name >> joint.parent >> joint.rest_rotation(0) >> joint.rest_rotation(1) >>
          joint.rest_rotation(2) >> joint.rest_rotation(3) >> joint.rest_translation(0) >>
          joint.rest_translation(1) >> joint.rest_translation(2)))
      reader.fail("malformed joint line (want: name parent qw qx qy qz tx ty tz)");
  }

  const int v = reader.read_count("vertices");
  asset.mesh.vertices.resize(v);
  for (int i = 0; i < v; ++i) {
    std::istringstream ls = reader.require("vertex line");
    Vec3& p = asset.mesh.vertices[i];
    if (!(ls >> p(0) >> p(1) >> p(2))) reader.fail("malformed vertex line (want: x y z)");
  }

  const int f = reader.read_count("faces");
  asset.mesh.faces.resize(f);
  for (int i = 0; i < f; ++i) {
    std::istringstream ls = reader.require("face line");
    auto& face = asset.mesh.faces[i];
    if (!(ls >> face[0] >> face[1] >> face[2])) reader.fail("malformed face line (want: a b c)");
  }

  const int m = reader.read_count("skin_weights");
  asset.skin_weights.assign(v, {});
  for (int i = 0; i < m; ++i) {
    std::istringstream ls = reader.require("skin weight line");
    int vert = -1, joint = -1;
    double w = 0.0;
    if (!(ls >> vert >> joint >> w)) reader.fail("malformed skin weight line (want: vertex joint weight)");
    if (vert < 0 || vert >= v) reader.fail("skin weight vertex index out of range");
    if (joint < 0 || joint >= k) reader.fail("skin weight joint index out of range");
    asset.skin_weights[vert].emplace_back(joint, w);
  }
  for (auto& row : asset.skin_weights) std::sort(row.begin(), row.end());

  try {
    asset.validate();
  } catch (const InvalidArgumentError& e) {
    throw IoError(path + ": " + e.what());
  }
  return asset;
}

void save_skeleton_asset(const SkeletonAsset& asset, const std::string& path) {
  asset.validate();
  for (const Joint& joint : asset.joints) {
    if (joint.name.empty() || joint.name.find_first_of(" \t\r\n#") != std::string::npos)
      throw InvalidArgumentError("joint name '" + joint.name + "' is empty or contains whitespace");
  }
  std::ostringstream out;
  out << std::setprecision(17);
  out << "skeleton-asset v1\n";
  out << "joints " << asset.joint_count() << "\n";
  for (const Joint& j : asset.joints) {
    out << j.name << " " << j.parent;
    for (int i = 0; i < 4; ++i) out << " " << j.rest_rotation(i);
    for (int i = 0; i < 3; ++i) out << " " << j.rest_translation(i);
    out << "\n";
  }
  out << "vertices " << asset.mesh.vertices.size() << "\n";
  for (const Vec3& p : asset.mesh.vertices) out << p(0) << " " << p(1) << " " << p(2) << "\n";
  out << "faces " << asset.mesh.faces.size() << "\n";
  for (const auto& f : asset.mesh.faces) out << f[0] << " " << f[1] << " " << f[2] << "\n";
  size_t total = 0;
  for (const SkinRow& row : asset.skin_weights) total += row.size();
  out << "skin_weights " << total << "\n";
  for (size_t v = 0; v < asset.skin_weights.size(); ++v)
    for (const auto& [j, w] : asset.skin_weights[v]) out << v << " " << j << " " << w << "\n";
  write_file_atomic(path, out.str());
}

}  // namespace gva
