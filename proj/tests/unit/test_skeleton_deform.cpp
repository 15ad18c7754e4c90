#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/deform.hpp"
#include "core/quat.hpp"
#include "core/residual_net.hpp"
#include "core/sh.hpp"
#include "core/skeleton.hpp"
#include "test_support.hpp"

using namespace gva;
using namespace gva::test;

namespace {

Vec3 transform_point(const Mat4& m, const Vec3& p) {
  return m.topLeftCorner<3, 3>() * p + m.topRightCorner<3, 1>();
}

SkeletonAsset two_joint_chain() {
  SkeletonAsset asset;
  Joint root;
  root.name = "root";
  Joint child;
  child.name = "child";
  child.parent = 0;
  child.rest_translation = Vec3(1, 0, 0);
  asset.joints = {root, child};
  asset.mesh.vertices = {Vec3(0, 0, 0), Vec3(2, 0, 0)};
  asset.skin_weights = {{{0, 1.0}}, {{1, 1.0}}};
  return asset;
}

GaussianCloud cloud_at(const std::vector<Vec3>& mus, Rng& rng) {
  GaussianCloud cloud = make_cloud(0);
  for (const Vec3& mu : mus) {
    GaussianPoint p;
    p.mu = mu;
    p.q = rng.unit_quaternion();
    p.s = Vec3(-2.0, -2.3, -2.6);
    p.eta = 0.4;
    p.f = {0.1, 0.2, 0.3};
    cloud.points.push_back(p);
  }
  cloud.reset_grad_accum();
  return cloud;
}

std::vector<Mat4> rigid_blend(const SkeletonAsset& asset, const std::vector<Vec3>& mus,
                              const Pose& pose) {
  JointTransforms jt = forward_kinematics(asset, pose);
  std::vector<SkinRow> rows = bind_skinning(asset, mus, 4);
  std::vector<Mat4> blended;
  for (const SkinRow& row : rows) blended.push_back(blend_transform(row, jt));
  return blended;
}

}  // namespace

TEST_CASE("axis-angle wrapping keeps the rotation and shrinks the magnitude") {
  Vec3 big(0, 0, 1.5 * M_PI);
  Vec3 wrapped = wrap_axis_angle(big);
  CHECK(wrapped.norm() <= M_PI + 1e-12);
  CHECK((axis_angle_to_mat(big) - axis_angle_to_mat(wrapped)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(wrap_axis_angle(Vec3::Zero()) == Vec3::Zero());
  Vec3 small(0.1, -0.2, 0.3);
  CHECK((wrap_axis_angle(small) - small).norm() == 0.0);
}

TEST_CASE("zero pose gives exact identity transforms") {
  SkeletonAsset figure = make_capsule_figure();
  JointTransforms jt = forward_kinematics(figure, zero_pose(figure.joint_count()));
  for (const Mat4& m : jt.canonical_to_posed) {
    CHECK((m - Mat4::Identity()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("root translation carries every joint rigidly") {
  SkeletonAsset chain = two_joint_chain();
  Pose pose = zero_pose(2);
  pose.root_translation = Vec3(0.5, -1.0, 2.0);
  JointTransforms jt = forward_kinematics(chain, pose);
  for (const Mat4& m : jt.canonical_to_posed) {
    CHECK((m.topLeftCorner<3, 3>() - Mat3::Identity()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((m.topRightCorner<3, 1>() - pose.root_translation).norm() == 0.0);
  }
}

TEST_CASE("child joint rotation pivots about the child rest position") {
  SkeletonAsset chain = two_joint_chain();
  Pose pose = make_pose({Vec3::Zero(), Vec3(0, 0, M_PI / 2)}, Vec3::Zero());
  JointTransforms jt = forward_kinematics(chain, pose);
  Vec3 moved = transform_point(jt.canonical_to_posed[1], Vec3(2, 0, 0));
  CHECK((moved - Vec3(1, 1, 0)).norm() < 1e-12);
  // The parent transform stays identity.
  CHECK((jt.canonical_to_posed[0] - Mat4::Identity()).cwiseAbs().maxCoeff() < 1e-15);

  Pose bad = zero_pose(3);
  CHECK_THROWS_AS(forward_kinematics(chain, bad), InvalidArgumentError);
}

TEST_CASE("joint depth walks the parent chain") {
  SkeletonAsset figure = make_capsule_figure();
  CHECK(figure.depth(0) == 0);  // root
  CHECK(figure.depth(1) == 1);  // spine
  CHECK(figure.depth(2) == 2);  // head
  CHECK(figure.depth(3) == 2);  // arm_l
}

TEST_CASE("skinning binds to the nearest vertex with top-P renormalization") {
  SkeletonAsset asset;
  for (int j = 0; j < 5; ++j) {
    Joint joint;
    joint.name = "j" + std::to_string(j);
    joint.parent = j == 0 ? -1 : j - 1;
    joint.rest_translation = j == 0 ? Vec3::Zero() : Vec3(0, 0.1, 0);
    asset.joints.push_back(joint);
  }
  asset.mesh.vertices = {Vec3(0, 0, 0), Vec3(4, 0, 0)};
  asset.skin_weights = {
      {{0, 0.5}, {1, 0.3}, {2, 0.15}, {3, 0.04}, {4, 0.01}},
      {{2, 1.0}},
  };

  auto rows = bind_skinning(asset, {Vec3(0.01, 0, 0), Vec3(3.9, 0, 0)}, 4);
  REQUIRE(rows.size() == 2);
  REQUIRE(rows[0].size() == 4);  // smallest influence dropped
  CHECK(rows[0][0].first == 0);
  CHECK(rows[0][0].second == doctest::Approx(0.5 / 0.99).epsilon(1e-12));
  CHECK(rows[0][1].second == doctest::Approx(0.3 / 0.99).epsilon(1e-12));
  CHECK(rows[0][2].second == doctest::Approx(0.15 / 0.99).epsilon(1e-12));
  CHECK(rows[0][3].second == doctest::Approx(0.04 / 0.99).epsilon(1e-12));
  double sum = 0.0;
  for (auto& [joint, w] : rows[0]) sum += w;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  REQUIRE(rows[1].size() == 1);
  CHECK(rows[1][0].first == 2);
  CHECK(rows[1][0].second == 1.0);

  CHECK_THROWS_AS(bind_skinning(asset, {}, 4), InvalidArgumentError);
}

TEST_CASE("single-joint assets give unit weight everywhere") {
  SkeletonAsset asset = make_single_joint_asset(make_icosphere(1, 1.0));
  Rng rng(3);
  std::vector<Vec3> queries;
  for (int i = 0; i < 20; ++i) queries.push_back(rng.normal3());
  for (const SkinRow& row : bind_skinning(asset, queries, 4)) {
    REQUIRE(row.size() == 1);
    CHECK(row[0].first == 0);
    CHECK(row[0].second == 1.0);
  }
}

TEST_CASE("blending returns single or identical transforms untouched") {
  JointTransforms jt;
  Mat4 a = Mat4::Identity();
  a(0, 3) = 0.123456789123456789;
  a(1, 1) = std::cos(0.3);
  jt.canonical_to_posed = {a, a, Mat4::Identity()};

  Mat4 single = blend_transform({{0, 1.0}}, jt);
  CHECK(std::memcmp(single.data(), a.data(), sizeof(double) * 16) == 0);
  Mat4 pair = blend_transform({{0, 0.5}, {1, 0.5}}, jt);
  CHECK(std::memcmp(pair.data(), a.data(), sizeof(double) * 16) == 0);

  Mat4 translate = Mat4::Identity();
  translate(0, 3) = 2.0;
  jt.canonical_to_posed = {Mat4::Identity(), translate};
  Mat4 mixed = blend_transform({{0, 0.5}, {1, 0.5}}, jt);
  CHECK((mixed.topLeftCorner<3, 3>() - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((mixed.topRightCorner<3, 1>() - Vec3(1, 0, 0)).norm() < 1e-15);
}

TEST_CASE("mesh deformation reproduces rest and rigid cases") {
  SkeletonAsset cube = make_single_joint_asset(make_grid_mesh(3, 3));
  TriangleMesh rest = deform_mesh(cube, zero_pose(1));
  for (size_t i = 0; i < rest.vertices.size(); ++i) {
    CHECK(rest.vertices[i] == cube.mesh.vertices[i]);  // bitwise rest pose
  }

  Pose shift = zero_pose(1);
  shift.root_translation = Vec3(1, 2, 3);
  TriangleMesh moved = deform_mesh(cube, shift);
  for (size_t i = 0; i < moved.vertices.size(); ++i) {
    CHECK((moved.vertices[i] - (cube.mesh.vertices[i] + Vec3(1, 2, 3))).norm() < 1e-15);
  }

  Pose quarter = make_pose({Vec3(0, 0, M_PI / 2)}, Vec3::Zero());
  TriangleMesh rotated = deform_mesh(cube, quarter);
  for (const auto& f : cube.mesh.faces) {
    for (int k = 0; k < 3; ++k) {
      double before = (cube.mesh.vertices[f[k]] - cube.mesh.vertices[f[(k + 1) % 3]]).norm();
      double after = (rotated.vertices[f[k]] - rotated.vertices[f[(k + 1) % 3]]).norm();
      CHECK(std::abs(before - after) < 1e-9);
    }
  }
  CHECK((rotated.vertices[1] - axis_angle_to_mat(Vec3(0, 0, M_PI / 2)) * cube.mesh.vertices[1])
            .norm() < 1e-12);
}

TEST_CASE("identity deformation leaves positions bitwise untouched") {
  Rng rng(17);
  SkeletonAsset asset = make_single_joint_asset(make_icosphere(1, 0.5));
  GaussianCloud cloud = cloud_at({Vec3(0.1, 0.2, 0.3), Vec3(-0.4, 0, 0.2), Vec3(0, 0, 0)}, rng);
  ResidualNet net = make_residual_net(asset.joint_count(), rng);
  Pose rest = zero_pose(1);
  std::vector<Vec3> mus;
  for (const auto& p : cloud.points) mus.push_back(p.mu);

  DeformResult fwd = deform_gaussians(cloud, rigid_blend(asset, mus, rest), net, rest);
  for (size_t i = 0; i < cloud.size(); ++i) {
    CHECK(fwd.posed.points[i].mu == cloud.points[i].mu);
    CHECK(fwd.rigid_identity[i] == 1);
    CHECK(fwd.offsets[i] == Vec3::Zero());  // zero-initialized output layer
    CHECK(fwd.posed.points[i].s == cloud.points[i].s);
    CHECK(fwd.posed.points[i].eta == cloud.points[i].eta);
  }
  // The canonical cloud itself is untouched.
  CHECK(cloud.points[0].mu == Vec3(0.1, 0.2, 0.3));
}

TEST_CASE("single-joint deformation is rigid across random poses") {
  Rng rng(29);
  SkeletonAsset asset = make_single_joint_asset(make_icosphere(1, 0.5));
  std::vector<Vec3> mus;
  for (int i = 0; i < 12; ++i) mus.push_back(rng.normal3() * 0.4);
  GaussianCloud cloud = cloud_at(mus, rng);
  ResidualNet net = make_residual_net(asset.joint_count(), rng);

  for (int trial = 0; trial < 20; ++trial) {
    Vec3 aa = rng.normal3();
    aa = aa.normalized() * rng.uniform(0.0, M_PI);
    Pose pose = make_pose({aa}, rng.normal3() * 0.5);
    DeformResult fwd = deform_gaussians(cloud, rigid_blend(asset, mus, pose), net, pose);
    for (size_t i = 0; i < mus.size(); ++i) {
      for (size_t j = i + 1; j < mus.size(); ++j) {
        double before = (mus[i] - mus[j]).norm();
        double after = (fwd.posed.points[i].mu - fwd.posed.points[j].mu).norm();
        CHECK(std::abs(before - after) < 1e-9);
      }
      CHECK(std::abs(fwd.posed.points[i].q.norm() - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("pure translation shifts positions and keeps rotations") {
  Rng rng(31);
  SkeletonAsset asset = make_single_joint_asset(make_icosphere(1, 0.5));
  std::vector<Vec3> mus = {Vec3(0.2, 0, 0), Vec3(0, 0.3, -0.1)};
  GaussianCloud cloud = cloud_at(mus, rng);
  ResidualNet net = make_residual_net(asset.joint_count(), rng);
  Pose pose = zero_pose(1);
  pose.root_translation = Vec3(3, -2, 1);

  DeformResult fwd = deform_gaussians(cloud, rigid_blend(asset, mus, pose), net, pose);
  for (size_t i = 0; i < mus.size(); ++i) {
    CHECK((fwd.posed.points[i].mu - (mus[i] + pose.root_translation)).norm() < 1e-12);
    Vec4 q_hat = quat_normalize(cloud.points[i].q);
    CHECK((fwd.posed.points[i].q - q_hat).norm() < 1e-12);
  }
}

TEST_CASE("deformation is equivariant to global rotation") {
  Rng rng(37);
  SkeletonAsset asset = make_single_joint_asset(make_icosphere(1, 0.5));
  std::vector<Vec3> mus;
  for (int i = 0; i < 8; ++i) mus.push_back(rng.normal3() * 0.4);
  GaussianCloud cloud = cloud_at(mus, rng);
  ResidualNet net = make_residual_net(asset.joint_count(), rng);

  for (int trial = 0; trial < 20; ++trial) {
    Vec4 q = rng.unit_quaternion();
    Mat3 r = quat_to_mat(q);
    Vec3 aa;
    double angle = 2.0 * std::acos(std::clamp(std::abs(q[0]), -1.0, 1.0));
    Vec3 axis = q.tail<3>().norm() > 1e-12 ? Vec3(q.tail<3>().normalized()) : Vec3(1, 0, 0);
    aa = axis * angle * (q[0] >= 0 ? 1.0 : -1.0);
    Pose pose = make_pose({aa}, Vec3::Zero());
    DeformResult fwd = deform_gaussians(cloud, rigid_blend(asset, mus, pose), net, pose);
    for (size_t i = 0; i < mus.size(); ++i) {
      CHECK((fwd.posed.points[i].mu - r * mus[i]).norm() < 1e-9);
    }
  }
}

TEST_CASE("fresh residual nets output zero and fixed nets reproduce") {
  Rng rng(5);
  ResidualNet net = make_residual_net(2, rng);
  CHECK(net.pose_dim == 6);
  CHECK(net.w3.cwiseAbs().maxCoeff() == 0.0);
  CHECK(net.b3.cwiseAbs().maxCoeff() == 0.0);
  CHECK(net.w1.cwiseAbs().maxCoeff() > 0.0);

  Eigen::VectorXd pose_flat = Eigen::VectorXd::Zero(6);
  pose_flat << 0.1, -0.2, 0.3, 0.0, 0.5, -0.1;
  ResidualTape tape = residual_forward(net, {Vec3(0.3, 0.1, -0.2)}, pose_flat);
  CHECK(tape.offsets[0] == Vec3::Zero());

  Rng rng_a(5), rng_b(5);
  ResidualNet a = make_residual_net(2, rng_a);
  ResidualNet b = make_residual_net(2, rng_b);
  CHECK((a.w1 - b.w1).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.w2 - b.w2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("residual network gradients pass a full finite-difference check") {
  Rng rng(7);
  ResidualNet net = make_residual_net(2, rng);
  net.w3 = 0.3 * Eigen::MatrixXd::Random(3, ResidualNet::kHidden);
  net.b3 = 0.1 * Eigen::VectorXd::Random(3);

  std::vector<Vec3> mus = {Vec3(0.2, -0.1, 0.4), Vec3(-0.3, 0.5, 0.0), Vec3(0.1, 0.1, 0.1)};
  Eigen::VectorXd pose_flat(6);
  pose_flat << 0.4, -0.2, 0.1, 0.7, 0.0, -0.5;
  std::vector<Vec3> d_offsets = {Vec3(1.0, -0.5, 0.25), Vec3(0.3, 0.7, -0.2),
                                 Vec3(-0.6, 0.1, 0.9)};

  auto loss = [&](const ResidualNet& n) {
    ResidualTape t = residual_forward(n, mus, pose_flat);
    double total = 0.0;
    for (size_t i = 0; i < mus.size(); ++i) total += t.offsets[i].dot(d_offsets[i]);
    return total;
  };

  ResidualTape tape = residual_forward(net, mus, pose_flat);
  ResidualGrads grads = residual_backward(net, tape, d_offsets);

  const double h = 1e-5;
  double worst = 0.0;
  auto check_block = [&](Eigen::MatrixXd& param, const Eigen::MatrixXd& grad) {
    REQUIRE(param.rows() == grad.rows());
    REQUIRE(param.cols() == grad.cols());
    for (Eigen::Index idx = 0; idx < param.size(); ++idx) {
      double saved = param.data()[idx];
      param.data()[idx] = saved + h;
      double up = loss(net);
      param.data()[idx] = saved - h;
      double down = loss(net);
      param.data()[idx] = saved;
      double fd = (up - down) / (2 * h);
      double analytic = grad.data()[idx];
      double diff = std::abs(fd - analytic);
      if (diff > 1e-10) {
        worst = std::max(worst, diff / std::max(std::abs(fd), std::abs(analytic)));
      }
    }
  };
  check_block(net.w1, grads.d_w1);
  check_block(net.w2, grads.d_w2);
  check_block(net.w3, grads.d_w3);
  Eigen::MatrixXd b1m = net.b1, b2m = net.b2, b3m = net.b3;
  check_block(b1m, grads.d_b1);
  net.b1 = b1m;
  check_block(b2m, grads.d_b2);
  net.b2 = b2m;
  check_block(b3m, grads.d_b3);
  net.b3 = b3m;
  INFO("worst relative error ", worst);
  CHECK(worst < 1e-5);

  // Input-position gradients through the same loss.
  for (size_t i = 0; i < mus.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      Vec3 saved = mus[i];
      mus[i][c] = saved[c] + h;
      double up = loss(net);
      mus[i][c] = saved[c] - h;
      double down = loss(net);
      mus[i] = saved;
      double fd = (up - down) / (2 * h);
      double diff = std::abs(fd - grads.d_mu[i][c]);
      if (diff > 1e-10) {
        CHECK(diff / std::max(std::abs(fd), std::abs(grads.d_mu[i][c])) < 1e-5);
      }
    }
  }
}

TEST_CASE("residual backward is linear and guards its tape") {
  Rng rng(9);
  ResidualNet net = make_residual_net(1, rng);
  net.w3 = 0.2 * Eigen::MatrixXd::Random(3, ResidualNet::kHidden);
  Eigen::VectorXd pose_flat = Eigen::VectorXd::Constant(3, 0.2);
  std::vector<Vec3> mus = {Vec3(0.1, 0.2, 0.3), Vec3(-0.2, 0.0, 0.4)};
  ResidualTape tape = residual_forward(net, mus, pose_flat);

  ResidualGrads zero = residual_backward(net, tape, {Vec3::Zero(), Vec3::Zero()});
  CHECK(zero.d_w1.cwiseAbs().maxCoeff() == 0.0);
  CHECK(zero.d_w3.cwiseAbs().maxCoeff() == 0.0);

  // Sum over points equals the sum of per-point gradients.
  Vec3 g0(0.5, -0.1, 0.2), g1(-0.3, 0.4, 0.1);
  ResidualGrads both = residual_backward(net, tape, {g0, g1});
  ResidualGrads first = residual_backward(net, tape, {g0, Vec3::Zero()});
  ResidualGrads second = residual_backward(net, tape, {Vec3::Zero(), g1});
  CHECK((both.d_w2 - first.d_w2 - second.d_w2).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((both.d_b1 - first.d_b1 - second.d_b1).cwiseAbs().maxCoeff() < 1e-12);

  ResidualTape blank;
  CHECK_THROWS_AS(residual_backward(net, blank, {Vec3::Zero()}), StateError);
  CHECK_THROWS_AS(residual_backward(net, tape, {Vec3::Zero()}), InvalidArgumentError);
}

TEST_CASE("deformation backward matches finite differences") {
  Rng rng(43);
  SkeletonAsset arm = make_two_link_arm();
  std::vector<Vec3> mus = {Vec3(0.2, 0.02, 0.01), Vec3(0.7, -0.03, 0.02), Vec3(1.0, 0.0, -0.04)};
  GaussianCloud cloud = cloud_at(mus, rng);
  ResidualNet net = make_residual_net(arm.joint_count(), rng);
  net.w3 = 0.05 * Eigen::MatrixXd::Random(3, ResidualNet::kHidden);
  Pose pose = make_pose({Vec3(0, 0, 0.3), Vec3(0, 0, 0.6)}, Vec3(0.05, 0, 0));
  std::vector<Mat4> blended = rigid_blend(arm, mus, pose);

  std::vector<Vec3> d_mu_posed;
  std::vector<Vec4> d_q_posed;
  Rng gr(99);
  for (size_t i = 0; i < mus.size(); ++i) {
    d_mu_posed.push_back(gr.normal3());
    d_q_posed.push_back(Vec4(gr.uniform(-1, 1), gr.uniform(-1, 1), gr.uniform(-1, 1),
                             gr.uniform(-1, 1)));
  }
  auto loss = [&](const GaussianCloud& c) {
    DeformResult f = deform_gaussians(c, blended, net, pose);
    double total = 0.0;
    for (size_t i = 0; i < c.size(); ++i) {
      total += f.posed.points[i].mu.dot(d_mu_posed[i]);
      total += f.posed.points[i].q.dot(d_q_posed[i]);
    }
    return total;
  };

  DeformResult fwd = deform_gaussians(cloud, blended, net, pose);
  DeformGrads grads = deform_backward(fwd, net, d_mu_posed, d_q_posed, {});

  const double h = 1e-4;
  for (size_t i = 0; i < cloud.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      GaussianCloud plus = cloud, minus = cloud;
      plus.points[i].mu[c] += h;
      minus.points[i].mu[c] -= h;
      double fd = (loss(plus) - loss(minus)) / (2 * h);
      double diff = std::abs(fd - grads.d_mu[i][c]);
      if (diff > 1e-8) {
        CHECK(diff / std::max(std::abs(fd), std::abs(grads.d_mu[i][c])) < 1e-3);
      }
    }
    for (int c = 0; c < 4; ++c) {
      GaussianCloud plus = cloud, minus = cloud;
      plus.points[i].q[c] += h;
      minus.points[i].q[c] -= h;
      double fd = (loss(plus) - loss(minus)) / (2 * h);
      double diff = std::abs(fd - grads.d_q[i][c]);
      if (diff > 1e-8) {
        CHECK(diff / std::max(std::abs(fd), std::abs(grads.d_q[i][c])) < 1e-3);
      }
    }
  }
}

TEST_CASE("polar projection recovers rotations and fixes shears") {
  Rng rng(53);
  for (int i = 0; i < 10; ++i) {
    Mat3 r = quat_to_mat(rng.unit_quaternion());
    CHECK((polar_rotation(r) - r).cwiseAbs().maxCoeff() < 1e-12);
    Mat3 sheared = r;
    sheared(0, 1) += 0.2;
    Mat3 fixed = polar_rotation(sheared);
    CHECK((fixed * fixed.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(fixed.determinant() == doctest::Approx(1.0).epsilon(1e-9));
  }
}
