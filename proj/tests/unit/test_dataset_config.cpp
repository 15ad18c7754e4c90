#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "core/config.hpp"
#include "core/dataset.hpp"
#include "core/json_util.hpp"
#include "core/skeleton.hpp"
#include "test_support.hpp"

using namespace gva;
using namespace gva::test;

namespace {

DatasetSpec small_spec(int frames, int size, int holdout_every) {
  DatasetSpec spec;
  spec.frame_count = frames;
  spec.width = size;
  spec.height = size;
  spec.focal = 1.4 * size;
  spec.holdout_every = holdout_every;
  return spec;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Manifest that reuses frame f00's files from an already-written dataset
// directory, so structural errors can be staged without re-rendering.
Json frame_entry(const std::string& id) {
  Json cam = {
      {"width", 32}, {"height", 32}, {"fx", 45.0}, {"fy", 45.0}, {"cx", 16.0}, {"cy", 16.0},
      {"near", 0.05}, {"far", 50.0},
  };
  Json w2c = Json::array();
  const double ident[16] = {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1};
  for (double v : ident) w2c.push_back(v);
  cam["world_to_cam"] = w2c;
  return Json{
      {"id", id},           {"image", "f00_image.ppm"}, {"silhouette", "f00_sil.pgm"},
      {"pose", "f00_pose.json"}, {"camera", cam},
  };
}

std::string write_manifest(const TempDir& dir, const std::string& name, const Json& manifest) {
  std::string path = dir.file(name);
  write_text(path, manifest.dump(2) + "\n");
  return path;
}

bool same_vec3(const Vec3& a, const Vec3& b) { return (a - b).cwiseAbs().maxCoeff() == 0.0; }

}  // namespace

TEST_CASE("dataset loader splits holdout frames by position") {
  TempDir dir;
  SkeletonAsset figure = make_capsule_figure();
  std::string manifest = write_figure_dataset(dir.path(), figure, small_spec(6, 32, 3));

  Dataset ds = load_dataset(manifest);
  REQUIRE(ds.frames.size() == 6);
  for (size_t i = 0; i + 1 < ds.frames.size(); ++i) {
    CHECK(ds.frames[i].id < ds.frames[i + 1].id);
  }
  CHECK(ds.holdout_indices == std::vector<size_t>{2, 5});
  CHECK(ds.train_indices == std::vector<size_t>{0, 1, 3, 4});

  ImageRGB image = load_frame_image(ds.frames[0]);
  CHECK(image.width == 32);
  CHECK(image.height == 32);
  ImageGray sil = load_frame_silhouette(ds.frames[0]);
  CHECK(sil.width == 32);
  CHECK(sil.height == 32);
  CHECK(ds.frames[0].pose.joint_rotations.size() ==
        static_cast<size_t>(figure.joint_count()));
  CHECK_FALSE(ds.frames[0].has_normals());
  CHECK_THROWS_AS(load_frame_normals(ds.frames[0]), StateError);
}

TEST_CASE("dataset loader serves normal maps when present") {
  TempDir dir;
  SkeletonAsset figure = make_capsule_figure();
  DatasetSpec spec = small_spec(3, 24, 0);
  spec.with_normals = true;
  std::string manifest = write_figure_dataset(dir.path(), figure, spec);

  Dataset ds = load_dataset(manifest);
  REQUIRE(ds.frames.size() == 3);
  CHECK(ds.holdout_indices.empty());
  CHECK(ds.train_indices.size() == 3);
  REQUIRE(ds.frames[1].has_normals());
  NormalMap normals = load_frame_normals(ds.frames[1]);
  CHECK(normals.width == 24);
  CHECK(normals.height == 24);
}

TEST_CASE("dataset loader names the frame when a file is bad") {
  SkeletonAsset figure = make_capsule_figure();

  SUBCASE("image dimensions differ from the camera") {
    TempDir dir;
    std::string manifest = write_figure_dataset(dir.path(), figure, small_spec(4, 32, 0));
    write_ppm(ImageRGB(16, 16), dir.file("f02_image.ppm"));
    CHECK_THROWS_WITH_AS(load_dataset(manifest), doctest::Contains("f02"), IoError);
  }

  SUBCASE("silhouette file missing") {
    TempDir dir;
    std::string manifest = write_figure_dataset(dir.path(), figure, small_spec(4, 32, 0));
    std::filesystem::remove(dir.file("f01_sil.pgm"));
    CHECK_THROWS_WITH_AS(load_dataset(manifest), doctest::Contains("f01"), IoError);
  }

  SUBCASE("pose file malformed") {
    TempDir dir;
    std::string manifest = write_figure_dataset(dir.path(), figure, small_spec(4, 32, 0));
    write_text(dir.file("f03_pose.json"), "{\"joint_rotations\": 7}\n");
    CHECK_THROWS_WITH_AS(load_dataset(manifest), doctest::Contains("f03"), IoError);
  }
}

TEST_CASE("dataset loader rejects malformed manifests") {
  TempDir dir;
  SkeletonAsset figure = make_capsule_figure();
  write_figure_dataset(dir.path(), figure, small_spec(1, 32, 0));

  SUBCASE("no frames") {
    std::string path = write_manifest(
        dir, "empty.json",
        Json{{"format", "gva-dataset-v1"}, {"holdout_every", 0}, {"frames", Json::array()}});
    CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains("no frames"),
                         InvalidArgumentError);
  }

  SUBCASE("duplicate frame ids") {
    std::string path = write_manifest(dir, "dup.json",
                                      Json{{"format", "gva-dataset-v1"},
                                           {"holdout_every", 0},
                                           {"frames", Json::array({frame_entry("f00"),
                                                                   frame_entry("f00")})}});
    CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains("duplicate"),
                         InvalidArgumentError);
  }

  SUBCASE("holdout_every of one leaves nothing to train on") {
    std::string path = write_manifest(dir, "h1.json",
                                      Json{{"format", "gva-dataset-v1"},
                                           {"holdout_every", 1},
                                           {"frames", Json::array({frame_entry("f00")})}});
    CHECK_THROWS_AS(load_dataset(path), InvalidArgumentError);
  }

  SUBCASE("unknown manifest key") {
    std::string path = write_manifest(dir, "weird.json",
                                      Json{{"format", "gva-dataset-v1"},
                                           {"holdout_every", 0},
                                           {"frames", Json::array({frame_entry("f00")})},
                                           {"shuffle", true}});
    CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains("unknown key"),
                         InvalidArgumentError);
  }

  SUBCASE("unsupported format tag") {
    std::string path = write_manifest(dir, "fmt.json",
                                      Json{{"format", "gva-dataset-v2"},
                                           {"holdout_every", 0},
                                           {"frames", Json::array({frame_entry("f00")})}});
    CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains("unsupported format"),
                         InvalidArgumentError);
  }
}

TEST_CASE("dataset loader requires one joint count across frames") {
  TempDir dir;
  SkeletonAsset figure = make_capsule_figure();
  write_figure_dataset(dir.path(), figure, small_spec(1, 32, 0));

  Pose little = zero_pose(2);
  save_pose_file(little, dir.file("little_pose.json"));
  Json second = frame_entry("zz");
  second["pose"] = "little_pose.json";

  std::string path = write_manifest(dir, "mixed.json",
                                    Json{{"format", "gva-dataset-v1"},
                                         {"holdout_every", 0},
                                         {"frames", Json::array({frame_entry("f00"), second})}});
  CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains("joint count"),
                       InvalidArgumentError);
}

TEST_CASE("pose files round-trip exactly") {
  TempDir dir;
  Pose pose = zero_pose(3);
  pose.joint_rotations[0] = Vec3(0.1, -0.7, 0.3);
  pose.joint_rotations[2] = Vec3(1e-17, 2.0 / 3.0, -0.123456789012345);
  pose.root_translation = Vec3(4.5, -6.25, 0.875);

  std::string path = dir.file("pose.json");
  save_pose_file(pose, path);
  Pose back = load_pose_file(path);

  REQUIRE(back.joint_rotations.size() == 3);
  for (size_t j = 0; j < 3; ++j) {
    CHECK(same_vec3(back.joint_rotations[j], pose.joint_rotations[j]));
  }
  CHECK(same_vec3(back.root_translation, pose.root_translation));
}

TEST_CASE("pose files reject unknown keys and missing rotations") {
  TempDir dir;
  std::string path = dir.file("pose.json");

  write_text(path, "{\"joint_rotations\": [[0,0,0]], \"extra\": 1}\n");
  CHECK_THROWS_WITH_AS(load_pose_file(path), doctest::Contains("unknown key"), IoError);

  write_text(path, "{\"root_translation\": [0,0,0]}\n");
  CHECK_THROWS_AS(load_pose_file(path), IoError);

  CHECK_THROWS_AS(load_pose_file(dir.file("nope.json")), IoError);
}

TEST_CASE("camera files load and validate") {
  TempDir dir;
  Json cam = frame_entry("x")["camera"];
  std::string path = dir.file("camera.json");
  write_text(path, cam.dump(2) + "\n");

  Camera loaded = load_camera_file(path);
  CHECK(loaded.width == 32);
  CHECK(loaded.fx == 45.0);
  CHECK(loaded.near == 0.05);
  CHECK(loaded.world_to_cam == Mat4::Identity());

  cam["fx"] = 0.0;
  write_text(path, cam.dump(2) + "\n");
  CHECK_THROWS_AS(load_camera_file(path), IoError);

  cam["fx"] = 45.0;
  cam["tilt"] = 3;
  write_text(path, cam.dump(2) + "\n");
  CHECK_THROWS_WITH_AS(load_camera_file(path), doctest::Contains("unknown key"), IoError);
}

TEST_CASE("train config round-trips through json") {
  TrainConfig config;
  config.lambda3 = 0.25;
  config.lambda4 = 0.0;
  config.steps = 77;
  config.lr.position = 3e-4;
  config.lr.sh = 1e-3;
  config.densify_interval = 25;
  config.reinit_steps = {10, 20};
  config.reinit.alpha_override = 0.5;
  config.reinit.resample.target_count = 123;
  config.reinit.resample.smoothing_iterations = 4;
  config.eval_interval = 11;
  config.init_count = 64;
  config.init_sh_degree = 2;
  config.seed = 42;

  std::string text = dump_train_config(config);
  TrainConfig back = train_config_from_json_text(text, "roundtrip");

  CHECK(back.lambda3 == config.lambda3);
  CHECK(back.lambda4 == config.lambda4);
  CHECK(back.steps == config.steps);
  CHECK(back.lr.position == config.lr.position);
  CHECK(back.lr.sh == config.lr.sh);
  CHECK(back.lr.rotation == config.lr.rotation);
  CHECK(back.densify_interval == config.densify_interval);
  CHECK(back.reinit_steps == config.reinit_steps);
  CHECK(back.reinit.alpha_override == config.reinit.alpha_override);
  CHECK(back.reinit.resample.target_count == config.reinit.resample.target_count);
  CHECK(back.reinit.resample.smoothing_iterations == config.reinit.resample.smoothing_iterations);
  CHECK(back.eval_interval == config.eval_interval);
  CHECK(back.init_count == config.init_count);
  CHECK(back.init_sh_degree == config.init_sh_degree);
  CHECK(back.seed == config.seed);

  // A second dump is textually identical: dumping is a pure function.
  CHECK(dump_train_config(back) == text);

  TempDir dir;
  std::string path = dir.file("train.json");
  write_text(path, text);
  TrainConfig from_file = load_train_config(path);
  CHECK(dump_train_config(from_file) == text);
}

TEST_CASE("train config rejects unknown keys and bad values") {
  auto parse = [](const std::string& text) {
    return train_config_from_json_text(text, "test");
  };
  CHECK_THROWS_WITH_AS(parse("{\"stepz\": 1}"), doctest::Contains("unknown key 'stepz'"),
                       InvalidArgumentError);
  CHECK_THROWS_WITH_AS(parse("{\"steps\": 0}"), doctest::Contains("steps"),
                       InvalidArgumentError);
  CHECK_THROWS_WITH_AS(parse("{\"steps\": 100, \"reinit_steps\": [100]}"),
                       doctest::Contains("reinit_steps"), InvalidArgumentError);
  CHECK_THROWS_AS(parse("{\"init_opacity\": 1.0}"), InvalidArgumentError);
  CHECK_THROWS_AS(parse("{\"init_sh_degree\": 4}"), InvalidArgumentError);
  CHECK_THROWS_AS(parse("{\"split_scale_divisor\": 1.0}"), InvalidArgumentError);
  CHECK_THROWS_AS(parse("{\"lr\": {\"scale\": 0.0}}"), InvalidArgumentError);
  CHECK_THROWS_AS(parse("{\"lr\": {\"momentum\": 0.9}}"), InvalidArgumentError);
  CHECK_THROWS_WITH_AS(parse("{"), doctest::Contains("test"), InvalidArgumentError);
}

TEST_CASE("pose refine config round-trips through json") {
  PoseRefineConfig config;
  config.lambda1 = 2.5;
  config.lambda2 = 0.75;
  config.omega_decay = 0.8;
  config.fd_step = 5e-4;
  config.adam_lr = 0.02;
  config.max_iters = 33;
  config.converge_tol = 1e-6;

  std::string text = dump_pose_refine_config(config);
  PoseRefineConfig back = pose_refine_config_from_json_text(text, "roundtrip");
  CHECK(back.lambda1 == config.lambda1);
  CHECK(back.lambda2 == config.lambda2);
  CHECK(back.omega_decay == config.omega_decay);
  CHECK(back.fd_step == config.fd_step);
  CHECK(back.adam_lr == config.adam_lr);
  CHECK(back.max_iters == config.max_iters);
  CHECK(back.converge_tol == config.converge_tol);

  TempDir dir;
  std::string path = dir.file("refine.json");
  write_text(path, text);
  PoseRefineConfig from_file = load_pose_refine_config(path);
  CHECK(dump_pose_refine_config(from_file) == text);

  CHECK_THROWS_WITH_AS(pose_refine_config_from_json_text("{\"lambda9\": 1}", "x"),
                       doctest::Contains("unknown key"), InvalidArgumentError);
  CHECK_THROWS_AS(pose_refine_config_from_json_text("{\"fd_step\": 0}", "x"),
                  InvalidArgumentError);
}

TEST_CASE("reinit config round-trips through a file") {
  ReinitConfig config;
  config.alpha_override = 0.25;
  config.max_alpha_doublings = 7;
  config.inherit_knn = 5;
  config.resample.curvature_boost = 2.0;
  config.dump_debug_obj = true;
  config.debug_obj_prefix = "dbg";

  TempDir dir;
  std::string path = dir.file("reinit.json");
  write_text(path, dump_reinit_config(config));
  ReinitConfig back = load_reinit_config(path);
  CHECK(back.alpha_override == config.alpha_override);
  CHECK(back.max_alpha_doublings == config.max_alpha_doublings);
  CHECK(back.inherit_knn == config.inherit_knn);
  CHECK(back.resample.curvature_boost == config.resample.curvature_boost);
  CHECK(back.dump_debug_obj == config.dump_debug_obj);
  CHECK(back.debug_obj_prefix == config.debug_obj_prefix);

  write_text(path, "{\"alpha\": 1.0}\n");
  CHECK_THROWS_WITH_AS(load_reinit_config(path), doctest::Contains("unknown key"),
                       InvalidArgumentError);
}

TEST_CASE("skeleton asset files round-trip") {
  TempDir dir;
  SkeletonAsset arm = make_two_link_arm();
  std::string path = dir.file("arm.skel");
  save_skeleton_asset(arm, path);
  SkeletonAsset back = load_skeleton_asset(path);

  REQUIRE(back.joint_count() == arm.joint_count());
  for (int j = 0; j < arm.joint_count(); ++j) {
    CHECK(back.joints[j].name == arm.joints[j].name);
    CHECK(back.joints[j].parent == arm.joints[j].parent);
    CHECK((back.joints[j].rest_rotation - arm.joints[j].rest_rotation).cwiseAbs().maxCoeff() ==
          0.0);
    CHECK(same_vec3(back.joints[j].rest_translation, arm.joints[j].rest_translation));
  }
  REQUIRE(back.mesh.vertices.size() == arm.mesh.vertices.size());
  for (size_t i = 0; i < arm.mesh.vertices.size(); ++i) {
    CHECK(same_vec3(back.mesh.vertices[i], arm.mesh.vertices[i]));
  }
  CHECK(back.mesh.faces == arm.mesh.faces);
  REQUIRE(back.skin_weights.size() == arm.skin_weights.size());
  for (size_t v = 0; v < arm.skin_weights.size(); ++v) {
    REQUIRE(back.skin_weights[v].size() == arm.skin_weights[v].size());
    for (size_t k = 0; k < arm.skin_weights[v].size(); ++k) {
      CHECK(back.skin_weights[v][k].first == arm.skin_weights[v][k].first);
      CHECK(back.skin_weights[v][k].second == arm.skin_weights[v][k].second);
    }
  }

  // Comments and blank lines are cosmetic.
  write_text(path, "# a comment\n\n" + slurp(path));
  SkeletonAsset commented = load_skeleton_asset(path);
  CHECK(commented.joint_count() == arm.joint_count());
}

TEST_CASE("skeleton asset loader reports line numbers") {
  TempDir dir;
  std::string path = dir.file("bad.skel");

  write_text(path, "skeleton-asset v1\njoints 1\nroot -1 1 0 0\n");
  CHECK_THROWS_WITH_AS(load_skeleton_asset(path), doctest::Contains(":3:"), IoError);

  write_text(path, "not-a-skeleton v9\n");
  CHECK_THROWS_WITH_AS(load_skeleton_asset(path), doctest::Contains(":1:"), IoError);

  write_text(path, "skeleton-asset v1\njoints 1\n");
  CHECK_THROWS_WITH_AS(load_skeleton_asset(path), doctest::Contains("unexpected end of file"),
                       IoError);

  write_text(path,
             "skeleton-asset v1\njoints 1\nroot -1 1 0 0 0 0 0 0\nvertices 1\n0 0 0\n"
             "faces 0\nskin_weights 1\n0 4 1.0\n");
  CHECK_THROWS_WITH_AS(load_skeleton_asset(path), doctest::Contains("out of range"), IoError);

  CHECK_THROWS_AS(load_skeleton_asset(dir.file("absent.skel")), IoError);
}

TEST_CASE("skeleton asset saver rejects unserializable names") {
  TempDir dir;
  SkeletonAsset arm = make_two_link_arm();
  arm.joints[1].name = "el bow";
  CHECK_THROWS_AS(save_skeleton_asset(arm, dir.file("bad.skel")), InvalidArgumentError);
}
