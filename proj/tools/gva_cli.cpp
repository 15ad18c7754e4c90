// Command-line front end over the public C API (gva/gva.h). Exit codes:
// 0 success, 1 argument/validation errors, 2 runtime failures.
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>

#include <CLI11.hpp>
#include <gva/gva.h>

namespace {

int status_to_exit(gva_status s) {
  switch (s) {
    case GVA_OK:
      return 0;
    case GVA_ERROR_INVALID_ARGUMENT:
    case GVA_ERROR_IO:
      return 1;
    default:
      return 2;
  }
}

int fail(gva_status s) {
  std::fprintf(stderr, "error: %s\n", gva_last_error());
  return status_to_exit(s);
}

struct AvatarDeleter {
  void operator()(gva_avatar* a) const { gva_avatar_free(a); }
};
struct DatasetDeleter {
  void operator()(gva_dataset* d) const { gva_dataset_free(d); }
};
using AvatarPtr = std::unique_ptr<gva_avatar, AvatarDeleter>;
using DatasetPtr = std::unique_ptr<gva_dataset, DatasetDeleter>;

const char* opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

int dump_config(const char* kind, const std::string& config, int64_t seed) {
  char* text = nullptr;
  gva_status s = gva_config_resolve(kind, opt(config), seed, &text);
  if (s != GVA_OK) return fail(s);
  std::fputs(text, stdout);
  gva_string_free(text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Animatable Gaussian avatar pipeline"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(gva_version()));

  int rc = 0;

  // refine-pose -------------------------------------------------------------
  auto* refine = app.add_subcommand("refine-pose",
                                    "Refine frame poses against normal/silhouette targets");
  struct {
    std::string skeleton, dataset, config, out;
    bool dump = false;
  } rp;
  refine->add_option("--skeleton", rp.skeleton, "Skeleton asset file")->required();
  refine->add_option("--dataset", rp.dataset, "Dataset manifest")->required();
  refine->add_option("--config", rp.config, "Pose-refine config JSON");
  refine->add_option("--out", rp.out, "Output directory for refined pose files")->required();
  refine->add_flag("--dump-config", rp.dump, "Print the resolved config and exit");
  refine->callback([&] {
    if (rp.dump) {
      rc = dump_config("pose-refine", rp.config, -1);
      return;
    }
    size_t refined = 0;
    gva_status s =
        gva_refine_poses(rp.skeleton.c_str(), rp.dataset.c_str(), opt(rp.config),
                         rp.out.c_str(), &refined);
    if (s != GVA_OK) {
      rc = fail(s);
      return;
    }
    std::printf("refined %zu poses -> %s\n", refined, rp.out.c_str());
  });

  // train ---------------------------------------------------------------
  auto* train = app.add_subcommand("train", "Optimize an avatar on a dataset");
  struct {
    std::string skeleton, dataset, config, out, metrics;
    int64_t seed = -1;
    bool dump = false;
  } tr;
  train->add_option("--skeleton", tr.skeleton, "Skeleton asset file")->required();
  train->add_option("--dataset", tr.dataset, "Dataset manifest")->required();
  train->add_option("--config", tr.config, "Train config JSON");
  train->add_option("--out", tr.out, "Output checkpoint path")->required();
  train->add_option("--metrics", tr.metrics, "Metrics JSONL path (default <out>.metrics.jsonl)");
  train->add_option("--seed", tr.seed, "Override the config seed");
  train->add_flag("--dump-config", tr.dump, "Print the resolved config and exit");
  train->callback([&] {
    if (tr.dump) {
      rc = dump_config("train", tr.config, tr.seed);
      return;
    }
    gva_avatar* avatar_raw = nullptr;
    gva_status s = gva_avatar_create(tr.skeleton.c_str(), opt(tr.config), tr.seed, &avatar_raw);
    if (s != GVA_OK) {
      rc = fail(s);
      return;
    }
    AvatarPtr avatar(avatar_raw);
    gva_dataset* ds_raw = nullptr;
    s = gva_dataset_load(tr.dataset.c_str(), &ds_raw);
    if (s != GVA_OK) {
      rc = fail(s);
      return;
    }
    DatasetPtr dataset(ds_raw);
    std::string metrics = tr.metrics.empty() ? tr.out + ".metrics.jsonl" : tr.metrics;
    s = gva_avatar_train(avatar.get(), dataset.get(), opt(tr.config), tr.seed, metrics.c_str());
    if (s != GVA_OK) {
      rc = fail(s);
      return;
    }
    s = gva_avatar_save(avatar.get(), tr.out.c_str());
    if (s != GVA_OK) {
      rc = fail(s);
      return;
    }
    size_t points = 0;
    gva_avatar_point_count(avatar.get(), &points);
    std::printf("trained avatar: %zu points -> %s (metrics: %s)\n", points, tr.out.c_str(),
                metrics.c_str());
  });

  // render --------------------------------------------------------------
  auto* render = app.add_subcommand("render", "Render one pose to a PPM image");
  struct {
    std::string skeleton, checkpoint, camera, pose, out;
  } rd;
  render->add_option("--skeleton", rd.skeleton, "Skeleton asset file")->required();
  render->add_option("--checkpoint", rd.checkpoint, "Avatar checkpoint")->required();
  render->add_option("--camera", rd.camera, "Camera JSON file")->required();
  render->add_option("--pose", rd.pose, "Pose JSON file (default: rest pose)");
  render->add_option("--out", rd.out, "Output PPM path")->required();
  render->callback([&] {
    gva_avatar* avatar_raw = nullptr;
    gva_status s = gva_avatar_load(rd.skeleton.c_str(), rd.checkpoint.c_str(), &avatar_raw);
    if (s != GVA_OK) {
      rc = fail(s);
      return;
    }
    AvatarPtr avatar(avatar_raw);
    s = gva_avatar_render(avatar.get(), opt(rd.pose), rd.camera.c_str(), rd.out.c_str());
    if (s != GVA_OK) {
      rc = fail(s);
      return;
    }
    std::printf("rendered -> %s\n", rd.out.c_str());
  });

  // drive ---------------------------------------------------------------
  auto* drive = app.add_subcommand("drive", "Render a pose sequence to numbered frames");
  struct {
    std::string skeleton, checkpoint, sequence, out;
  } dv;
  drive->add_option("--skeleton", dv.skeleton, "Skeleton asset file")->required();
  drive->add_option("--checkpoint", dv.checkpoint, "Avatar checkpoint")->required();
  drive->add_option("--sequence", dv.sequence, "Pose-sequence JSON file")->required();
  drive->add_option("--out", dv.out, "Output directory")->required();
  drive->callback([&] {
    gva_avatar* avatar_raw = nullptr;
    gva_status s = gva_avatar_load(dv.skeleton.c_str(), dv.checkpoint.c_str(), &avatar_raw);
    if (s != GVA_OK) {
      rc = fail(s);
      return;
    }
    AvatarPtr avatar(avatar_raw);
    size_t frames = 0;
    s = gva_avatar_drive(avatar.get(), dv.sequence.c_str(), dv.out.c_str(), &frames);
    if (s != GVA_OK) {
      rc = fail(s);
      return;
    }
    std::printf("wrote %zu frames -> %s\n", frames, dv.out.c_str());
  });

  // reinit --------------------------------------------------------------
  auto* reinit = app.add_subcommand("reinit", "Surface re-initialization of a checkpoint");
  struct {
    std::string skeleton, checkpoint, config, out, report;
    int64_t seed = 0;
    bool dump = false;
  } ri;
  reinit->add_option("--skeleton", ri.skeleton, "Skeleton asset file")->required();
  reinit->add_option("--checkpoint", ri.checkpoint, "Input checkpoint")->required();
  reinit->add_option("--config", ri.config, "Reinit config JSON");
  reinit->add_option("--out", ri.out, "Output checkpoint path")->required();
  reinit->add_option("--report", ri.report, "Write the reinit report JSON here");
  reinit->add_option("--seed", ri.seed, "Random seed (default 0)");
  reinit->add_flag("--dump-config", ri.dump, "Print the resolved config and exit");
  reinit->callback([&] {
    if (ri.dump) {
      rc = dump_config("reinit", ri.config, -1);
      return;
    }
    gva_avatar* avatar_raw = nullptr;
    gva_status s = gva_avatar_load(ri.skeleton.c_str(), ri.checkpoint.c_str(), &avatar_raw);
    if (s != GVA_OK) {
      rc = fail(s);
      return;
    }
    AvatarPtr avatar(avatar_raw);
    s = gva_avatar_reinitialize(avatar.get(), opt(ri.config),
                                static_cast<uint64_t>(ri.seed < 0 ? 0 : ri.seed),
                                opt(ri.report));
    if (s != GVA_OK) {
      rc = fail(s);
      return;
    }
    s = gva_avatar_save(avatar.get(), ri.out.c_str());
    if (s != GVA_OK) {
      rc = fail(s);
      return;
    }
    size_t points = 0;
    gva_avatar_point_count(avatar.get(), &points);
    std::printf("reinitialized: %zu points -> %s\n", points, ri.out.c_str());
  });

  // eval ----------------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "PSNR/SSIM table over a dataset split");
  struct {
    std::string skeleton, checkpoint, dataset, split = "holdout", out;
  } ev;
  eval->add_option("--skeleton", ev.skeleton, "Skeleton asset file")->required();
  eval->add_option("--checkpoint", ev.checkpoint, "Avatar checkpoint")->required();
  eval->add_option("--dataset", ev.dataset, "Dataset manifest")->required();
  eval->add_option("--split", ev.split, "holdout | train | all (default holdout)")
      ->check(CLI::IsMember({"holdout", "train", "all"}));
  eval->add_option("--out", ev.out, "Write the JSON table here");
  eval->callback([&] {
    gva_avatar* avatar_raw = nullptr;
    gva_status s = gva_avatar_load(ev.skeleton.c_str(), ev.checkpoint.c_str(), &avatar_raw);
    if (s != GVA_OK) {
      rc = fail(s);
      return;
    }
    AvatarPtr avatar(avatar_raw);
    gva_dataset* ds_raw = nullptr;
    s = gva_dataset_load(ev.dataset.c_str(), &ds_raw);
    if (s != GVA_OK) {
      rc = fail(s);
      return;
    }
    DatasetPtr dataset(ds_raw);
    int split = ev.split == "holdout" ? 0 : (ev.split == "train" ? 1 : 2);
    double psnr = 0.0, ssim = 0.0;
    s = gva_avatar_evaluate(avatar.get(), dataset.get(), split, opt(ev.out), &psnr, &ssim);
    if (s != GVA_OK) {
      rc = fail(s);
      return;
    }
    std::printf("split %s: mean PSNR %.4f dB, mean SSIM %.6f\n", ev.split.c_str(), psnr, ssim);
    if (!ev.out.empty()) std::printf("table -> %s\n", ev.out.c_str());
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;  // help/version exit 0; any parse error is a usage error
  }
  return rc;
}
