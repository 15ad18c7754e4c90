/* C interface to the Gaussian avatar library.
 *
 * All functions return gva_status; on any failure gva_last_error() holds a
 * human-readable message (thread-local, valid until the next call on the
 * same thread). Objects returned through out-parameters are owned by the
 * caller and released with the matching _free function. Passing NULL where
 * an object or path is required yields GVA_ERROR_INVALID_ARGUMENT.
 *
 * config_path arguments are JSON files; NULL selects built-in defaults.
 */
#ifndef GVA_H
#define GVA_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gva_status {
  GVA_OK = 0,
  GVA_ERROR_INVALID_ARGUMENT = 1,
  GVA_ERROR_IO = 2,
  GVA_ERROR_GEOMETRY = 3,
  GVA_ERROR_STATE = 4,
  GVA_ERROR_INTERNAL = 5
} gva_status;

const char* gva_version(void);
const char* gva_last_error(void);

/* Resolves a config of kind "train", "pose-refine" or "reinit" (defaults
 * when config_path is NULL) to canonical JSON. seed_override >= 0 replaces
 * the train config's seed. Free the returned text with gva_string_free. */
gva_status gva_config_resolve(const char* kind, const char* config_path, int64_t seed_override,
                              char** out_text);
void gva_string_free(char* text);

/* ---- dataset ---- */

typedef struct gva_dataset gva_dataset;

gva_status gva_dataset_load(const char* manifest_path, gva_dataset** out);
void gva_dataset_free(gva_dataset* dataset);
gva_status gva_dataset_counts(const gva_dataset* dataset, size_t* frames, size_t* train,
                              size_t* holdout);

/* ---- avatar: skeleton asset + Gaussian cloud + pose-residual net ---- */

typedef struct gva_avatar gva_avatar;

/* Fresh avatar: Gaussians sampled on the asset surface per the train config
 * (init_count / init_sh_degree / init_opacity / seed). seed_override >= 0
 * replaces the config seed. */
gva_status gva_avatar_create(const char* skeleton_path, const char* train_config_path,
                             int64_t seed_override, gva_avatar** out);

/* Loads <checkpoint> and its <checkpoint>.mlp residual-net sidecar. */
gva_status gva_avatar_load(const char* skeleton_path, const char* checkpoint_path,
                           gva_avatar** out);
gva_status gva_avatar_save(const gva_avatar* avatar, const char* checkpoint_path);
void gva_avatar_free(gva_avatar* avatar);
gva_status gva_avatar_point_count(const gva_avatar* avatar, size_t* out);

/* ---- pipeline stages ---- */

/* Stage-2 pose refinement over every frame that carries a normal map
 * (frames without one pass through unchanged). Writes one pose JSON per
 * frame id into out_dir. refined_count may be NULL. */
gva_status gva_refine_poses(const char* skeleton_path, const char* manifest_path,
                            const char* config_path, const char* out_dir,
                            size_t* refined_count);

/* Full optimization; metrics_path (optional) receives the JSONL log.
 * seed_override >= 0 replaces the config seed. */
gva_status gva_avatar_train(gva_avatar* avatar, const gva_dataset* dataset,
                            const char* config_path, int64_t seed_override,
                            const char* metrics_path);

/* Surface re-initialization of the current cloud; report_path (optional)
 * receives a JSON report. */
gva_status gva_avatar_reinitialize(gva_avatar* avatar, const char* config_path, uint64_t seed,
                                   const char* report_path);

/* Renders the avatar under a pose (NULL = rest pose) and camera file into a
 * binary PPM. */
gva_status gva_avatar_render(const gva_avatar* avatar, const char* pose_path,
                             const char* camera_path, const char* out_image_path);

/* Renders a pose-sequence file ({"format":"gva-pose-sequence-v1",
 * "camera":{...}, "poses":[paths...]}) to frame_%04d.ppm under out_dir. */
gva_status gva_avatar_drive(const gva_avatar* avatar, const char* sequence_path,
                            const char* out_dir, size_t* frame_count);

/* PSNR/SSIM against dataset frames. split: 0 = held-out, 1 = train, 2 = all.
 * Optional JSON table to table_path; mean_psnr/mean_ssim may be NULL. */
gva_status gva_avatar_evaluate(const gva_avatar* avatar, const gva_dataset* dataset, int split,
                               const char* table_path, double* mean_psnr, double* mean_ssim);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* GVA_H */
