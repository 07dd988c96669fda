/* Copyright 2026 The segsplat Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the segsplat pipeline: synthetic scene generation,
 * pointmap-based mask association, segmentation-field training, metrics,
 * rendering and object edits.
 *
 * Every function returns SEGSPLAT_OK (0) on success or a nonzero status;
 * segsplat_last_error() describes the most recent failure on the calling
 * thread. Fields are opaque handles owned by the caller via
 * segsplat_field_free().
 *
 * Config arguments take JSON text (not a path); pass NULL or "" for
 * defaults. The SEGSPLAT_THREADS environment variable caps worker threads;
 * outputs are bit-identical for any thread count.
 */
#ifndef SEGSPLAT_H_
#define SEGSPLAT_H_

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum segsplat_status {
  SEGSPLAT_OK = 0,
  SEGSPLAT_ERR_INVALID_INPUT = 1,
  SEGSPLAT_ERR_IO = 2,
  SEGSPLAT_ERR_FORMAT = 3,
  SEGSPLAT_ERR_EMPTY_TARGET = 4,
  SEGSPLAT_ERR_DEGENERATE = 5,
  SEGSPLAT_ERR_UNDEFINED_METRIC = 6,
  SEGSPLAT_ERR_DIVERGED = 7,
  SEGSPLAT_ERR_GENERATION = 8,
  SEGSPLAT_ERR_UNKNOWN = 9,
  /* the operation succeeded but targeted an id absent from the field */
  SEGSPLAT_WARN_UNKNOWN_ID = 100
} segsplat_status;

const char* segsplat_version(void);

/* Message for the most recent failing call on this thread. */
const char* segsplat_last_error(void);

/* ---- pipeline stages (path based) ---- */

/* Writes a scene bundle (images, pointmaps, gt + shuffled masks, gt cloud,
 * manifest.json) generated from the spec JSON file. */
segsplat_status segsplat_generate_scene(const char* spec_json_path,
                                        uint64_t seed, const char* out_dir);

/* Associates the scene's raw masks into globally consistent ids; writes
 * mask_%04d.pgm and cloud.ply. */
segsplat_status segsplat_associate(const char* scene_dir,
                                   const char* config_json,
                                   const char* out_dir);

/* Association + field initialization + optimization; writes field.ply,
 * field.ply.classifier.json and loss_log.csv. */
segsplat_status segsplat_train(const char* scene_dir, const char* config_json,
                               const char* out_dir);

/* Mask metrics of pred_dir/mask_%04d.pgm against the scene's ground truth;
 * adds psnr/ssim when pred_dir holds render_%04d.ppm. Writes
 * report_prefix.txt/.json when report_prefix is non-NULL. Out pointers are
 * optional. */
segsplat_status segsplat_eval2d(const char* pred_dir, const char* scene_dir,
                                const char* config_json,
                                const char* report_prefix, double* miou_s,
                                double* miou_m);

segsplat_status segsplat_eval3d(const char* field_path, const char* scene_dir,
                                const char* config_json,
                                const char* report_prefix, double* miou_3d,
                                double* chamfer_distance);

/* ---- field handle ---- */

typedef struct segsplat_field segsplat_field;

segsplat_status segsplat_field_load(const char* ply_path, segsplat_field** out);
segsplat_status segsplat_field_save(const segsplat_field* field,
                                    const char* ply_path);
void segsplat_field_free(segsplat_field* field);
int64_t segsplat_field_size(const segsplat_field* field);

segsplat_status segsplat_field_delete_object(segsplat_field* field,
                                             uint32_t global_id);
segsplat_status segsplat_field_move_object(segsplat_field* field,
                                           uint32_t global_id,
                                           const double translation[3]);

/* Color image (out_prefix.ppm) and argmax mask (out_prefix_mask.pgm) for a
 * trajectory frame of the scene, or for a pose JSON file. */
segsplat_status segsplat_field_render(const segsplat_field* field,
                                      const char* scene_dir, int frame_index,
                                      const char* out_prefix);
segsplat_status segsplat_field_render_pose(const segsplat_field* field,
                                           const char* pose_json_path,
                                           const char* out_prefix);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SEGSPLAT_H_ */
