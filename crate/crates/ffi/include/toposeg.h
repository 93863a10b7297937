#ifndef TOPOSEG_H
#define TOPOSEG_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ToposegDirection {
  TOPOSEG_DIRECTION_SUBLEVEL = 0,
  TOPOSEG_DIRECTION_SUPERLEVEL = 1,
} ToposegDirection;

typedef enum ToposegStatus {
  TOPOSEG_STATUS_OK = 0,
  // Null pointer, bad shape, non-UTF-8 string or out-of-range index.
  TOPOSEG_STATUS_INVALID_ARGUMENT = 1,
  // Configuration could not be parsed or validated.
  TOPOSEG_STATUS_CONFIG = 2,
  // Reading or writing a file failed.
  TOPOSEG_STATUS_IO = 3,
  // The pipeline ran but the image does not fit the model.
  TOPOSEG_STATUS_PIPELINE = 4,
  // A Rust panic was caught at the boundary.
  TOPOSEG_STATUS_PANIC = 5,
} ToposegStatus;

typedef struct ToposegConfig ToposegConfig;

typedef struct ToposegDiagram ToposegDiagram;

typedef struct ToposegImage ToposegImage;

typedef struct ToposegSegmentation ToposegSegmentation;

// One diagram point. Values are filtration times; `death` is +infinity and
// `death_pixel` is -1 for essential classes.
typedef struct ToposegPoint {
  uint32_t dim;
  double birth;
  double death;
  uint64_t birth_pixel;
  int64_t death_pixel;
} ToposegPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty if none. The
// pointer stays valid until the next failing call on the same thread.
const char *toposeg_last_error(void);

// Library version as a static NUL-terminated string.
const char *toposeg_version(void);

// Copies `len` voxel values (x fastest) into a new image of rank
// `rank` (2 or 3) with extents `dims`. Values must be finite; persistence
// further requires them in [0, 1].
//
// # Safety
// `dims` must point to `rank` values, `data` to their product, and `out`
// must be writable.
enum ToposegStatus toposeg_image_new(const size_t *dims,
                                     size_t rank,
                                     const double *data,
                                     size_t len,
                                     struct ToposegImage **out);

// Loads a NIfTI-1 file (`.nii`, `.nii.gz`) or a raw fixture (`.raw`).
//
// # Safety
// `path` must be a NUL-terminated string and `out` writable.
enum ToposegStatus toposeg_image_load(const char *path, struct ToposegImage **out);

// Rank of the image (2 or 3).
//
// # Safety
// `img` must be a live image handle.
size_t toposeg_image_rank(const struct ToposegImage *img);

// # Safety
// `img` must be null or a handle not yet freed.
void toposeg_image_free(struct ToposegImage *img);

// Default configuration.
//
// # Safety
// `out` must be writable.
enum ToposegStatus toposeg_config_default(struct ToposegConfig **out);

// Parses a TOML configuration document; absent keys keep their defaults.
//
// # Safety
// `toml` must be a NUL-terminated string and `out` writable.
enum ToposegStatus toposeg_config_from_toml(const char *toml, struct ToposegConfig **out);

// # Safety
// `cfg` must be null or a handle not yet freed.
void toposeg_config_free(struct ToposegConfig *cfg);

// Persistence diagram up to degree `max_dim`, clamped to the top degree the
// grid carries.
//
// # Safety
// `img` must be a live image handle and `out` writable.
enum ToposegStatus toposeg_persistence(const struct ToposegImage *img,
                                       enum ToposegDirection direction,
                                       size_t max_dim,
                                       struct ToposegDiagram **out);

// Number of points in the diagram.
//
// # Safety
// `diag` must be a live diagram handle.
size_t toposeg_diagram_len(const struct ToposegDiagram *diag);

// Writes point `index` into `out`.
//
// # Safety
// `diag` must be a live diagram handle and `out` writable.
enum ToposegStatus toposeg_diagram_point(const struct ToposegDiagram *diag,
                                         size_t index,
                                         struct ToposegPoint *out);

// # Safety
// `diag` must be null or a handle not yet freed.
void toposeg_diagram_free(struct ToposegDiagram *diag);

// Brain pipeline on co-registered FLAIR and T1ce volumes. Labels: 1 ET,
// 2 TC, 3 ED. `cfg` may be null for defaults.
//
// # Safety
// Handles must be live and `out` writable.
enum ToposegStatus toposeg_segment_brain(const struct ToposegImage *flair,
                                         const struct ToposegImage *t1ce,
                                         const struct ToposegConfig *cfg,
                                         struct ToposegSegmentation **out);

// Cardiac pipeline; 2D images use the slice version, volumes the 3D one.
// Labels: 1 LV, 2 RV, 3 Myo.
//
// # Safety
// Handles must be live and `out` writable.
enum ToposegStatus toposeg_segment_cardiac(const struct ToposegImage *img,
                                           const struct ToposegConfig *cfg,
                                           struct ToposegSegmentation **out);

// Cortical plate, per slice for volumes. Label 1 is CP.
//
// # Safety
// Handles must be live and `out` writable.
enum ToposegStatus toposeg_segment_fetal(const struct ToposegImage *img,
                                         const struct ToposegConfig *cfg,
                                         struct ToposegSegmentation **out);

// Number of voxels in the label map.
//
// # Safety
// `seg` must be a live handle.
size_t toposeg_segmentation_len(const struct ToposegSegmentation *seg);

// Writes the extents into `dims` (3 slots; the third is 1 for 2D).
//
// # Safety
// `seg` must be a live handle and `dims` point to 3 writable values.
enum ToposegStatus toposeg_segmentation_dims(const struct ToposegSegmentation *seg, size_t *dims);

// Copies the labels (x fastest) into `buf`, which must hold `len` values.
//
// # Safety
// `seg` must be a live handle and `buf` point to `len` writable values.
enum ToposegStatus toposeg_segmentation_labels(const struct ToposegSegmentation *seg,
                                               uint32_t *buf,
                                               size_t len);

// Run report as JSON, owned by the handle.
//
// # Safety
// `seg` must be a live handle.
const char *toposeg_segmentation_report(const struct ToposegSegmentation *seg);

// # Safety
// `seg` must be null or a handle not yet freed.
void toposeg_segmentation_free(struct ToposegSegmentation *seg);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TOPOSEG_H */
