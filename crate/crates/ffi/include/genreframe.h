#ifndef GENREFRAME_H
#define GENREFRAME_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Number of genre classes, the length of a genre probability row.
 */
#define GF_NUM_GENRES 3

/**
 * Number of frame labels, the length of a frame probability row.
 */
#define GF_NUM_FRAMES 14

typedef enum GfStatus {
  GF_STATUS_OK = 0,
  GF_STATUS_NULL_POINTER = 1,
  GF_STATUS_INVALID_UTF8 = 2,
  GF_STATUS_INVALID_ARGUMENT = 3,
  GF_STATUS_IO = 4,
  GF_STATUS_CHECKPOINT = 5,
  GF_STATUS_PANIC = 6,
} GfStatus;

/**
 * A loaded model. Only ever handled through a pointer.
 */
typedef struct GfModel GfModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null if none. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *gf_last_error(void);

/**
 * Clears the last error of this thread.
 */
void gf_clear_error(void);

/**
 * Static, NUL-terminated library version.
 */
const char *gf_version(void);

/**
 * Loads a checkpoint file into `*out`. Release it with [`gf_model_free`].
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable pointer.
 */
enum GfStatus gf_model_load(const char *path, struct GfModel **out);

/**
 * Releases a model. Null is accepted and ignored.
 *
 * # Safety
 * `model` must come from [`gf_model_load`] and not be freed twice.
 */
void gf_model_free(struct GfModel *model);

/**
 * Scores one text. Writes `GF_NUM_GENRES` genre probabilities to `genre_out`
 * and `GF_NUM_FRAMES` frame probabilities to `frames_out`; either output may
 * be null to skip it.
 *
 * # Safety
 * `model` must be a live handle, `text` a NUL-terminated string, and each
 * non-null output must have room for its row.
 */
enum GfStatus gf_model_predict(const struct GfModel *model,
                               const char *text,
                               double *genre_out,
                               double *frames_out);

/**
 * Loss weights for `n` class counts, written to `out[0..n]`. They satisfy
 * `w_l * c_l = hmean(c)` and sum to `n`.
 *
 * # Safety
 * `counts` must hold `n` readable values and `out` room for `n` values.
 */
enum GfStatus gf_class_weights(const uint64_t *counts, size_t n, double *out);

/**
 * Multiplies `row[label]` by `factor` and renormalizes into `out[0..n]`.
 * `row` and `out` may alias.
 *
 * # Safety
 * `row` must hold `n` readable values and `out` room for `n` values.
 */
enum GfStatus gf_reweight(const double *row, size_t n, size_t label, double factor, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GENREFRAME_H */
