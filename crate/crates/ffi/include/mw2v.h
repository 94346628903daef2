#ifndef MW2V_H
#define MW2V_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of a fallible call.
 */
typedef enum Mw2vStatus {
  MW2V_STATUS_OK = 0,
  MW2V_STATUS_NULL_POINTER = 1,
  MW2V_STATUS_INVALID_UTF8 = 2,
  MW2V_STATUS_IO = 3,
  /**
   * Malformed file, bad magic, unsupported version or truncation.
   */
  MW2V_STATUS_FORMAT = 4,
  MW2V_STATUS_CHECKSUM = 5,
  MW2V_STATUS_UNKNOWN_SLICE = 6,
  MW2V_STATUS_UNKNOWN_WORD = 7,
  MW2V_STATUS_INVALID_ARGUMENT = 8,
  /**
   * The output buffer is shorter than required.
   */
  MW2V_STATUS_BUFFER_TOO_SMALL = 9,
  /**
   * A Rust panic was caught at the boundary.
   */
  MW2V_STATUS_PANIC = 10,
  MW2V_STATUS_OTHER = 11,
} Mw2vStatus;

/**
 * Opaque model handle.
 */
typedef struct Mw2vModel Mw2vModel;

/**
 * One neighbour returned by [`mw2v_model_neighbors`].
 */
typedef struct Mw2vNeighbor {
  /**
   * Global word index; see [`mw2v_model_word`].
   */
  uint32_t word_index;
  double cosine;
} Mw2vNeighbor;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Opens a binary model, a TSV export directory or a JSON export and
 * stores a new handle in `*out`.
 *
 * # Safety
 * `path` is a NUL-terminated string and `out` a writable pointer.
 */
enum Mw2vStatus mw2v_model_load(const char *path, struct Mw2vModel **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `model` is null or a handle from [`mw2v_model_load`] not yet freed.
 */
void mw2v_model_free(struct Mw2vModel *model);

/**
 * Embedding dimension, 0 for a null handle.
 *
 * # Safety
 * `model` is null or a live handle.
 */
size_t mw2v_model_dim(const struct Mw2vModel *model);

/**
 * Size of the global vocabulary, 0 for a null handle.
 *
 * # Safety
 * `model` is null or a live handle.
 */
size_t mw2v_model_vocab_size(const struct Mw2vModel *model);

/**
 * # Safety
 * `model` is null or a live handle.
 */
size_t mw2v_model_slice_count(const struct Mw2vModel *model);

/**
 * Id of slice `index`, or null when out of range.
 *
 * # Safety
 * `model` is null or a live handle.
 */
const char *mw2v_model_slice_id(const struct Mw2vModel *model, size_t index);

/**
 * Word with global index `index`, or null when out of range.
 *
 * # Safety
 * `model` is null or a live handle.
 */
const char *mw2v_model_word(const struct Mw2vModel *model, uint32_t index);

/**
 * Copies the composed vector of `word` in `slice` into `out`, which holds
 * `len >= dim` floats.
 *
 * # Safety
 * Strings are NUL-terminated; `out` points to `len` writable floats.
 */
enum Mw2vStatus mw2v_model_vector(const struct Mw2vModel *model,
                                  const char *slice,
                                  const char *word,
                                  float *out,
                                  size_t len);

/**
 * Up to `k` nearest neighbours by cosine of `word` in `slice`, searched
 * in `target_slice` (null means `slice`). Writes at most `capacity`
 * entries to `out` and the number written to `*count`.
 *
 * # Safety
 * Strings are null or NUL-terminated as documented; `out` points to
 * `capacity` writable entries and `count` is writable.
 */
enum Mw2vStatus mw2v_model_neighbors(const struct Mw2vModel *model,
                                     const char *slice,
                                     const char *word,
                                     const char *target_slice,
                                     size_t k,
                                     bool exclude_query,
                                     struct Mw2vNeighbor *out,
                                     size_t capacity,
                                     size_t *count);

/**
 * Message of the last failed call on this thread, or null. Valid until
 * the next failing call on the same thread.
 */
const char *mw2v_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MW2V_H */
