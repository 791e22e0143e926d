#ifndef FCM_H
#define FCM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FcmStatus {
  FCM_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  FCM_STATUS_NULL_POINTER = 1,
  /**
   * Bad key, value, index or string encoding.
   */
  FCM_STATUS_INVALID_ARGUMENT = 2,
  FCM_STATUS_IO = 3,
  /**
   * Encoding or decoding failed, including malformed containers.
   */
  FCM_STATUS_CODEC = 4,
  /**
   * BD-rate curves share no quality range.
   */
  FCM_STATUS_NO_OVERLAP = 5,
  FCM_STATUS_PANIC = 6,
} FcmStatus;

/**
 * Owned byte buffer handle.
 */
typedef struct FcmBuffer FcmBuffer;

/**
 * Encoder settings handle.
 */
typedef struct FcmConfig FcmConfig;

/**
 * Feature sequence handle.
 */
typedef struct FcmSequence FcmSequence;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the next
 * failing call on the same thread.
 */
const char *fcm_last_error(void);

/**
 * Static, NUL-terminated library version.
 */
const char *fcm_version(void);

/**
 * Default settings: pyramid_fuse transform, lossless codec, 10-bit, alpha 0.1.
 */
enum FcmStatus fcm_config_new(struct FcmConfig **out);

/**
 * Sets one `key`/`value` pair using the config-file key names
 * (`transform`, `codec`, `qshift`, `ratio`, `alpha`, ...).
 */
enum FcmStatus fcm_config_set(struct FcmConfig *cfg, const char *key, const char *value);

void fcm_config_free(struct FcmConfig *cfg);

enum FcmStatus fcm_sequence_load(const char *path, struct FcmSequence **out);

/**
 * Parses an in-memory feature file.
 */
enum FcmStatus fcm_sequence_from_bytes(const uint8_t *data, size_t len, struct FcmSequence **out);

enum FcmStatus fcm_sequence_save(const struct FcmSequence *seq, const char *path);

/**
 * Number of feature sets (timesteps).
 */
size_t fcm_sequence_len(const struct FcmSequence *seq);

/**
 * Number of layers per feature set.
 */
size_t fcm_sequence_layer_count(const struct FcmSequence *seq);

enum FcmStatus fcm_sequence_layer_shape(const struct FcmSequence *seq,
                                        size_t layer,
                                        size_t *channels,
                                        size_t *height,
                                        size_t *width);

/**
 * Borrows the CHW data of one layer at timestep `t`. The pointer stays valid
 * while `seq` is alive.
 */
enum FcmStatus fcm_sequence_layer_data(const struct FcmSequence *seq,
                                       size_t t,
                                       size_t layer,
                                       const float **data,
                                       size_t *len);

void fcm_sequence_free(struct FcmSequence *seq);

/**
 * Encodes `seq` into a container. `cfg` may be null for defaults.
 */
enum FcmStatus fcm_encode(const struct FcmSequence *seq,
                          const struct FcmConfig *cfg,
                          struct FcmBuffer **out);

/**
 * Decodes a container. `external_decode` is the decode command template
 * for streams written by the external codec, otherwise it may be null.
 */
enum FcmStatus fcm_decode(const uint8_t *data,
                          size_t len,
                          const char *external_decode,
                          struct FcmSequence **out);

const uint8_t *fcm_buffer_data(const struct FcmBuffer *buf);

size_t fcm_buffer_len(const struct FcmBuffer *buf);

void fcm_buffer_free(struct FcmBuffer *buf);

/**
 * BD-rate in percent of the test curve against the reference curve. Each
 * curve is given as parallel rate/quality arrays with strictly increasing
 * rates.
 */
enum FcmStatus fcm_bd_rate(const double *ref_rates,
                           const double *ref_qualities,
                           size_t ref_len,
                           const double *test_rates,
                           const double *test_qualities,
                           size_t test_len,
                           double *out_percent);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FCM_H */
