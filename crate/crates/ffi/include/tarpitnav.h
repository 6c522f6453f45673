#ifndef TARPITNAV_H
#define TARPITNAV_H

/* Generated by cbindgen; do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum TnStatus {
  TN_STATUS_OK = 0,
  TN_STATUS_NULL_ARGUMENT = 1,
  TN_STATUS_INVALID_UTF8 = 2,
  TN_STATUS_PARSE = 3,
  TN_STATUS_MODEL = 4,
  TN_STATUS_TIME_REGRESSION = 5,
  TN_STATUS_INVALID_ARGUMENT = 6,
  TN_STATUS_PANIC = 99,
} TnStatus;

/**
 * Stuck-screen detector.
 */
typedef struct TnDetector TnDetector;

/**
 * Trained motif classifier.
 */
typedef struct TnModel TnModel;

typedef struct TnTarpitEvent {
  uint64_t stuck_since;
  uint64_t fired_at;
} TnTarpitEvent;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next call into this library on the same thread.
 */
const char *tn_last_error_message(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void tn_string_free(char *s);

/**
 * # Safety
 * `data`/`len` must be null/0 or a buffer returned by this library.
 */
void tn_bytes_free(uint8_t *data, size_t len);

/**
 * Loads a model archive written by `tarpitnav train`.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum TnStatus tn_model_load(const char *path, struct TnModel **out);

/**
 * # Safety
 * `model` must be null or a handle from [`tn_model_load`].
 */
void tn_model_free(struct TnModel *model);

/**
 * Ranks all motifs for a hierarchy document. Writes a JSON array of
 * `{"label", "probability"}` objects, most likely first.
 *
 * # Safety
 * `model` must be a live handle; strings NUL-terminated (`regions` may be
 * null); `out_json` writable.
 */
enum TnStatus tn_classify(const struct TnModel *model,
                          const char *hierarchy_xml,
                          const char *regions,
                          char **out_json);

/**
 * Renders a silhouette as a binary PPM (P6) image.
 *
 * # Safety
 * Strings NUL-terminated (`regions` may be null); out pointers writable.
 * Release the buffer with [`tn_bytes_free`].
 */
enum TnStatus tn_silhouette_render(const char *hierarchy_xml,
                                   const char *regions,
                                   uint32_t width,
                                   uint32_t height,
                                   uint8_t **out_data,
                                   size_t *out_len);

/**
 * Structure digest of a hierarchy document.
 *
 * # Safety
 * `hierarchy_xml` NUL-terminated; `out_digest` writable.
 */
enum TnStatus tn_signature_digest(const char *hierarchy_xml, uint64_t *out_digest);

struct TnDetector *tn_detector_new(uint64_t trigger_ms);

/**
 * # Safety
 * `det` must be null or a handle from [`tn_detector_new`].
 */
void tn_detector_free(struct TnDetector *det);

/**
 * Feeds one poll. `*out_fired` is set to 1 when the screen has just been
 * judged stuck, in which case `*out_event` (if non-null) is filled.
 *
 * # Safety
 * `det` must be live; strings NUL-terminated; `out_fired` writable.
 */
enum TnStatus tn_detector_observe(struct TnDetector *det,
                                  const char *activity,
                                  const char *window,
                                  uint64_t structure_digest,
                                  uint64_t at_ms,
                                  uint8_t *out_fired,
                                  struct TnTarpitEvent *out_event);

/**
 * # Safety
 * `det` must be null or live.
 */
void tn_detector_reset(struct TnDetector *det);

/**
 * Tarpit screens of a `screen_id,action_kind,at_ms` CSV trace, as a sorted
 * JSON array of screen ids.
 *
 * # Safety
 * `trace_csv` NUL-terminated; `out_json` writable.
 */
enum TnStatus tn_extract_tarpits(const char *trace_csv,
                                 size_t min_actions,
                                 uint64_t min_ms,
                                 size_t top_k,
                                 char **out_json);

/**
 * Trapezoid area under `values[0..len]` sampled every `dt`.
 *
 * # Safety
 * `values` must point to `len` doubles; `out` writable.
 */
enum TnStatus tn_auc(const double *values, size_t len, double dt, double *out);

/**
 * # Safety
 * `out` writable.
 */
enum TnStatus tn_percent_increase(double base, double candidate, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TARPITNAV_H */
