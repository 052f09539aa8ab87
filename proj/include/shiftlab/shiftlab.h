/* shiftlab C API.
 *
 * Every function that can fail returns sl_status; on failure a description is
 * available from sl_last_error() on the same thread until the next failing
 * call. Handles are opaque and owned by the caller. */
#ifndef SHIFTLAB_SHIFTLAB_H
#define SHIFTLAB_SHIFTLAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SL_API __declspec(dllexport)
#else
#define SL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sl_status {
  SL_OK = 0,
  SL_INVALID_ARGUMENT = 1,
  SL_SHAPE_MISMATCH = 2,
  SL_SINGULAR = 3,
  SL_NOT_CONVERGED = 4,
  SL_DIVERGED = 5,
  SL_DATA = 6,
  SL_IO = 7,
  SL_CONFIG = 8,
  SL_UNSUPPORTED = 9,
  SL_INTERNAL = 10
} sl_status;

SL_API const char* sl_version(void);
SL_API const char* sl_last_error(void);
SL_API const char* sl_status_name(sl_status status);

/* ---- experiments ---- */

typedef struct sl_experiment sl_experiment;
typedef struct sl_report sl_report;

/* Names accepted by sl_experiment_create; index past the end gives NULL. */
SL_API const char* sl_experiment_name_at(size_t index);

SL_API sl_status sl_experiment_create(const char* name, sl_experiment** out);
SL_API void sl_experiment_destroy(sl_experiment* exp);

/* Sets one setting from its text form. Unknown keys and unparsable values
 * give SL_CONFIG. */
SL_API sl_status sl_experiment_set(sl_experiment* exp, const char* key, const char* value);
SL_API int sl_experiment_accepts(const sl_experiment* exp, const char* key);
/* Accepted keys in sorted order; index past the end gives NULL. */
SL_API const char* sl_experiment_key_at(const sl_experiment* exp, size_t index);

/* Runs the experiment. The report must be released with sl_report_destroy. */
SL_API sl_status sl_experiment_run(const sl_experiment* exp, sl_report** out);

SL_API void sl_report_destroy(sl_report* report);
SL_API size_t sl_report_rows(const sl_report* report);
SL_API size_t sl_report_columns(const sl_report* report);
SL_API double sl_report_wall_seconds(const sl_report* report);

/* Text accessors copy a NUL-terminated string into buf (truncating to cap)
 * and store the full length, without the NUL, in *needed when non-NULL. */
SL_API sl_status sl_report_column_name(const sl_report* report, size_t col, char* buf,
                                       size_t cap, size_t* needed);
SL_API sl_status sl_report_cell(const sl_report* report, size_t row, size_t col, char* buf,
                                size_t cap, size_t* needed);
SL_API sl_status sl_report_csv(const sl_report* report, char* buf, size_t cap,
                               size_t* needed);

SL_API int sl_report_has_plot(const sl_report* report);
SL_API sl_status sl_report_write_csv(const sl_report* report, const char* path);
SL_API sl_status sl_report_write_svg(const sl_report* report, const char* path);

/* Rows whose "status" column reads "fail" (verify reports). */
SL_API size_t sl_report_failures(const sl_report* report);

/* ---- numerics on raw arrays ---- */

/* out[i] = x[(i + s) mod d]; out must hold d values. */
SL_API sl_status sl_circular_shift(const double* x, size_t d, size_t s, double* out);
SL_API sl_status sl_dc_component(const double* x, size_t d, double* out);

SL_API sl_status sl_ntk_fc(const double* z, const double* x, size_t d, double* out);
/* q == 0 means q = d. */
SL_API sl_status sl_cntk_gap(const double* z, const double* x, size_t d, size_t q, double* out);

/* Orbit margin of two classes stored row-major (n_pos x d and n_neg x d).
 * *separable is 0 when the DC ranges touch or overlap. */
SL_API sl_status sl_orbit_margin(const double* pos, size_t n_pos, const double* neg,
                                 size_t n_neg, size_t d, int* separable, double* margin);

#ifdef __cplusplus
}
#endif

#endif /* SHIFTLAB_SHIFTLAB_H */
