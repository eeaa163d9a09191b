#ifndef EXACTODE_H
#define EXACTODE_H

/* Generated by cbindgen from exactode-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes of every FFI call.
typedef enum ExactodeStatus {
  ExactodeStatus_Ok = 0,
  // A required pointer argument was null.
  ExactodeStatus_NullArgument = 1,
  // A string argument was not valid UTF-8.
  ExactodeStatus_InvalidUtf8 = 2,
  // The equation text did not parse or validate.
  ExactodeStatus_ParseError = 3,
  // The operation ran but did not certify (not exact / no factor /
  // verification failed); the JSON document carries the details.
  ExactodeStatus_NotCertified = 4,
  // Internal failure; see the last error message.
  ExactodeStatus_Internal = 5,
} ExactodeStatus;

// Opaque equation handle.
typedef struct ExactodeOde ExactodeOde;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parse an equation in the ODE file format (an `order:` line plus either an
// `equation:` line or `F0:`..`Fn:` lines, optional `base:` line). On success
// writes a fresh handle to `out`.
//
// # Safety
// `text` must point to a NUL-terminated string and `out` to a writable
// pointer slot. The returned handle must be released with `exactode_free`.
enum ExactodeStatus exactode_parse(const char *text, uint64_t seed, struct ExactodeOde **out);

// Release a handle returned by `exactode_parse`.
//
// # Safety
// `handle` must be a pointer from `exactode_parse` not yet freed; null is
// ignored.
void exactode_free(struct ExactodeOde *handle);

// Order of the equation, or -1 for a null handle.
//
// # Safety
// `handle` must be a live handle or null.
int32_t exactode_order(const struct ExactodeOde *handle);

// Exactness check. Writes the run document as JSON. Returns `Ok` when the
// equation is exact, `NotCertified` when conditions are violated.
//
// # Safety
// `handle` must be live; `out_json` must be writable.
enum ExactodeStatus exactode_check_json(const struct ExactodeOde *handle,
                                        uint64_t seed,
                                        char **out_json);

// Integrating-factor search. `xi` selects the shape: "auto", "t", "y",
// "y1", ..., or `expr:<text>`; null means "auto".
//
// # Safety
// `handle` must be live; `xi` may be null; `out_json` must be writable.
enum ExactodeStatus exactode_find_mu_json(const struct ExactodeOde *handle,
                                          const char *xi,
                                          uint64_t seed,
                                          char **out_json);

// Full pipeline: exactness, factor search when needed, first integral, and
// (when `verify` is nonzero) the five-trajectory drift protocol.
//
// # Safety
// `handle` must be live; `out_json` must be writable.
enum ExactodeStatus exactode_reduce_json(const struct ExactodeOde *handle,
                                         int32_t verify,
                                         uint64_t seed,
                                         char **out_json);

// Drift-check a candidate first integral along one trajectory started at
// the file's base point.
//
// # Safety
// `handle` and `psi` must be live; `out_json` must be writable.
enum ExactodeStatus exactode_verify_json(const struct ExactodeOde *handle,
                                         const char *psi,
                                         double span,
                                         double step,
                                         double drift_tol,
                                         uint64_t seed,
                                         char **out_json);

// Copy the last error message for this thread into `buf` (truncated to
// `len - 1` bytes, always NUL-terminated) and return the full message
// length in bytes.
//
// # Safety
// `buf` must point to `len` writable bytes, or be null (query mode).
size_t exactode_last_error_message(char *buf, size_t len);

// Release a string returned through an out-parameter.
//
// # Safety
// `s` must be a string produced by this library and not yet freed; null is
// ignored.
void exactode_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EXACTODE_H */
