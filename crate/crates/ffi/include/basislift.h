#ifndef BASISLIFT_H
#define BASISLIFT_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// How a finite matrix continues past its last row when streamed.
typedef enum BlExtension {
  // The stream ends after the matrix rows.
  BL_EXTENSION_ZERO_PADDED = 0,
  // The matrix rows are followed by unit rows `e_n, e_{n+1}, ...`.
  BL_EXTENSION_IDENTITY = 1,
} BlExtension;

typedef enum BlStatus {
  BL_STATUS_OK = 0,
  BL_STATUS_NULL_POINTER = 1,
  BL_STATUS_INVALID_ARGUMENT = 2,
  BL_STATUS_NOT_PRIME = 3,
  BL_STATUS_NOT_A_PRIME_POWER = 4,
  BL_STATUS_SHAPE_MISMATCH = 5,
  BL_STATUS_NOT_A_BASIS_MOD_P = 6,
  BL_STATUS_STABILIZATION_TIMEOUT = 7,
  BL_STATUS_STREAM_ERROR = 8,
  BL_STATUS_OVERFLOW = 9,
  BL_STATUS_PARSE_ERROR = 10,
  BL_STATUS_PANIC = 11,
  BL_STATUS_INTERNAL = 12,
} BlStatus;

typedef struct BlLift BlLift;

typedef struct BlMatrix BlMatrix;

typedef struct BlModulus BlModulus;

typedef struct BlStream BlStream;

// Outcome of checking a lift.
typedef struct BlVerifyReport {
  bool all_ok;
  bool units_ok;
  bool unimodular_ok;
  bool basis_mod_q_ok;
  // Number of rows whose congruence check failed.
  size_t congruence_failures;
} BlVerifyReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. The pointer is
// valid until the next failing call on the same thread.
const char *bl_last_error_message(void);

// Frees a string returned by this library.
//
// # Safety
// `s` must be NULL or a pointer returned by a `bl_*_to_*` function.
void bl_string_free(char *s);

// Modulus `p^nu` with `p` checked for primality.
//
// # Safety
// `out` must be a valid pointer.
enum BlStatus bl_modulus_new(uint64_t p, uint32_t nu, struct BlModulus **out);

// Modulus from a prime power `q`; composite non-prime-powers are rejected.
//
// # Safety
// `out` must be a valid pointer.
enum BlStatus bl_modulus_from_prime_power(uint64_t q, struct BlModulus **out);

// # Safety
// `m` must be a valid handle; `out` a valid pointer.
enum BlStatus bl_modulus_value(const struct BlModulus *m, int64_t *out);

// # Safety
// `m` must be NULL or a handle from this library, not used afterwards.
void bl_modulus_free(struct BlModulus *m);

// Matrix from `rows * cols` row-major entries.
//
// # Safety
// `entries` must point to `rows * cols` values (may be NULL if that is 0);
// `out` must be a valid pointer.
enum BlStatus bl_matrix_new(size_t rows,
                            size_t cols,
                            const int64_t *entries,
                            struct BlMatrix **out);

// Matrix from the text format: a `rows cols` header then one row per line.
//
// # Safety
// `text` must be a NUL-terminated string; `out` a valid pointer.
enum BlStatus bl_matrix_parse(const char *text, struct BlMatrix **out);

// # Safety
// `m` must be a valid handle.
size_t bl_matrix_rows(const struct BlMatrix *m);

// # Safety
// `m` must be a valid handle.
size_t bl_matrix_cols(const struct BlMatrix *m);

// # Safety
// `m` must be a valid handle; `out` a valid pointer.
enum BlStatus bl_matrix_get(const struct BlMatrix *m, size_t row, size_t col, int64_t *out);

// Matrix in the text format. Free with [`bl_string_free`].
//
// # Safety
// `m` must be a valid handle.
char *bl_matrix_to_string(const struct BlMatrix *m);

// # Safety
// `m` must be NULL or a handle from this library, not used afterwards.
void bl_matrix_free(struct BlMatrix *m);

// Lifts the rows of `a` with the finite engine.
//
// # Safety
// `a` and `modulus` must be valid handles; `out` a valid pointer.
enum BlStatus bl_lift_finite(const struct BlMatrix *a,
                             const struct BlModulus *modulus,
                             struct BlLift **out);

// Lifts the rows of `a` with the streaming engine on the zero-padded stream.
//
// # Safety
// `a` and `modulus` must be valid handles; `out` a valid pointer.
enum BlStatus bl_lift_stream(const struct BlMatrix *a,
                             const struct BlModulus *modulus,
                             struct BlLift **out);

// Number of lifted rows.
//
// # Safety
// `lift` must be a valid handle.
size_t bl_lift_rows(const struct BlLift *lift);

// Copy of the lifted basis. Free with [`bl_matrix_free`].
//
// # Safety
// `lift` must be a valid handle; `out` a valid pointer.
enum BlStatus bl_lift_basis(const struct BlLift *lift, struct BlMatrix **out);

// Unit multiplier of row `row`.
//
// # Safety
// `lift` must be a valid handle; `out` a valid pointer.
enum BlStatus bl_lift_unit(const struct BlLift *lift, size_t row, int64_t *out);

// Pivot column of row `row`.
//
// # Safety
// `lift` must be a valid handle; `out` a valid pointer.
enum BlStatus bl_lift_pivot(const struct BlLift *lift, size_t row, size_t *out);

// Checks the lift against its input with exact arithmetic.
//
// # Safety
// `lift` must be a valid handle; `out` a valid pointer.
enum BlStatus bl_lift_verify(const struct BlLift *lift, struct BlVerifyReport *out);

// The lift as a structured JSON document. Free with [`bl_string_free`].
//
// # Safety
// `lift` must be a valid handle.
char *bl_lift_to_json(const struct BlLift *lift);

// # Safety
// `lift` must be NULL or a handle from this library, not used afterwards.
void bl_lift_free(struct BlLift *lift);

// Streaming elimination over the rows of `a`, continued per `extension`.
//
// # Safety
// `a` and `modulus` must be valid handles; `out` a valid pointer.
enum BlStatus bl_stream_new(const struct BlMatrix *a,
                            const struct BlModulus *modulus,
                            enum BlExtension extension,
                            struct BlStream **out);

// Executes one elimination loop.
//
// # Safety
// `s` must be a valid handle.
enum BlStatus bl_stream_step(struct BlStream *s);

// # Safety
// `s` must be a valid handle.
size_t bl_stream_loops(const struct BlStream *s);

// Length of the longest prefix of rows reported stable.
//
// # Safety
// `s` must be a valid handle.
size_t bl_stream_stable_prefix(const struct BlStream *s);

// Runs until the first `rows` rows are stable or `max_loops` loops have run.
//
// # Safety
// `s` must be a valid handle; `out` a valid pointer.
enum BlStatus bl_stream_run_until(struct BlStream *s,
                                  size_t rows,
                                  size_t max_loops,
                                  struct BlLift **out);

// # Safety
// `s` must be NULL or a handle from this library, not used afterwards.
void bl_stream_free(struct BlStream *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BASISLIFT_H */
