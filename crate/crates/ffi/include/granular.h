#ifndef GRANULAR_H
#define GRANULAR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum GranularStatus {
  GRANULAR_STATUS_OK = 0,
  GRANULAR_STATUS_NULL_POINTER = 1,
  GRANULAR_STATUS_INVALID_UTF8 = 2,
  GRANULAR_STATUS_PARSE = 3,
  GRANULAR_STATUS_INVALID_ARGUMENT = 4,
  /**
   * The exact answer exists but is not a dyadic value, or not at this level.
   */
  GRANULAR_STATUS_NOT_REPRESENTABLE = 5,
  GRANULAR_STATUS_INTERNAL = 6,
} GranularStatus;

/**
 * A ±1 string.
 */
typedef struct GranularBitString GranularBitString;

/**
 * A signed permutation operator.
 */
typedef struct GranularOperator GranularOperator;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the next failing call.
 */
const char *granular_last_error(void);

/**
 * Library version as a static string.
 */
const char *granular_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void granular_string_free(char *s);

/**
 * Canonical `m/2^k` form of a dyadic literal.
 *
 * # Safety
 * `input` must be a nul-terminated string; `out_str` a valid pointer.
 */
enum GranularStatus granular_dyadic_normalize(const char *input, char **out_str);

/**
 * Exact cosine of an angle written `m/2^k pi`; `NotRepresentable` when it is not dyadic.
 *
 * # Safety
 * `angle` must be a nul-terminated string; `out_str` a valid pointer.
 */
enum GranularStatus granular_cos_exact(const char *angle, char **out_str);

/**
 * The angle with this cosine as a multiple of pi; `NotRepresentable` when incommensurable.
 *
 * # Safety
 * `cos` must be a nul-terminated string; `out_str` a valid pointer.
 */
enum GranularStatus granular_angle_to_pi(const char *cos, int32_t sin_sign, char **out_str);

/**
 * Champernowne segment of `len` entries from bit `offset`.
 *
 * # Safety
 * `out_handle` must be a valid pointer.
 */
enum GranularStatus granular_bitstring_champernowne(size_t len,
                                                    uint64_t offset,
                                                    struct GranularBitString **out_handle);

/**
 * A string from `len` entries of `+1`/`-1`.
 *
 * # Safety
 * `spins` must point to `len` readable bytes; `out_handle` must be valid.
 */
enum GranularStatus granular_bitstring_from_spins(const int8_t *spins,
                                                  size_t len,
                                                  struct GranularBitString **out_handle);

/**
 * # Safety
 * `h` must be a live handle or null.
 */
size_t granular_bitstring_len(const struct GranularBitString *h);

/**
 * Entry `i` as `+1` or `-1`.
 *
 * # Safety
 * `h` must be a live handle; `out_spin` valid.
 */
enum GranularStatus granular_bitstring_get(const struct GranularBitString *h,
                                           size_t i,
                                           int8_t *out_spin);

/**
 * Exact correlation of two strings of equal power-of-two length, as `m/2^k`.
 *
 * # Safety
 * Both handles must be live; `out_str` valid.
 */
enum GranularStatus granular_bitstring_correlation(const struct GranularBitString *a,
                                                   const struct GranularBitString *b,
                                                   char **out_str);

/**
 * Applies the flip rule at dyadic fraction `f`.
 *
 * # Safety
 * `h` must be live, `fraction` nul-terminated, `out_handle` valid.
 */
enum GranularStatus granular_bitstring_flip_fraction(const struct GranularBitString *h,
                                                     const char *fraction,
                                                     struct GranularBitString **out_handle);

/**
 * Entries as `0`/`1` characters, first entry first.
 *
 * # Safety
 * `h` must be live; `out_str` valid.
 */
enum GranularStatus granular_bitstring_to_string(const struct GranularBitString *h, char **out_str);

/**
 * # Safety
 * `h` must come from this library and not be freed twice. Null is ignored.
 */
void granular_bitstring_free(struct GranularBitString *h);

/**
 * The square root of `-Id` with index `1 <= index < 2^level`.
 *
 * # Safety
 * `out_handle` must be valid.
 */
enum GranularStatus granular_operator_root(uint32_t level,
                                           uint64_t index,
                                           struct GranularOperator **out_handle);

/**
 * Matrix product `a * b`.
 *
 * # Safety
 * Both handles must be live; `out_handle` valid.
 */
enum GranularStatus granular_operator_product(const struct GranularOperator *a,
                                              const struct GranularOperator *b,
                                              struct GranularOperator **out_handle);

/**
 * The operator applied to a string.
 *
 * # Safety
 * Both handles must be live; `out_handle` valid.
 */
enum GranularStatus granular_operator_apply(const struct GranularOperator *op,
                                            const struct GranularBitString *s,
                                            struct GranularBitString **out_handle);

/**
 * 1 for the identity, -1 for minus the identity, 0 otherwise.
 *
 * # Safety
 * `op` must be live or null.
 */
int32_t granular_operator_identity_sign(const struct GranularOperator *op);

/**
 * # Safety
 * `op` must come from this library and not be freed twice. Null is ignored.
 */
void granular_operator_free(struct GranularOperator *op);

/**
 * `(cos θ E_a + sin θ E_b)(1s)` for the triple containing `E_triple` at `level`.
 *
 * # Safety
 * `cos` must be nul-terminated; `out_handle` valid.
 */
enum GranularStatus granular_superpose(uint32_t level,
                                       uint64_t triple,
                                       const char *cos,
                                       int32_t sin_sign,
                                       bool strict,
                                       struct GranularBitString **out_handle);

/**
 * Measured EPR correlation `C(θ)` over the whole level-`level` grid, as `m/2^k`.
 *
 * # Safety
 * `cos` must be nul-terminated; `out_str` valid.
 */
enum GranularStatus granular_epr_correlation(uint32_t level,
                                             uint64_t offset,
                                             const char *cos,
                                             bool strict,
                                             char **out_str);

/**
 * Share of grid points where both counterfactual outcomes exist, as `m/2^k`.
 *
 * # Safety
 * `cos` must be nul-terminated; `out_str` valid.
 */
enum GranularStatus granular_epr_defined_fraction(uint32_t level,
                                                  uint64_t offset,
                                                  const char *cos,
                                                  char **out_str);

/**
 * CHSH report for the settings `(θ, 3θ, θ, θ)` as a JSON document.
 *
 * # Safety
 * `cos` must be nul-terminated; `out_json` valid.
 */
enum GranularStatus granular_epr_chsh(uint32_t level,
                                      uint64_t offset,
                                      const char *cos,
                                      bool strict,
                                      char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRANULAR_H */
