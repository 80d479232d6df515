#ifndef LCM_SUNFLOWER_H
#define LCM_SUNFLOWER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes shared by every function.
typedef enum LcmsfStatus {
  LCMSF_STATUS_OK = 0,
  LCMSF_STATUS_INVALID_ARGUMENT = 1,
  LCMSF_STATUS_NULL_POINTER = 2,
  LCMSF_STATUS_OUT_OF_RANGE = 3,
  LCMSF_STATUS_RESOURCE = 4,
  LCMSF_STATUS_DOMAIN = 5,
  LCMSF_STATUS_PARSE = 6,
  LCMSF_STATUS_CAP_EXCEEDED = 7,
  LCMSF_STATUS_SHORTFALL = 8,
  LCMSF_STATUS_GROUND_OVERFLOW = 9,
  LCMSF_STATUS_IO = 10,
  LCMSF_STATUS_BUFFER_TOO_SMALL = 11,
  LCMSF_STATUS_PANIC = 99,
} LcmsfStatus;

// A family of subsets of a ground set of at most 64 elements.
typedef struct LcmsfFamily LcmsfFamily;

// Primes up to a limit.
typedef struct LcmsfPrimeTable LcmsfPrimeTable;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. The pointer is
// valid until the next call into this library on the same thread.
const char *lcmsf_last_error(void);

// Releases a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void lcmsf_string_free(char *s);

// Builds a family from bitmasks over `ground_size` elements.
//
// # Safety
// `masks` must point to `len` values; `out` must be writable.
enum LcmsfStatus lcmsf_family_new(size_t ground_size,
                                  const uint64_t *masks,
                                  size_t len,
                                  struct LcmsfFamily **out);

// Parses a family from its JSON form
// `{"ground_size": n, "members": [[...], ...]}`.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum LcmsfStatus lcmsf_family_from_json(const char *json, struct LcmsfFamily **out);

// # Safety
// `family` must be NULL or a handle from this library, freed once.
void lcmsf_family_free(struct LcmsfFamily *family);

// Number of members, or 0 for NULL.
//
// # Safety
// `family` must be NULL or a live handle.
size_t lcmsf_family_len(const struct LcmsfFamily *family);

// Ground set size, or 0 for NULL.
//
// # Safety
// `family` must be NULL or a live handle.
size_t lcmsf_family_ground_size(const struct LcmsfFamily *family);

// Copies the member bitmasks (ascending) into `buf`. `written` receives
// the member count even when `capacity` is too small.
//
// # Safety
// `buf` must have room for `capacity` values; `written` must be writable.
enum LcmsfStatus lcmsf_family_members(const struct LcmsfFamily *family,
                                      uint64_t *buf,
                                      size_t capacity,
                                      size_t *written);

// JSON form of the family, to be released with [`lcmsf_string_free`].
//
// # Safety
// `family` must be a live handle; `out` must be writable.
enum LcmsfStatus lcmsf_family_to_json(const struct LcmsfFamily *family, char **out);

// Looks for `k` members forming a sunflower (or, with `cosunflower`
// nonzero, a cosunflower). On success `found` is set, and when it is 1
// the member indices are written to `witness`, which must hold `k`
// entries.
//
// # Safety
// `family` must be a live handle; `witness` must have room for `k`
// values; `found` must be writable.
enum LcmsfStatus lcmsf_find_sunflower(const struct LcmsfFamily *family,
                                      size_t k,
                                      int cosunflower,
                                      size_t *witness,
                                      int *found);

// Blows `family` up over consecutive blocks of the given sizes followed
// by `rest` unused elements.
//
// # Safety
// `block_sizes` must point to `nblocks` values; `out` must be writable.
enum LcmsfStatus lcmsf_blow_up(const struct LcmsfFamily *family,
                               const size_t *block_sizes,
                               size_t nblocks,
                               size_t rest,
                               struct LcmsfFamily **out);

// Largest k-sunflower-free (or k-cosunflower-free) family on `n` points.
// `exact` is 0 when the node budget ran out. `witness` may be NULL; if
// not, it receives a new handle holding an optimal family.
//
// # Safety
// `value` and `exact` must be writable; `witness` must be NULL or
// writable.
enum LcmsfStatus lcmsf_max_sunflower_free(size_t n,
                                          size_t k,
                                          uint64_t budget,
                                          int cosunflower,
                                          size_t *value,
                                          int *exact,
                                          struct LcmsfFamily **witness);

// Sets `is_free` to 1 when the distinct positive integers in `xs` contain
// no k elements with all pairwise lcms equal.
//
// # Safety
// `xs` must point to `len` values; `is_free` must be writable.
enum LcmsfStatus lcmsf_is_lcm_k_free(const uint64_t *xs, size_t len, size_t k, int *is_free);

// Exact `f_k(N)` as JSON: `{"N", "k", "value": "p/q", "set", "exact",
// "nodes"}`.
//
// # Safety
// `out` must be writable.
enum LcmsfStatus lcmsf_exact_fk_json(uint64_t n, size_t k, uint64_t budget, char **out);

// # Safety
// `out` must be writable.
enum LcmsfStatus lcmsf_prime_table_new(uint64_t limit, struct LcmsfPrimeTable **out);

// # Safety
// `table` must be NULL or a handle from this library, freed once.
void lcmsf_prime_table_free(struct LcmsfPrimeTable *table);

// Number of primes in the table, or 0 for NULL.
//
// # Safety
// `table` must be NULL or a live handle.
size_t lcmsf_prime_table_len(const struct LcmsfPrimeTable *table);

// Copies the primes into `buf`; `written` receives the count even when
// `capacity` is too small.
//
// # Safety
// `buf` must have room for `capacity` values; `written` must be writable.
enum LcmsfStatus lcmsf_prime_table_primes(const struct LcmsfPrimeTable *table,
                                          uint64_t *buf,
                                          size_t capacity,
                                          size_t *written);

// `Σ 1/p` over primes `lo < p ≤ hi` of the table, in floating point.
//
// # Safety
// `table` must be a live handle; `out` must be writable.
enum LcmsfStatus lcmsf_prime_harmonic_sum(const struct LcmsfPrimeTable *table,
                                          double lo,
                                          double hi,
                                          double *out);

// `H_ℓ(N)`: `Σ 1/n` over squarefree `n ≤ N` with exactly `ℓ` prime
// factors. `value` receives the float sum; if `exact` is not NULL and
// `N ≤ 100000` it receives the exact value as a `"p/q"` string.
//
// # Safety
// `value` must be writable; `exact` must be NULL or writable.
enum LcmsfStatus lcmsf_h_ell(uint64_t n, uint32_t ell, double *value, char **exact);

// `G(z)` truncated at the primes of `table`, with a bound on the
// truncation error. Requires `0 ≤ z < 2`.
//
// # Safety
// `table` must be a live handle; `value` and `tail_bound` must be
// writable.
enum LcmsfStatus lcmsf_g_constant(const struct LcmsfPrimeTable *table,
                                  double z,
                                  double *value,
                                  double *tail_bound);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LCM_SUNFLOWER_H */
