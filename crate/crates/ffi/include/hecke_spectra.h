#ifndef HECKE_SPECTRA_H
#define HECKE_SPECTRA_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define HS_MEASURE_PLANCHEREL 0

#define HS_MEASURE_SATO_TATE 1

#define HS_SYMMETRY_U 0

#define HS_SYMMETRY_SO_EVEN 1

#define HS_SYMMETRY_SO_ODD 2

#define HS_SYMMETRY_O 3

#define HS_COUNT_NONEQUIVARIANT 0

#define HS_COUNT_EQUIVARIANT 1

/*
 Result codes of every fallible call.
 */
typedef enum HsStatus {
  HS_STATUS_OK = 0,
  HS_STATUS_NULL_POINTER = 1,
  HS_STATUS_INVALID_INPUT = 2,
  HS_STATUS_BUDGET_EXCEEDED = 3,
  HS_STATUS_NUMERIC = 4,
  HS_STATUS_PANIC = 5,
} HsStatus;

/*
 Spherical Hecke algebra of PGL(n) at one prime.
 */
typedef struct HsHecke HsHecke;

/*
 Symmetric Laurent polynomial on the torus.
 */
typedef struct HsLaurent HsLaurent;

/*
 Normalized measure on the tempered torus with its quadrature rule.
 */
typedef struct HsMeasure HsMeasure;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Creates the Hecke algebra of PGL(`n`) at the prime `p`.

 # Safety
 `out_handle` must be a valid pointer to writable storage for one handle.
 */
enum HsStatus hs_hecke_new(size_t n, uint64_t p, struct HsHecke **out_handle);

/*
 Releases a Hecke algebra handle. Null is ignored.

 # Safety
 `h` must come from [`hs_hecke_new`] and not be used afterwards.
 */
void hs_hecke_free(struct HsHecke *h);

/*
 Number of left cosets in the double coset of `omega`.

 # Safety
 `h` must be a live handle and `omega` must point to `len` integers.
 */
enum HsStatus hs_hecke_degree(const struct HsHecke *h,
                              const int64_t *omega,
                              size_t len,
                              uint64_t *out_degree);

/*
 Satake transform of the characteristic function of the double coset of `omega`.

 # Safety
 `h` must be a live handle, `omega` must point to `len` integers and
 `out_handle` must be writable.
 */
enum HsStatus hs_hecke_satake(const struct HsHecke *h,
                              const int64_t *omega,
                              size_t len,
                              struct HsLaurent **out_handle);

/*
 Evaluates `f` at the torus point with the given `n` angles.

 # Safety
 `f` must be a live handle, `angles` must point to `len` doubles and the
 outputs must be writable.
 */
enum HsStatus hs_laurent_eval(const struct HsLaurent *f,
                              const double *angles,
                              size_t len,
                              double *out_re,
                              double *out_im);

/*
 Releases a Laurent polynomial handle. Null is ignored.

 # Safety
 `f` must come from this library and not be used afterwards.
 */
void hs_laurent_free(struct HsLaurent *f);

/*
 Recovers the `len + 1` Satake parameters from `len` Hecke eigenvalues.

 # Safety
 The eigenvalue arrays must hold `len` doubles, the root arrays `len + 1`.
 */
enum HsStatus hs_satake_params_from_eigenvalues(uint64_t p,
                                                const double *lambda_re,
                                                const double *lambda_im,
                                                size_t len,
                                                double *roots_re,
                                                double *roots_im,
                                                double *out_residual);

/*
 Creates a normalized measure of kind `HS_MEASURE_*` on the rank-`n` torus.
 The prime is ignored for the Sato-Tate measure.

 # Safety
 `out_handle` must be writable.
 */
enum HsStatus hs_measure_new(uint32_t kind, size_t n, uint64_t p, struct HsMeasure **out_handle);

/*
 Normalized density at the point with `n` angles summing to zero mod 2 pi.

 # Safety
 `m` must be a live handle and `angles` must point to `len` doubles.
 */
enum HsStatus hs_measure_density(const struct HsMeasure *m,
                                 const double *angles,
                                 size_t len,
                                 double *out_value);

/*
 Integral of `f` against the measure.

 # Safety
 Both handles must be live and the outputs writable.
 */
enum HsStatus hs_measure_pair(const struct HsMeasure *m,
                              const struct HsLaurent *f,
                              double *out_re,
                              double *out_im);

/*
 Releases a measure handle. Null is ignored.

 # Safety
 `m` must come from [`hs_measure_new`] and not be used afterwards.
 */
void hs_measure_free(struct HsMeasure *m);

/*
 Pairing of the one-level density of symmetry `HS_SYMMETRY_*` with the
 Fejer-type test function of Fourier support `[-beta, beta]`.

 # Safety
 `out_value` must be writable.
 */
enum HsStatus hs_pair_density(uint32_t symmetry, double beta, double *out_value);

/*
 Weyl-law main term for PGL(`n`) acting on an ambient space of dimension `ambient`.

 # Safety
 `out_value` must be writable.
 */
enum HsStatus hs_main_term(uint32_t kind,
                           uint32_t n,
                           uint32_t ambient,
                           double vol,
                           uint32_t d_sigma,
                           uint32_t n_z,
                           double mu,
                           double *out_value);

/*
 Message for the last failed call on this thread, or null. The pointer
 stays valid until the next call on the same thread.
 */
const char *hs_last_error_message(void);

/*
 Library version as a static nul-terminated string.
 */
const char *hs_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HECKE_SPECTRA_H */
