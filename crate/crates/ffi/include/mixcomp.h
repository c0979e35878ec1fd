#ifndef MIXCOMP_H
#define MIXCOMP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum MixStatus {
  MIX_STATUS_OK = 0,
  MIX_STATUS_NULL_POINTER = 1,
  MIX_STATUS_NOT_HERMITIAN = 2,
  MIX_STATUS_NOT_PSD = 3,
  MIX_STATUS_INVALID_TRACE = 4,
  MIX_STATUS_DIMENSION_MISMATCH = 5,
  MIX_STATUS_INVALID_PROBABILITIES = 6,
  MIX_STATUS_DOMAIN = 7,
  MIX_STATUS_NO_CONVERGENCE = 8,
  MIX_STATUS_OVERFLOW = 9,
  MIX_STATUS_OTHER = 10,
  MIX_STATUS_PANIC = 11,
} MixStatus;

// Opaque validated density operator.
typedef struct MixDensity MixDensity;

// Opaque validated ensemble.
typedef struct MixEnsemble MixEnsemble;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Builds a `dim x dim` density operator. `im` may be null for real matrices.
//
// # Safety
// `re` (and `im` when non-null) must point to `dim * dim` doubles; `out` must be writable.
enum MixStatus mix_density_new(size_t dim,
                               const double *re,
                               const double *im,
                               struct MixDensity **out);

// # Safety
// `h` must be null or come from [`mix_density_new`] and not be freed twice.
void mix_density_free(struct MixDensity *h);

// Dimension of the state, 0 for a null handle.
//
// # Safety
// `h` must be null or a live handle.
size_t mix_density_dim(const struct MixDensity *h);

// Von Neumann entropy in bits.
//
// # Safety
// `h` must be a live handle; `out` must be writable.
enum MixStatus mix_vn_entropy(const struct MixDensity *h, double *out);

// Squared fidelity F(a, b).
//
// # Safety
// `a`, `b` must be live handles; `out` must be writable.
enum MixStatus mix_fidelity(const struct MixDensity *a, const struct MixDensity *b, double *out);

// Builds an ensemble from `n` probabilities and `n` density handles.
// The states are copied; the caller keeps ownership of `states`.
//
// # Safety
// `probs` and `states` must each hold `n` entries of live handles; `out` must be writable.
enum MixStatus mix_ensemble_new(size_t n,
                                const double *probs,
                                const struct MixDensity *const *states,
                                struct MixEnsemble **out);

// # Safety
// `h` must be null or come from [`mix_ensemble_new`] and not be freed twice.
void mix_ensemble_free(struct MixEnsemble *h);

// Holevo quantity in bits.
//
// # Safety
// `h` must be a live handle; `out` must be writable.
enum MixStatus mix_holevo(const struct MixEnsemble *h, double *out);

// Entropy of the average state, the rate every source can reach.
//
// # Safety
// `h` must be a live handle; `out` must be writable.
enum MixStatus mix_upper_bound_rate(const struct MixEnsemble *h, double *out);

// Holevo quantity, below which no scheme can go.
//
// # Safety
// `h` must be a live handle; `out` must be writable.
enum MixStatus mix_lower_bound_rate(const struct MixEnsemble *h, double *out);

// Shannon entropy in bits of `n` probabilities.
//
// # Safety
// `p` must hold `n` doubles; `out` must be writable.
enum MixStatus mix_shannon_entropy(size_t n, const double *p, double *out);

// (Σ √(p_i q_i))².
//
// # Safety
// `p` and `q` must each hold `n` doubles; `out` must be writable.
enum MixStatus mix_classical_fidelity(size_t n, const double *p, const double *q, double *out);

// Purification rate of the flip source with parameter `epsilon` in [0, 1/2].
//
// # Safety
// `out` must be writable.
enum MixStatus mix_upsilon_rate(double epsilon, double *out);

// Three-message rate for coins with heads probabilities `alpha1`, `alpha2`
// chosen with priors `p1`, `1 - p1`.
//
// # Safety
// `out` must be writable.
enum MixStatus mix_xi_rate(double p1, double alpha1, double alpha2, double *out);

// Rate of the unitary-encoding scheme for the photographic-negative
// ensemble in dimension `d >= 3`.
//
// # Safety
// `out` must be writable.
enum MixStatus mix_photographic_negative_q(size_t d, double *out);

// Full rate report as a JSON string. Free it with [`mix_string_free`].
//
// # Safety
// `h` must be a live handle; `out` must be writable.
enum MixStatus mix_rate_report_json(const struct MixEnsemble *h, char **out);

// # Safety
// `s` must be null or come from this library and not be freed twice.
void mix_string_free(char *s);

// Message of the last failed call on this thread, or null after a success.
// The pointer stays valid until the next call on the same thread.
const char *mix_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MIXCOMP_H */
