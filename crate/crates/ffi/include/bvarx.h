#ifndef BVARX_H
#define BVARX_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define BVARX_OK 0

#define BVARX_ERR_NULL 1

// Invalid argument or configuration; same value as the CLI exit code.
#define BVARX_ERR_INVALID 2

#define BVARX_ERR_DATA 3

#define BVARX_ERR_NUMERICAL 4

#define BVARX_ERR_PANIC 5

// Opaque monthly data panel.
typedef struct BvarxPanel BvarxPanel;

// Opaque conjugate posterior.
typedef struct BvarxPosterior BvarxPosterior;

// Prior hyperparameter tuple.
typedef struct BvarxHyper {
  size_t p;
  double lambda0;
  double lambda1;
  double lambda3;
  double lambda4;
  double lambda5;
  double mu5;
  double mu6;
} BvarxHyper;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty if none. The
// pointer stays valid until the next failing call on the same thread.
const char *bvarx_last_error(void);

// Library version as a static NUL-terminated string.
const char *bvarx_version(void);

// Parse wide CSV text (first column `YYYY-MM`) into a panel with the given
// endogenous and exogenous columns.
//
// # Safety
// `csv` must be a NUL-terminated string; `endog`/`exog` must point to
// `n_endog`/`n_exog` NUL-terminated strings; `out` must be writable.
int bvarx_panel_from_csv(const char *csv,
                         const char *const *endog,
                         size_t n_endog,
                         const char *const *exog,
                         size_t n_exog,
                         struct BvarxPanel **out);

// # Safety
// `panel` must come from [`bvarx_panel_from_csv`] and not be used afterwards.
void bvarx_panel_free(struct BvarxPanel *panel);

// Rows, endogenous and exogenous column counts.
//
// # Safety
// `panel` must be a live handle; the output pointers must be writable.
int bvarx_panel_shape(const struct BvarxPanel *panel,
                      size_t *rows,
                      size_t *n_endog,
                      size_t *n_exog);

// Fit the conjugate posterior on the whole panel.
//
// # Safety
// `panel` must be a live handle, `hyper` readable and `out` writable.
int bvarx_fit(const struct BvarxPanel *panel,
              const struct BvarxHyper *hyper,
              struct BvarxPosterior **out);

// # Safety
// `post` must come from [`bvarx_fit`] and not be used afterwards.
void bvarx_posterior_free(struct BvarxPosterior *post);

// Posterior-mean coefficient matrix, `d × m` row-major with
// `d = 1 + m·p + k` (intercept row, lag blocks, exogenous rows).
//
// # Safety
// `post` must be a live handle; `out` must hold `capacity` doubles.
int bvarx_posterior_coefficients(const struct BvarxPosterior *post,
                                 double *out,
                                 size_t capacity,
                                 size_t *rows,
                                 size_t *cols);

// Point path and credible bounds `H × m` (row-major) with exogenous
// values held at their last `H` observations. `lower_bounds`/`upper_bounds`
// give each variable's support and may be NULL for an unbounded one.
//
// # Safety
// Handles must be live; the bound arrays, when non-NULL, hold `m` doubles;
// the three output buffers hold `horizon · m` doubles each.
int bvarx_forecast(const struct BvarxPosterior *post,
                   const struct BvarxPanel *panel,
                   size_t horizon,
                   size_t draws,
                   double gamma,
                   uint64_t seed,
                   const double *lower_bounds,
                   const double *upper_bounds,
                   double *point,
                   double *lower,
                   double *upper);

// # Safety
// `actual` and `forecast` hold `n` doubles; `out` is writable.
int bvarx_rmse(const double *actual, const double *forecast, size_t n, double *out);

// Symmetric MAPE as a fraction in `[0, 2]`, or times 100 when `percent` is non-zero.
//
// # Safety
// `actual` and `forecast` hold `n` doubles; `out` is writable.
int bvarx_smape(const double *actual, const double *forecast, size_t n, int percent, double *out);

// # Safety
// `actual` and `forecast` hold `n` doubles, `insample` holds `n_insample`;
// `out` is writable.
int bvarx_mase(const double *actual,
               const double *forecast,
               size_t n,
               const double *insample,
               size_t n_insample,
               size_t period,
               double *out);

// # Safety
// `actual` and `forecast` hold `n` doubles; `out` is writable.
int bvarx_theil_u1(const double *actual, const double *forecast, size_t n, double *out);

// # Safety
// `actual` and `forecast` hold `n` doubles; `out` is writable.
int bvarx_mdape(const double *actual, const double *forecast, size_t n, double *out);

// Multivariate Diebold–Mariano test on a `t × k` row-major loss matrix with
// adjacent pairing and the small-sample factor.
//
// # Safety
// `losses` holds `t · k` doubles; `statistic` and `p_value` are writable.
int bvarx_dm_test(const double *losses,
                  size_t t,
                  size_t k,
                  size_t q,
                  double *statistic,
                  double *p_value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BVARX_H */
