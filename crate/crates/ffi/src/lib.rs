//! C ABI over `bvarx`.
//!
//! Objects cross the boundary as opaque handles created and destroyed by
//! paired `*_new`/`*_free` style functions. Every fallible call returns a
//! status code (`BVARX_OK` on success); the message for the most recent
//! failure on the calling thread is available from [`bvarx_last_error`].
//! Matrices are passed as row-major `double` buffers.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bvarx::bvar::{fit, MniwPosterior, SzHyper};
use bvarx::compare::{dm_multivariate, DmOptions, Pairing};
use bvarx::error::Category;
use bvarx::forecast::{forecast, ForecastOptions, Support, SupportBounds};
use bvarx::linalg::Mat;
use bvarx::metrics::{self, SmapeMode};
use bvarx::panel::{load_panel_from_strs, pinned_exog, Panel, Schema};

pub const BVARX_OK: c_int = 0;
pub const BVARX_ERR_NULL: c_int = 1;
/// Invalid argument or configuration; same value as the CLI exit code.
pub const BVARX_ERR_INVALID: c_int = 2;
pub const BVARX_ERR_DATA: c_int = 3;
pub const BVARX_ERR_NUMERICAL: c_int = 4;
pub const BVARX_ERR_PANIC: c_int = 5;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &bvarx::Error) -> c_int {
    match e.category() {
        Category::Config => BVARX_ERR_INVALID,
        Category::Data => BVARX_ERR_DATA,
        Category::Numerical => BVARX_ERR_NUMERICAL,
    }
}

enum Fail {
    Null(&'static str),
    Lib(bvarx::Error),
}

impl From<bvarx::Error> for Fail {
    fn from(e: bvarx::Error) -> Self {
        Fail::Lib(e)
    }
}

/// Run `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> c_int {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BVARX_OK,
        Ok(Err(Fail::Null(what))) => {
            set_error(&format!("null pointer: {what}"));
            BVARX_ERR_NULL
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            BVARX_ERR_PANIC
        }
    }
}

unsafe fn slice<'a>(p: *const f64, n: usize, what: &'static str) -> Result<&'a [f64], Fail> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn string(p: *const c_char, what: &'static str) -> Result<String, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(str::to_string)
        .map_err(|_| Fail::Lib(bvarx::Error::InvalidArgument(format!("{what} is not valid UTF-8"))))
}

unsafe fn strings(p: *const *const c_char, n: usize, what: &'static str) -> Result<Vec<String>, Fail> {
    if n == 0 {
        return Ok(Vec::new());
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    std::slice::from_raw_parts(p, n).iter().map(|s| string(*s, what)).collect()
}

/// Message for the last failed call on this thread; empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bvarx_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bvarx_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Opaque monthly data panel.
pub struct BvarxPanel(Panel);

/// Opaque conjugate posterior.
pub struct BvarxPosterior(MniwPosterior);

/// Prior hyperparameter tuple.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BvarxHyper {
    pub p: usize,
    pub lambda0: f64,
    pub lambda1: f64,
    pub lambda3: f64,
    pub lambda4: f64,
    pub lambda5: f64,
    pub mu5: f64,
    pub mu6: f64,
}

impl From<BvarxHyper> for SzHyper {
    fn from(h: BvarxHyper) -> Self {
        SzHyper::new(h.p, h.lambda0, h.lambda1, h.lambda3, h.lambda4, h.lambda5, h.mu5, h.mu6)
    }
}

/// Parse wide CSV text (first column `YYYY-MM`) into a panel with the given
/// endogenous and exogenous columns.
///
/// # Safety
/// `csv` must be a NUL-terminated string; `endog`/`exog` must point to
/// `n_endog`/`n_exog` NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bvarx_panel_from_csv(
    csv: *const c_char,
    endog: *const *const c_char,
    n_endog: usize,
    exog: *const *const c_char,
    n_exog: usize,
    out: *mut *mut BvarxPanel,
) -> c_int {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let text = string(csv, "csv")?;
        let schema = Schema { endogenous: strings(endog, n_endog, "endog")?, exogenous: strings(exog, n_exog, "exog")? };
        let panel = load_panel_from_strs(&[&text], &schema)?;
        *out = Box::into_raw(Box::new(BvarxPanel(panel)));
        Ok(())
    })
}

/// # Safety
/// `panel` must come from [`bvarx_panel_from_csv`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bvarx_panel_free(panel: *mut BvarxPanel) {
    if !panel.is_null() {
        drop(Box::from_raw(panel));
    }
}

/// Rows, endogenous and exogenous column counts.
///
/// # Safety
/// `panel` must be a live handle; the output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn bvarx_panel_shape(
    panel: *const BvarxPanel,
    rows: *mut usize,
    n_endog: *mut usize,
    n_exog: *mut usize,
) -> c_int {
    guard(|| {
        let p = &panel.as_ref().ok_or(Fail::Null("panel"))?.0;
        *out_ref(rows, "rows")? = p.len();
        *out_ref(n_endog, "n_endog")? = p.m();
        *out_ref(n_exog, "n_exog")? = p.k();
        Ok(())
    })
}

/// Fit the conjugate posterior on the whole panel.
///
/// # Safety
/// `panel` must be a live handle, `hyper` readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bvarx_fit(
    panel: *const BvarxPanel,
    hyper: *const BvarxHyper,
    out: *mut *mut BvarxPosterior,
) -> c_int {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let p = &panel.as_ref().ok_or(Fail::Null("panel"))?.0;
        let h: SzHyper = (*hyper.as_ref().ok_or(Fail::Null("hyper"))?).into();
        h.validate()?;
        *out = Box::into_raw(Box::new(BvarxPosterior(fit(&h, p)?)));
        Ok(())
    })
}

/// # Safety
/// `post` must come from [`bvarx_fit`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bvarx_posterior_free(post: *mut BvarxPosterior) {
    if !post.is_null() {
        drop(Box::from_raw(post));
    }
}

/// Posterior-mean coefficient matrix, `d × m` row-major with
/// `d = 1 + m·p + k` (intercept row, lag blocks, exogenous rows).
///
/// # Safety
/// `post` must be a live handle; `out` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn bvarx_posterior_coefficients(
    post: *const BvarxPosterior,
    out: *mut f64,
    capacity: usize,
    rows: *mut usize,
    cols: *mut usize,
) -> c_int {
    guard(|| {
        let b = &post.as_ref().ok_or(Fail::Null("post"))?.0.b_bar;
        let (d, m) = b.shape();
        *out_ref(rows, "rows")? = d;
        *out_ref(cols, "cols")? = m;
        if capacity < d * m {
            return Err(bvarx::Error::InvalidArgument(format!("buffer holds {capacity} values, need {}", d * m)).into());
        }
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let dst = std::slice::from_raw_parts_mut(out, d * m);
        for r in 0..d {
            for c in 0..m {
                dst[r * m + c] = b[(r, c)];
            }
        }
        Ok(())
    })
}

/// Point path and credible bounds `H × m` (row-major) with exogenous
/// values held at their last `H` observations. `lower_bounds`/`upper_bounds`
/// give each variable's support and may be NULL for an unbounded one.
///
/// # Safety
/// Handles must be live; the bound arrays, when non-NULL, hold `m` doubles;
/// the three output buffers hold `horizon · m` doubles each.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn bvarx_forecast(
    post: *const BvarxPosterior,
    panel: *const BvarxPanel,
    horizon: usize,
    draws: usize,
    gamma: f64,
    seed: u64,
    lower_bounds: *const f64,
    upper_bounds: *const f64,
    point: *mut f64,
    lower: *mut f64,
    upper: *mut f64,
) -> c_int {
    guard(|| {
        let post = &post.as_ref().ok_or(Fail::Null("post"))?.0;
        let train = &panel.as_ref().ok_or(Fail::Null("panel"))?.0;
        let m = train.m();
        let lo = if lower_bounds.is_null() { None } else { Some(slice(lower_bounds, m, "lower_bounds")?) };
        let hi = if upper_bounds.is_null() { None } else { Some(slice(upper_bounds, m, "upper_bounds")?) };
        let bounds = (0..m)
            .map(|j| {
                let a = lo.map_or(Support::UNBOUNDED.lower, |v| v[j]);
                let b = hi.map_or(Support::UNBOUNDED.upper, |v| v[j]);
                Support::new(a, b)
            })
            .collect::<bvarx::Result<Vec<_>>>()?;
        if point.is_null() || lower.is_null() || upper.is_null() {
            return Err(Fail::Null("output buffer"));
        }
        let opts = ForecastOptions { draws, gamma, seed, ..Default::default() };
        let exog = pinned_exog(train, horizon)?;
        let dist = forecast(post, train, &exog, horizon, &SupportBounds(bounds), &opts)?;
        let n = horizon * m;
        let (pt, lo, hi) = (
            std::slice::from_raw_parts_mut(point, n),
            std::slice::from_raw_parts_mut(lower, n),
            std::slice::from_raw_parts_mut(upper, n),
        );
        for h in 0..horizon {
            for j in 0..m {
                pt[h * m + j] = dist.point[(h, j)];
            }
        }
        for iv in &dist.intervals {
            let at = (iv.horizon - 1) * m + iv.variable;
            lo[at] = iv.lower;
            hi[at] = iv.upper;
        }
        Ok(())
    })
}

unsafe fn metric(
    actual: *const f64,
    forecast: *const f64,
    n: usize,
    out: *mut f64,
    f: impl FnOnce(&[f64], &[f64]) -> bvarx::Result<f64>,
) -> c_int {
    guard(|| {
        let a = slice(actual, n, "actual")?;
        let fc = slice(forecast, n, "forecast")?;
        *out_ref(out, "out")? = f(a, fc)?;
        Ok(())
    })
}

/// # Safety
/// `actual` and `forecast` hold `n` doubles; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn bvarx_rmse(actual: *const f64, forecast: *const f64, n: usize, out: *mut f64) -> c_int {
    metric(actual, forecast, n, out, metrics::rmse)
}

/// Symmetric MAPE as a fraction in `[0, 2]`, or times 100 when `percent` is non-zero.
///
/// # Safety
/// `actual` and `forecast` hold `n` doubles; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn bvarx_smape(
    actual: *const f64,
    forecast: *const f64,
    n: usize,
    percent: c_int,
    out: *mut f64,
) -> c_int {
    let mode = if percent != 0 { SmapeMode::Percent } else { SmapeMode::Fraction };
    metric(actual, forecast, n, out, |a, f| metrics::smape(a, f, mode).map(|c| c.value))
}

/// # Safety
/// `actual` and `forecast` hold `n` doubles, `insample` holds `n_insample`;
/// `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn bvarx_mase(
    actual: *const f64,
    forecast: *const f64,
    n: usize,
    insample: *const f64,
    n_insample: usize,
    period: usize,
    out: *mut f64,
) -> c_int {
    guard(|| {
        let ins = slice(insample, n_insample, "insample")?;
        let a = slice(actual, n, "actual")?;
        let f = slice(forecast, n, "forecast")?;
        *out_ref(out, "out")? = metrics::mase(a, f, ins, period)?;
        Ok(())
    })
}

/// # Safety
/// `actual` and `forecast` hold `n` doubles; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn bvarx_theil_u1(actual: *const f64, forecast: *const f64, n: usize, out: *mut f64) -> c_int {
    metric(actual, forecast, n, out, metrics::theil_u1)
}

/// # Safety
/// `actual` and `forecast` hold `n` doubles; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn bvarx_mdape(actual: *const f64, forecast: *const f64, n: usize, out: *mut f64) -> c_int {
    metric(actual, forecast, n, out, |a, f| metrics::mdape(a, f).map(|c| c.value))
}

/// Multivariate Diebold–Mariano test on a `t × k` row-major loss matrix with
/// adjacent pairing and the small-sample factor.
///
/// # Safety
/// `losses` holds `t · k` doubles; `statistic` and `p_value` are writable.
#[no_mangle]
pub unsafe extern "C" fn bvarx_dm_test(
    losses: *const f64,
    t: usize,
    k: usize,
    q: usize,
    statistic: *mut f64,
    p_value: *mut f64,
) -> c_int {
    guard(|| {
        let l = Mat::from_row_slice(t, k, slice(losses, t * k, "losses")?);
        let r = dm_multivariate(&l, &DmOptions { q, pairing: Pairing::Adjacent, small_sample: true })?;
        *out_ref(statistic, "statistic")? = r.statistic;
        *out_ref(p_value, "p_value")? = r.p_value;
        Ok(())
    })
}
