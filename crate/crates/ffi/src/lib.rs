//! C ABI for mixcomp.
//!
//! Density operators and ensembles are opaque heap handles. Every fallible
//! call returns a [`MixStatus`]; on failure the message is kept per thread
//! and can be read with [`mix_last_error_message`]. Matrices are passed as
//! row-major `double` arrays of real and (optional) imaginary parts.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mixcomp::classical::{xi_rate, CoinSource};
use mixcomp::measures::{classical_fidelity, fidelity, holevo, shannon_entropy, vn_entropy, Ensemble, ProbVector};
use mixcomp::purify::{photographic_negative_rate_closed_form, purification_rate};
use mixcomp::qmat::{ComplexMatrix, DensityOperator};
use mixcomp::rates::{lower_bound_rate, rate_report, upper_bound_rate, RateOptions};
use mixcomp::Error;
use num_complex::Complex64;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MixStatus {
    Ok = 0,
    NullPointer = 1,
    NotHermitian = 2,
    NotPsd = 3,
    InvalidTrace = 4,
    DimensionMismatch = 5,
    InvalidProbabilities = 6,
    Domain = 7,
    NoConvergence = 8,
    Overflow = 9,
    Other = 10,
    Panic = 11,
}

impl From<&Error> for MixStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::NotHermitian { .. } => MixStatus::NotHermitian,
            Error::NotPsd { .. } => MixStatus::NotPsd,
            Error::InvalidTrace { .. } => MixStatus::InvalidTrace,
            Error::DimensionMismatch(_) | Error::LengthMismatch { .. } => MixStatus::DimensionMismatch,
            Error::InvalidProbabilities(_) => MixStatus::InvalidProbabilities,
            Error::Domain(_) | Error::DegenerateProtocol => MixStatus::Domain,
            Error::NoConvergence { .. } => MixStatus::NoConvergence,
            Error::DimensionOverflow { .. } => MixStatus::Overflow,
            _ => MixStatus::Other,
        }
    }
}

/// Opaque validated density operator.
pub struct MixDensity(DensityOperator);

/// Opaque validated ensemble.
pub struct MixEnsemble(Ensemble);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: MixStatus, msg: String) -> MixStatus {
    set_error(msg);
    status
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), MixStatus>) -> MixStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MixStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(MixStatus::Panic, "internal panic".into()),
    }
}

fn lift<T>(r: mixcomp::Result<T>) -> Result<T, MixStatus> {
    r.map_err(|e| fail(MixStatus::from(&e), e.to_string()))
}

fn null(what: &str) -> MixStatus {
    fail(MixStatus::NullPointer, format!("{what} is null"))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), MixStatus> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], MixStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn density<'a>(h: *const MixDensity) -> Result<&'a DensityOperator, MixStatus> {
    h.as_ref().map(|d| &d.0).ok_or_else(|| null("density handle"))
}

unsafe fn ensemble<'a>(h: *const MixEnsemble) -> Result<&'a Ensemble, MixStatus> {
    h.as_ref().map(|e| &e.0).ok_or_else(|| null("ensemble handle"))
}

/// Builds a `dim x dim` density operator. `im` may be null for real matrices.
///
/// # Safety
/// `re` (and `im` when non-null) must point to `dim * dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mix_density_new(
    dim: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut MixDensity,
) -> MixStatus {
    guard(|| {
        if dim == 0 {
            return Err(fail(MixStatus::DimensionMismatch, "dimension must be positive".into()));
        }
        let n = dim
            .checked_mul(dim)
            .ok_or_else(|| fail(MixStatus::Overflow, "dimension overflows".into()))?;
        let re = slice(re, n, "re")?;
        let im = if im.is_null() { None } else { Some(slice(im, n, "im")?) };
        let entries = (0..n)
            .map(|i| Complex64::new(re[i], im.map_or(0.0, |v| v[i])))
            .collect();
        let m = lift(ComplexMatrix::from_row_major(dim, dim, entries))?;
        let rho = lift(DensityOperator::new(m))?;
        write_out(out, Box::into_raw(Box::new(MixDensity(rho))))
    })
}

/// # Safety
/// `h` must be null or come from [`mix_density_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn mix_density_free(h: *mut MixDensity) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Dimension of the state, 0 for a null handle.
///
/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mix_density_dim(h: *const MixDensity) -> usize {
    h.as_ref().map_or(0, |d| d.0.dim())
}

/// Von Neumann entropy in bits.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mix_vn_entropy(h: *const MixDensity, out: *mut f64) -> MixStatus {
    guard(|| write_out(out, vn_entropy(density(h)?)))
}

/// Squared fidelity F(a, b).
///
/// # Safety
/// `a`, `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mix_fidelity(a: *const MixDensity, b: *const MixDensity, out: *mut f64) -> MixStatus {
    guard(|| {
        let f = lift(fidelity(density(a)?, density(b)?))?;
        write_out(out, f)
    })
}

/// Builds an ensemble from `n` probabilities and `n` density handles.
/// The states are copied; the caller keeps ownership of `states`.
///
/// # Safety
/// `probs` and `states` must each hold `n` entries of live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mix_ensemble_new(
    n: usize,
    probs: *const f64,
    states: *const *const MixDensity,
    out: *mut *mut MixEnsemble,
) -> MixStatus {
    guard(|| {
        if n == 0 {
            return Err(fail(MixStatus::InvalidProbabilities, "ensemble must be non-empty".into()));
        }
        let p = slice(probs, n, "probs")?;
        if states.is_null() {
            return Err(null("states"));
        }
        let handles = std::slice::from_raw_parts(states, n);
        let states = handles
            .iter()
            .map(|&h| density(h).cloned())
            .collect::<Result<Vec<_>, _>>()?;
        let probs = lift(ProbVector::new(p.to_vec()))?;
        let e = lift(Ensemble::new(probs, states))?;
        write_out(out, Box::into_raw(Box::new(MixEnsemble(e))))
    })
}

/// # Safety
/// `h` must be null or come from [`mix_ensemble_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn mix_ensemble_free(h: *mut MixEnsemble) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Holevo quantity in bits.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mix_holevo(h: *const MixEnsemble, out: *mut f64) -> MixStatus {
    guard(|| write_out(out, holevo(ensemble(h)?)))
}

/// Entropy of the average state, the rate every source can reach.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mix_upper_bound_rate(h: *const MixEnsemble, out: *mut f64) -> MixStatus {
    guard(|| write_out(out, upper_bound_rate(ensemble(h)?)))
}

/// Holevo quantity, below which no scheme can go.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mix_lower_bound_rate(h: *const MixEnsemble, out: *mut f64) -> MixStatus {
    guard(|| write_out(out, lower_bound_rate(ensemble(h)?)))
}

/// Shannon entropy in bits of `n` probabilities.
///
/// # Safety
/// `p` must hold `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mix_shannon_entropy(n: usize, p: *const f64, out: *mut f64) -> MixStatus {
    guard(|| {
        let pv = lift(ProbVector::new(slice(p, n, "p")?.to_vec()))?;
        write_out(out, shannon_entropy(&pv))
    })
}

/// (Σ √(p_i q_i))².
///
/// # Safety
/// `p` and `q` must each hold `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mix_classical_fidelity(n: usize, p: *const f64, q: *const f64, out: *mut f64) -> MixStatus {
    guard(|| {
        let p = lift(ProbVector::new(slice(p, n, "p")?.to_vec()))?;
        let q = lift(ProbVector::new(slice(q, n, "q")?.to_vec()))?;
        write_out(out, lift(classical_fidelity(&p, &q))?)
    })
}

/// Purification rate of the flip source with parameter `epsilon` in [0, 1/2].
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mix_upsilon_rate(epsilon: f64, out: *mut f64) -> MixStatus {
    guard(|| write_out(out, lift(purification_rate(epsilon))?))
}

/// Three-message rate for coins with heads probabilities `alpha1`, `alpha2`
/// chosen with priors `p1`, `1 - p1`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mix_xi_rate(p1: f64, alpha1: f64, alpha2: f64, out: *mut f64) -> MixStatus {
    guard(|| {
        let src = lift(CoinSource::new(p1, alpha1, alpha2))?;
        write_out(out, xi_rate(&src))
    })
}

/// Rate of the unitary-encoding scheme for the photographic-negative
/// ensemble in dimension `d >= 3`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mix_photographic_negative_q(d: usize, out: *mut f64) -> MixStatus {
    guard(|| {
        if d < 3 {
            return Err(fail(MixStatus::Domain, format!("dimension must be at least 3, got {d}")));
        }
        write_out(out, photographic_negative_rate_closed_form(d))
    })
}

/// Full rate report as a JSON string. Free it with [`mix_string_free`].
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mix_rate_report_json(h: *const MixEnsemble, out: *mut *mut c_char) -> MixStatus {
    guard(|| {
        let rep = lift(rate_report(ensemble(h)?, RateOptions::default()))?;
        let text = serde_json::to_string(&rep).map_err(|e| fail(MixStatus::Other, e.to_string()))?;
        let c = CString::new(text).map_err(|e| fail(MixStatus::Other, e.to_string()))?;
        write_out(out, c.into_raw())
    })
}

/// # Safety
/// `s` must be null or come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn mix_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message of the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn mix_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}
