//! C interface to the swipt-noma solvers.
//!
//! Instances and solutions are opaque handles created by this library and
//! released with the matching `_free` function. Every fallible call returns a
//! [`SwiptStatus`]; the message behind the most recent error on the calling
//! thread is available from [`swipt_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nalgebra::DVector;
use num_complex::Complex64;
use swipt_noma::channel::{sample_instance, trial_rng, GeometryConfig};
use swipt_noma::error::Error;
use swipt_noma::miso::{self, MisoOptions};
use swipt_noma::siso;
use swipt_noma::system::{MisoInstance, SisoInstance, SolveStatus, SystemParams};

/// Return code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwiptStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    SolverError = 4,
    Panic = 5,
}

/// Outcome of a solve, read back with [`swipt_solution_status`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwiptSolveStatus {
    Optimal = 0,
    Stationary = 1,
    Infeasible = 2,
    MaxIter = 3,
}

impl From<SolveStatus> for SwiptSolveStatus {
    fn from(s: SolveStatus) -> Self {
        match s {
            SolveStatus::Optimal => SwiptSolveStatus::Optimal,
            SolveStatus::Stationary => SwiptSolveStatus::Stationary,
            SolveStatus::Infeasible => SwiptSolveStatus::Infeasible,
            SolveStatus::MaxIter => SwiptSolveStatus::MaxIter,
        }
    }
}

/// Opaque channel instance.
pub struct SwiptInstance {
    inner: MisoInstance,
}

/// Opaque solver result.
pub struct SwiptSolution {
    status: SolveStatus,
    beta: f64,
    alpha: f64,
    objective: f64,
    iterations: usize,
    w1: Vec<Complex64>,
    w2: Vec<Complex64>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(code: SwiptStatus, msg: impl Into<String>) -> SwiptStatus {
    set_error(msg.into());
    code
}

fn from_error(e: Error) -> SwiptStatus {
    let code = match e {
        Error::Dimension(_) => SwiptStatus::DimensionMismatch,
        Error::BetaOutOfRange(_) | Error::InvalidParameter(_) | Error::Config(_) | Error::DegenerateGeometry(_) => {
            SwiptStatus::InvalidArgument
        }
        _ => SwiptStatus::SolverError,
    };
    fail(code, e.to_string())
}

fn guard(f: impl FnOnce() -> SwiptStatus) -> SwiptStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(code) => code,
        Err(_) => fail(SwiptStatus::Panic, "panic inside swipt-noma"),
    }
}

unsafe fn emit<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

/// Message of the last error on this thread, or NULL. Valid until the next
/// call into the library from the same thread.
#[no_mangle]
pub extern "C" fn swipt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Single-antenna instance from normalized gains.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn swipt_instance_new_siso(
    h1: f64,
    h2: f64,
    g: f64,
    out: *mut *mut SwiptInstance,
) -> SwiptStatus {
    if out.is_null() {
        return fail(SwiptStatus::NullPointer, "out is NULL");
    }
    guard(|| match SisoInstance::new(h1, h2, g) {
        Ok(s) => {
            emit(
                out,
                SwiptInstance {
                    inner: MisoInstance::from_siso(&s),
                },
            );
            SwiptStatus::Ok
        }
        Err(e) => from_error(e),
    })
}

unsafe fn read_complex(re: *const f64, im: *const f64, n: usize) -> Vec<Complex64> {
    let re = std::slice::from_raw_parts(re, n);
    let im = std::slice::from_raw_parts(im, n);
    re.iter().zip(im).map(|(&r, &i)| Complex64::new(r, i)).collect()
}

/// Multi-antenna instance from normalized channel vectors given as separate
/// real and imaginary arrays of length `n`.
///
/// # Safety
/// The four arrays must hold `n` readable doubles each; `out` as above.
#[no_mangle]
pub unsafe extern "C" fn swipt_instance_new_miso(
    n: usize,
    h1_re: *const f64,
    h1_im: *const f64,
    h2_re: *const f64,
    h2_im: *const f64,
    g: f64,
    out: *mut *mut SwiptInstance,
) -> SwiptStatus {
    if out.is_null() || h1_re.is_null() || h1_im.is_null() || h2_re.is_null() || h2_im.is_null() {
        return fail(SwiptStatus::NullPointer, "NULL argument");
    }
    if n == 0 {
        return fail(SwiptStatus::DimensionMismatch, "n must be positive");
    }
    guard(|| {
        let h1 = DVector::from_vec(read_complex(h1_re, h1_im, n));
        let h2 = DVector::from_vec(read_complex(h2_re, h2_im, n));
        match MisoInstance::new(h1, h2, g) {
            Ok(inner) => {
                emit(out, SwiptInstance { inner });
                SwiptStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Draws an instance from the default channel model with `antennas` transmit
/// antennas at `transmit_power_dbm`. The same `(seed, trial)` always gives
/// the same instance.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn swipt_instance_sample(
    seed: u64,
    trial: u64,
    antennas: usize,
    transmit_power_dbm: f64,
    out: *mut *mut SwiptInstance,
) -> SwiptStatus {
    if out.is_null() {
        return fail(SwiptStatus::NullPointer, "out is NULL");
    }
    guard(|| {
        let params = SystemParams {
            antenna_count_nt: antennas,
            transmit_power_dbm,
            ..SystemParams::default()
        };
        if let Err(e) = params.validate() {
            return from_error(e);
        }
        match sample_instance(&mut trial_rng(seed, trial), &params, &GeometryConfig::default()) {
            Ok(inner) => {
                emit(out, SwiptInstance { inner });
                SwiptStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Number of transmit antennas, or 0 for a NULL handle.
///
/// # Safety
/// `inst` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn swipt_instance_antennas(inst: *const SwiptInstance) -> usize {
    inst.as_ref().map_or(0, |i| i.inner.antennas())
}

/// Squared channel norms `‖h1‖²`, `‖h2‖²` and the relay gain.
///
/// # Safety
/// `inst` must be a live handle; the outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn swipt_instance_gains(
    inst: *const SwiptInstance,
    h1: *mut f64,
    h2: *mut f64,
    g: *mut f64,
) -> SwiptStatus {
    let Some(i) = inst.as_ref() else {
        return fail(SwiptStatus::NullPointer, "instance is NULL");
    };
    if h1.is_null() || h2.is_null() || g.is_null() {
        return fail(SwiptStatus::NullPointer, "NULL output");
    }
    let (a, b) = i.inner.matched_filter_gains();
    *h1 = a;
    *h2 = b;
    *g = i.inner.g;
    SwiptStatus::Ok
}

/// # Safety
/// `inst` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn swipt_instance_free(inst: *mut SwiptInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

fn check_gamma(gamma1: f64) -> Option<SwiptStatus> {
    (!(gamma1.is_finite() && gamma1 > 0.0)).then(|| fail(SwiptStatus::InvalidArgument, format!("gamma1 = {gamma1}")))
}

fn miso_solution(sol: swipt_noma::system::MisoSolution) -> SwiptSolution {
    SwiptSolution {
        status: sol.status,
        beta: sol.beta,
        alpha: f64::NAN,
        objective: sol.objective,
        iterations: sol.iterations,
        w1: sol.w1.iter().copied().collect(),
        w2: sol.w2.iter().copied().collect(),
    }
}

/// Golden-section search on a single-antenna instance. `eps <= 0` selects
/// the default bracket tolerance.
///
/// # Safety
/// `inst` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn swipt_solve_siso(
    inst: *const SwiptInstance,
    gamma1: f64,
    eps: f64,
    out: *mut *mut SwiptSolution,
) -> SwiptStatus {
    let Some(i) = inst.as_ref() else {
        return fail(SwiptStatus::NullPointer, "instance is NULL");
    };
    if out.is_null() {
        return fail(SwiptStatus::NullPointer, "out is NULL");
    }
    if let Some(code) = check_gamma(gamma1) {
        return code;
    }
    guard(|| {
        let s = match i.inner.to_siso() {
            Ok(s) => s,
            Err(e) => return from_error(e),
        };
        let eps = if eps > 0.0 { eps } else { siso::DEFAULT_GSS_EPS };
        let sol = siso::gss_solve(&s, gamma1, eps);
        let (w1, w2) = if sol.status.has_solution() {
            (
                vec![Complex64::new(sol.alpha.sqrt(), 0.0)],
                vec![Complex64::new((1.0 - sol.alpha).sqrt(), 0.0)],
            )
        } else {
            (vec![Complex64::default()], vec![Complex64::default()])
        };
        emit(
            out,
            SwiptSolution {
                status: sol.status,
                beta: sol.beta,
                alpha: sol.alpha,
                objective: sol.objective,
                iterations: sol.iterations,
                w1,
                w2,
            },
        );
        SwiptStatus::Ok
    })
}

/// Successive convex approximation. `eps <= 0` and `max_iter == 0` select
/// the defaults.
///
/// # Safety
/// `inst` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn swipt_solve_sca(
    inst: *const SwiptInstance,
    gamma1: f64,
    eps: f64,
    max_iter: usize,
    out: *mut *mut SwiptSolution,
) -> SwiptStatus {
    let Some(i) = inst.as_ref() else {
        return fail(SwiptStatus::NullPointer, "instance is NULL");
    };
    if out.is_null() {
        return fail(SwiptStatus::NullPointer, "out is NULL");
    }
    if let Some(code) = check_gamma(gamma1) {
        return code;
    }
    guard(|| {
        let eps = if eps > 0.0 { eps } else { miso::DEFAULT_SCA_EPS };
        let max_iter = if max_iter > 0 {
            max_iter
        } else {
            miso::DEFAULT_SCA_MAX_ITER
        };
        match miso::sca_solve(&i.inner, gamma1, eps, max_iter) {
            Ok(sol) => {
                emit(out, miso_solution(sol));
                SwiptStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Exhaustive search over a `grid × grid` lattice of `(β, x)`. `grid == 0`
/// selects the default.
///
/// # Safety
/// `inst` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn swipt_solve_exhaustive(
    inst: *const SwiptInstance,
    gamma1: f64,
    grid: usize,
    out: *mut *mut SwiptSolution,
) -> SwiptStatus {
    let Some(i) = inst.as_ref() else {
        return fail(SwiptStatus::NullPointer, "instance is NULL");
    };
    if out.is_null() {
        return fail(SwiptStatus::NullPointer, "out is NULL");
    }
    if let Some(code) = check_gamma(gamma1) {
        return code;
    }
    if grid == 1 {
        return fail(SwiptStatus::InvalidArgument, "grid needs at least 2 points");
    }
    guard(|| {
        let grid = if grid > 0 { grid } else { miso::DEFAULT_GRID };
        let opts = MisoOptions::default();
        match miso::exhaustive_search_detailed(&i.inner, gamma1, grid, grid, &opts) {
            Ok((sol, _)) => {
                emit(out, miso_solution(sol));
                SwiptStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Infeasible for a NULL handle.
///
/// # Safety
/// `sol` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn swipt_solution_status(sol: *const SwiptSolution) -> SwiptSolveStatus {
    sol.as_ref().map_or(SwiptSolveStatus::Infeasible, |s| s.status.into())
}

/// Power-splitting ratio at user 2. NaN for a NULL handle.
///
/// # Safety
/// `sol` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn swipt_solution_beta(sol: *const SwiptSolution) -> f64 {
    sol.as_ref().map_or(f64::NAN, |s| s.beta)
}

/// Power fraction of user 1; NaN for multi-antenna solutions.
///
/// # Safety
/// `sol` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn swipt_solution_alpha(sol: *const SwiptSolution) -> f64 {
    sol.as_ref().map_or(f64::NAN, |s| s.alpha)
}

/// SNR of user 2.
///
/// # Safety
/// `sol` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn swipt_solution_objective(sol: *const SwiptSolution) -> f64 {
    sol.as_ref().map_or(f64::NAN, |s| s.objective)
}

/// # Safety
/// `sol` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn swipt_solution_iterations(sol: *const SwiptSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.iterations)
}

/// Copies both beamformers into caller arrays of length `n`, which must equal
/// the antenna count.
///
/// # Safety
/// `sol` must be a live handle and the four arrays writable for `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn swipt_solution_beamformers(
    sol: *const SwiptSolution,
    n: usize,
    w1_re: *mut f64,
    w1_im: *mut f64,
    w2_re: *mut f64,
    w2_im: *mut f64,
) -> SwiptStatus {
    let Some(s) = sol.as_ref() else {
        return fail(SwiptStatus::NullPointer, "solution is NULL");
    };
    if w1_re.is_null() || w1_im.is_null() || w2_re.is_null() || w2_im.is_null() {
        return fail(SwiptStatus::NullPointer, "NULL output");
    }
    if n != s.w1.len() {
        return fail(
            SwiptStatus::DimensionMismatch,
            format!("buffer length {n}, expected {}", s.w1.len()),
        );
    }
    for (k, (a, b)) in s.w1.iter().zip(&s.w2).enumerate() {
        *w1_re.add(k) = a.re;
        *w1_im.add(k) = a.im;
        *w2_re.add(k) = b.re;
        *w2_im.add(k) = b.im;
    }
    SwiptStatus::Ok
}

/// # Safety
/// `sol` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn swipt_solution_free(sol: *mut SwiptSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}
