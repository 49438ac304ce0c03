//! C ABI for `seba-core`.
//!
//! A problem is created with [`seba_problem_new`], queried through the other
//! functions and released with [`seba_problem_free`]. Every fallible call
//! returns a [`SebaStatus`]; on failure a message is kept per thread and can
//! be read with [`seba_last_error_message`]. Outputs are written only on
//! success, except the partial buffer of [`seba_eigenvalues`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use seba_core::error::SebaError;
use seba_core::localization::epsilon;
use seba_core::model1d::{secular_lhs, Interval1D};
use seba_core::scatterer::{
    alpha_n, eigenvalues_for_alpha, Geometry, SeriesConfig, SpectralFunction,
};
use seba_core::transverse::{BoundaryCondition, TransverseBasis};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SebaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    PoleProximity = 3,
    Truncation = 4,
    NoConvergence = 5,
    LevelOutOfRange = 6,
    Degenerate = 7,
    BufferTooSmall = 8,
    Internal = 9,
}

/// Transverse boundary condition.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SebaBoundary {
    Dirichlet = 0,
    Neumann = 1,
    Periodic = 2,
    /// Uses the `theta` argument.
    Floquet = 3,
}

/// Opaque problem handle: geometry, boundary condition and series settings.
pub struct SebaProblem {
    f: SpectralFunction,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &SebaError) -> SebaStatus {
    match e {
        SebaError::Parameter { .. } | SebaError::Unnormalized { .. } => {
            SebaStatus::InvalidParameter
        }
        SebaError::PoleProximity { .. } => SebaStatus::PoleProximity,
        SebaError::Truncation { .. } => SebaStatus::Truncation,
        SebaError::NoConvergence { .. } | SebaError::MissingGroundState { .. } => {
            SebaStatus::NoConvergence
        }
        SebaError::LevelRange { .. } => SebaStatus::LevelOutOfRange,
        SebaError::Degenerate(_) => SebaStatus::Degenerate,
    }
}

fn guard(body: impl FnOnce() -> Result<(), (SebaStatus, String)>) -> SebaStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => SebaStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SebaStatus::Internal
        }
    }
}

fn lift(e: SebaError) -> (SebaStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (SebaStatus, String) {
    (SebaStatus::NullPointer, format!("{what} is null"))
}

unsafe fn problem<'a>(p: *const SebaProblem) -> Result<&'a SebaProblem, (SebaStatus, String)> {
    p.as_ref().ok_or_else(|| null("problem"))
}

/// Creates a problem on the unit-area rectangle of eccentricity `e` with the
/// scatterer at `(x0_frac·a, y0_frac·b)`. `bc` is a [`SebaBoundary`] value;
/// `tail_tol <= 0` selects the default.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn seba_problem_new(
    e: f64,
    x0_frac: f64,
    y0_frac: f64,
    bc: u32,
    theta: f64,
    tail_tol: f64,
    out: *mut *mut SebaProblem,
) -> SebaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let bc = match bc {
            b if b == SebaBoundary::Dirichlet as u32 => BoundaryCondition::Dirichlet,
            b if b == SebaBoundary::Neumann as u32 => BoundaryCondition::Neumann,
            b if b == SebaBoundary::Periodic as u32 => BoundaryCondition::Periodic,
            b if b == SebaBoundary::Floquet as u32 => {
                BoundaryCondition::floquet(theta).map_err(lift)?
            }
            other => {
                return Err((
                    SebaStatus::InvalidParameter,
                    format!("unknown boundary condition {other}"),
                ))
            }
        };
        let geom = Geometry::from_eccentricity(e, x0_frac, y0_frac).map_err(lift)?;
        let basis = TransverseBasis::new(bc).map_err(lift)?;
        let mut cfg = SeriesConfig::default();
        if tail_tol > 0.0 {
            cfg.tail_tol = tail_tol;
        }
        let f = SpectralFunction::new(geom, basis, cfg).map_err(lift)?;
        *out = Box::into_raw(Box::new(SebaProblem { f }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `p` must be null or come from [`seba_problem_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn seba_problem_free(p: *mut SebaProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// `F(z)` and `F'(z)`. Either output may be null.
///
/// # Safety
/// `p` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn seba_eval_f(
    p: *const SebaProblem,
    z: f64,
    value: *mut f64,
    derivative: *mut f64,
) -> SebaStatus {
    guard(|| {
        let v = problem(p)?.f.eval(z).map_err(lift)?;
        if !value.is_null() {
            *value = v.value;
        }
        if !derivative.is_null() {
            *derivative = v.derivative;
        }
        Ok(())
    })
}

/// The coupling `α_n` and the eigenvalue it produces.
///
/// # Safety
/// `p` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn seba_alpha_n(
    p: *const SebaProblem,
    n: usize,
    alpha: *mut f64,
    z_target: *mut f64,
) -> SebaStatus {
    guard(|| {
        let an = alpha_n(n, &problem(p)?.f).map_err(lift)?;
        if !alpha.is_null() {
            *alpha = an.alpha;
        }
        if !z_target.is_null() {
            *z_target = an.z_target;
        }
        Ok(())
    })
}

/// Eigenvalues in `[lo, hi]` for coupling `alpha`, ascending and repeated by
/// multiplicity. `*len` receives the total count; when it exceeds `cap` the
/// call returns `BufferTooSmall` and writes the first `cap` values.
///
/// # Safety
/// `p` must be a live handle, `buf` must hold `cap` doubles (or be null when
/// `cap` is 0) and `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seba_eigenvalues(
    p: *const SebaProblem,
    alpha: f64,
    lo: f64,
    hi: f64,
    buf: *mut f64,
    cap: usize,
    len: *mut usize,
) -> SebaStatus {
    guard(|| {
        if len.is_null() {
            return Err(null("len"));
        }
        if buf.is_null() && cap > 0 {
            return Err(null("buf"));
        }
        let pairs = eigenvalues_for_alpha(alpha, &problem(p)?.f, (lo, hi)).map_err(lift)?;
        let values: Vec<f64> = pairs
            .iter()
            .flat_map(|e| std::iter::repeat_n(e.z, e.multiplicity))
            .collect();
        *len = values.len();
        for (i, v) in values.iter().take(cap).enumerate() {
            *buf.add(i) = *v;
        }
        if values.len() > cap {
            return Err((
                SebaStatus::BufferTooSmall,
                format!("{} eigenvalues, buffer holds {cap}", values.len()),
            ));
        }
        Ok(())
    })
}

/// Localization error `ε` at level `n`, its theoretical bound and the eigenvalue.
///
/// # Safety
/// `p` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn seba_epsilon(
    p: *const SebaProblem,
    n: usize,
    eps: *mut f64,
    bound: *mut f64,
    z: *mut f64,
) -> SebaStatus {
    guard(|| {
        let f = &problem(p)?.f;
        let g = f.geometry();
        let r = epsilon(
            n,
            g.eccentricity(),
            g.x0_frac(),
            g.y0_frac(),
            f.basis(),
            f.config(),
        )
        .map_err(lift)?;
        for (ptr, v) in [(eps, r.epsilon), (bound, r.bound), (z, r.z)] {
            if !ptr.is_null() {
                *ptr = v;
            }
        }
        Ok(())
    })
}

/// Left side of the secular equation of `-d² - cδ(x - x0)` on `[0, a]`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn seba_secular_lhs(a: f64, x0: f64, z: f64, out: *mut f64) -> SebaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let iv = Interval1D::new(a, x0).map_err(lift)?;
        *out = secular_lhs(z, &iv).map_err(lift)?;
        Ok(())
    })
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `cap`) and returns the length the full message needs,
/// including the terminator.
///
/// # Safety
/// `buf` must hold `cap` bytes, or be null when `cap` is 0.
#[no_mangle]
pub unsafe extern "C" fn seba_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_bytes_with_nul();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap);
            std::ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n - 1) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn seba_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
