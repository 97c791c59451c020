//! C ABI over the commlab grid, transform and operator types.
//!
//! Every object crosses the boundary as an opaque pointer created by a
//! `*_new` style call and released by the matching `*_free`. Fallible calls
//! return a `CommlabStatus` and write results through out-pointers; the
//! message of the most recent failure on the calling thread is available from
//! `commlab_last_error_message`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use commlab::error::Error;
use commlab::grid::{forward_ft, inverse_ft, Grid, SampledField, Side};
use commlab::operators::{operator_norm_l2, OperatorHandle};
use commlab::symbols::SymbolSpec;
use num_complex::Complex64;

/// Result codes returned by every fallible call.
#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommlabStatus {
    Ok = 0,
    NullPointer = 1,
    /// Bad input: grid shape, symbol expression, dimensions, guards.
    InvalidArgument = 2,
    /// Quadrature, SVD or power-iteration failure.
    Numerical = 3,
    Io = 4,
    /// A Rust panic was caught at the boundary.
    Panic = 5,
}

/// Which side of the transform a field lives on.
#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommlabSide {
    Spatial = 0,
    Frequency = 1,
}

/// Periodic lattice `[-L, L)^d` with `N` points per axis.
pub struct CommlabGrid(Grid);

/// Complex samples on a grid.
pub struct CommlabField(SampledField);

/// A linear operator on fields over one grid.
pub struct CommlabOperator(OperatorHandle);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> CommlabStatus {
    match e {
        Error::Io(_) => CommlabStatus::Io,
        e if e.is_numerical() => CommlabStatus::Numerical,
        _ => CommlabStatus::InvalidArgument,
    }
}

struct Fail(CommlabStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(CommlabStatus::NullPointer, format!("`{what}` is null"))
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> CommlabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CommlabStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside commlab".into());
            CommlabStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn symbol_from(expr: *const c_char, d: usize) -> Result<SymbolSpec, Fail> {
    if expr.is_null() {
        return Err(null("symbol"));
    }
    let text = CStr::from_ptr(expr)
        .to_str()
        .map_err(|_| Fail(CommlabStatus::InvalidArgument, "symbol is not valid UTF-8".into()))?;
    Ok(SymbolSpec::parse(text, d)?)
}

/// Message of the last failed call on this thread, or null if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn commlab_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn commlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `out` must be a valid pointer to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn commlab_grid_new(d: usize, n: usize, l: f64, out: *mut *mut CommlabGrid) -> CommlabStatus {
    guard(|| store(out, CommlabGrid(Grid::new(d, n, l)?)))
}

/// # Safety
/// `grid` must be null or a pointer from `commlab_grid_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn commlab_grid_free(grid: *mut CommlabGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Number of lattice points `N^d`, or 0 for a null grid.
///
/// # Safety
/// `grid` must be null or a live grid handle.
#[no_mangle]
pub unsafe extern "C" fn commlab_grid_len(grid: *const CommlabGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.0.len())
}

/// Build a field from `len` real and imaginary parts in lattice order (last axis fastest).
/// `im` may be null for a real field.
///
/// # Safety
/// `re` (and `im` when non-null) must point to `len` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn commlab_field_new(
    grid: *const CommlabGrid,
    side: CommlabSide,
    re: *const f64,
    im: *const f64,
    len: usize,
    out: *mut *mut CommlabField,
) -> CommlabStatus {
    guard(|| {
        let g = deref(grid, "grid")?.0;
        if re.is_null() {
            return Err(null("re"));
        }
        let re = std::slice::from_raw_parts(re, len);
        let values: Vec<Complex64> = if im.is_null() {
            re.iter().map(|&r| Complex64::new(r, 0.0)).collect()
        } else {
            let im = std::slice::from_raw_parts(im, len);
            re.iter().zip(im).map(|(&r, &i)| Complex64::new(r, i)).collect()
        };
        let side = match side {
            CommlabSide::Spatial => Side::Spatial,
            CommlabSide::Frequency => Side::Frequency,
        };
        store(out, CommlabField(SampledField::new(g, side, values)?))
    })
}

/// # Safety
/// `field` must be null or a live field handle.
#[no_mangle]
pub unsafe extern "C" fn commlab_field_free(field: *mut CommlabField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Copy the samples out; `len` must equal the grid size. `im` may be null.
///
/// # Safety
/// `re` (and `im` when non-null) must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn commlab_field_read(
    field: *const CommlabField,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> CommlabStatus {
    guard(|| {
        let f = &deref(field, "field")?.0;
        if re.is_null() {
            return Err(null("re"));
        }
        if len != f.values.len() {
            return Err(Fail(
                CommlabStatus::InvalidArgument,
                format!("buffer holds {len} values, field has {}", f.values.len()),
            ));
        }
        let re = std::slice::from_raw_parts_mut(re, len);
        for (r, v) in re.iter_mut().zip(&f.values) {
            *r = v.re;
        }
        if !im.is_null() {
            let im = std::slice::from_raw_parts_mut(im, len);
            for (i, v) in im.iter_mut().zip(&f.values) {
                *i = v.im;
            }
        }
        Ok(())
    })
}

/// Forward transform of a spatial field.
///
/// # Safety
/// `field` must be a live field handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn commlab_forward_ft(field: *const CommlabField, out: *mut *mut CommlabField) -> CommlabStatus {
    guard(|| store(out, CommlabField(forward_ft(&deref(field, "field")?.0)?)))
}

/// Inverse transform of a frequency field.
///
/// # Safety
/// `field` must be a live field handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn commlab_inverse_ft(field: *const CommlabField, out: *mut *mut CommlabField) -> CommlabStatus {
    guard(|| store(out, CommlabField(inverse_ft(&deref(field, "field")?.0)?)))
}

/// Multiplier with the symbol named by `symbol` (same sub-language as the CLI configs).
/// With `sphere` set the symbol is evaluated at `xi / |xi|`.
///
/// # Safety
/// `grid` must be a live grid handle, `symbol` a NUL-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn commlab_operator_multiplier(
    grid: *const CommlabGrid,
    symbol: *const c_char,
    sphere: bool,
    out: *mut *mut CommlabOperator,
) -> CommlabStatus {
    guard(|| {
        let g = deref(grid, "grid")?.0;
        let a = symbol_from(symbol, g.dim())?;
        store(out, CommlabOperator(OperatorHandle::multiplier(a, sphere, g)?))
    })
}

/// Commutator of the multiplier for `symbol` with multiplication by the spatial field `b`.
///
/// # Safety
/// `b` must be a live field handle, `symbol` a NUL-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn commlab_operator_commutator(
    symbol: *const c_char,
    sphere: bool,
    b: *const CommlabField,
    out: *mut *mut CommlabOperator,
) -> CommlabStatus {
    guard(|| {
        let b = &deref(b, "b")?.0;
        let a = symbol_from(symbol, b.grid.dim())?;
        store(out, CommlabOperator(OperatorHandle::commutator(a, sphere, b.clone())?))
    })
}

/// # Safety
/// `op` must be null or a live operator handle.
#[no_mangle]
pub unsafe extern "C" fn commlab_operator_free(op: *mut CommlabOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Apply the operator, or its adjoint when `adjoint` is set, to a spatial field.
///
/// # Safety
/// `op` and `u` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn commlab_operator_apply(
    op: *const CommlabOperator,
    u: *const CommlabField,
    adjoint: bool,
    out: *mut *mut CommlabField,
) -> CommlabStatus {
    guard(|| {
        let op = &deref(op, "op")?.0;
        let u = &deref(u, "u")?.0;
        let v = if adjoint { op.apply_adjoint(u)? } else { op.apply(u)? };
        store(out, CommlabField(v))
    })
}

/// L2 operator norm by power iteration with at most `iterations` steps.
/// Fails with `COMMLAB_STATUS_NUMERICAL` if the iteration does not converge.
///
/// # Safety
/// `op` must be a live operator handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn commlab_operator_norm(
    op: *const CommlabOperator,
    iterations: usize,
    out: *mut f64,
) -> CommlabStatus {
    guard(|| {
        let op = &deref(op, "op")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = operator_norm_l2(op, iterations)?.require_converged()?;
        Ok(())
    })
}
